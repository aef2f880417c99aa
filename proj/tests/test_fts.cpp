#include <doctest.h>

#include <bit>
#include <cmath>
#include <complex>

#include "phase_oracle.hpp"
#include "support.hpp"
#include "tics/error.hpp"
#include "tics/fts/controller.hpp"
#include "tics/fts/hardware.hpp"
#include "tics/fts/tracking.hpp"
#include "tics/fts/walsh.hpp"
#include "tics/harness/array.hpp"

using namespace tics;
using namespace tics::fts;
using namespace std::chrono_literals;

namespace {

framework::Registry one_fts(int walsh_index = 1, bool chirp = true) {
  nlohmann::json doc = {{"buses", nlohmann::json::array({{{"name", "ant1"}, {"abm", "abm1"}}})},
                        {"devices", nlohmann::json::array({test::fts_device("ANT1/FTS", "ant1", walsh_index, chirp)})}};
  return framework::Registry::load(doc);
}

void run_to(harness::Array& a, std::uint64_t event) {
  while (a.current_event() < event) a.pulse();
}

// Walsh sign by definition, kept separate from the library.
int sign(std::uint32_t k, std::uint32_t i) { return std::popcount(k & i) % 2 ? -1 : 1; }

}  // namespace

TEST_CASE("walsh functions") {
  CHECK(walsh(0, 64) == std::vector<int>(64, 1));
  CHECK(walsh(1, 4) == std::vector<int>{1, -1, 1, -1});
  CHECK(walsh(3, 4) == std::vector<int>{1, -1, -1, 1});
  CHECK_THROWS_AS(walsh(64, 64), DomainError);
  CHECK_THROWS_AS(walsh(1, 48), DomainError);
  CHECK_THROWS_AS(walsh(0, 0), DomainError);

  const auto dot = [](const std::vector<int>& a, const std::vector<int>& b) {
    int s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  CHECK(dot(walsh(3, 64), walsh(5, 64)) == 0);
  for (std::uint32_t a = 0; a < 64; ++a) {
    const auto wa = walsh(a, 64);
    for (std::uint32_t i = 0; i < 64; ++i) REQUIRE(wa[i] == sign(a, i));
    for (std::uint32_t b = 0; b < 64; ++b) REQUIRE(dot(wa, walsh(b, 64)) == (a == b ? 64 : 0));
  }
}

TEST_CASE("pattern structure") {
  CHECK(kPatternSlots == 4096);
  CHECK(kPatternSlots * kSwitchSlot == 1024ms);
  CHECK_THROWS_AS(build_pattern(0), DomainError);
  CHECK_THROWS_AS(build_pattern(64), DomainError);
  CHECK(build_pattern(1).quadrant(0) == 0);

  for (int k = 1; k < 64; ++k) {
    const auto p = build_pattern(k);
    CHECK(p.walsh_index == k);
    long fast_autocorr = 0;
    for (std::size_t s = 0; s < kPatternSlots; ++s) {
      const int q = p.quadrant(s);
      REQUIRE(q < 4);
      const int fast = q >> 1;
      const int slow = q & 1;
      // fast bit: walsh(k) slot by slot; slow bit: the same sequence, 64x slower
      REQUIRE(fast == (sign(static_cast<std::uint32_t>(k), s % 64) < 0));
      REQUIRE(slow == (sign(static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(s / 64)) < 0));
      fast_autocorr += (1 - 2 * fast) * (1 - 2 * (p.quadrant(s + 64) >> 1));
    }
    CHECK(fast_autocorr == 4096);
    CHECK(p.quadrant(4096 + 17) == p.quadrant(17));
  }
}

TEST_CASE("cross demodulation is exact and agrees with a floating point sum") {
  const auto direct = [](const PhaseSwitchPattern& a, const PhaseSwitchPattern& b) {
    std::complex<double> sum;
    for (std::size_t s = 0; s < kPatternSlots; ++s) {
      sum += std::polar(1.0, (a.quadrant(s) - b.quadrant(s)) * std::numbers::pi / 2);
    }
    return sum;
  };
  std::vector<PhaseSwitchPattern> patterns;
  for (int k = 1; k < 64; ++k) patterns.push_back(build_pattern(k));

  CHECK(cross_demod(patterns[0], patterns[1]) == GaussianInt{0, 0});
  CHECK(cross_demod(patterns[4], patterns[4]) == GaussianInt{4096, 0});
  for (std::size_t a = 0; a < patterns.size(); ++a) {
    for (std::size_t b = 0; b < patterns.size(); ++b) {
      const auto exact = cross_demod(patterns[a], patterns[b]);
      REQUIRE(exact == (a == b ? GaussianInt{4096, 0} : GaussianInt{0, 0}));
    }
  }
  // arbitrary quadrant sequences, not just Walsh patterns
  test::Cases cases(50);
  for (int trial = 0; trial < 200; ++trial) {
    PhaseSwitchPattern x, y;
    for (auto& q : x.quadrants) q = static_cast<std::uint8_t>(cases.integer(0, 3));
    for (auto& q : y.quadrants) q = static_cast<std::uint8_t>(cases.integer(0, 3));
    const auto exact = cross_demod(x, y);
    const auto approx = direct(x, y);
    REQUIRE(std::abs(static_cast<double>(exact.re) - approx.real()) < 1e-6);
    REQUIRE(std::abs(static_cast<double>(exact.im) - approx.imag()) < 1e-6);
  }
  const std::vector<std::uint8_t> three(3), four(4);
  CHECK_THROWS_AS(cross_demod(three, four), DomainError);
}

TEST_CASE("time scales") {
  CHECK(kStepsPerEvent == 192);
  CHECK(fts::timescale::kShortestSwitch == 250us);
  CHECK(fts::timescale::kFastSwitchPeriod == 16ms);
  CHECK(fts::timescale::kChirpUpdate == 48ms);
  CHECK(1.0 / std::chrono::duration<double>(fts::timescale::kChirpUpdate).count() == doctest::Approx(20.0 + 5.0 / 6.0));
  CHECK(fts::timescale::kSlowSwitchPeriod == 1024ms);
  CHECK(kPatternEpochEvents * MasterClock::kPeriod == 3 * kPatternPeriod);
}

TEST_CASE("initial registers") {
  CHECK(initial_registers({0.25, 0, 0, 0}, ChirpMode::enabled).phase_word() == 0x40000000u);
  CHECK(quantize_phase(0.25) == 0x40000000u);
  CHECK(quantize_phase(1.75) == 0xC0000000u);
  CHECK(quantize_phase(-0.25) == 0xC0000000u);
  const auto zero = initial_registers({0, 0, 0, 0}, ChirpMode::enabled);
  CHECK(zero == FtsRegisters{});
  // 2000 turns/s is half a turn per step; the signed 48-bit word stops there
  CHECK_THROWS_AS(initial_registers({0, 2000.0, 0, 0}, ChirpMode::enabled), RangeError);
  CHECK_NOTHROW(initial_registers({0, 1999.0, 0, 0}, ChirpMode::enabled));
  CHECK_THROWS_AS(quantize_phase(std::nan("")), RangeError);
}

TEST_CASE("register stepping matches the step-by-step recurrence") {
  test::Cases cases(51);
  for (int trial = 0; trial < 200; ++trial) {
    FtsRegisters r{cases.bits(48), static_cast<std::int64_t>(cases.bits(40)) - (std::int64_t{1} << 39),
                   static_cast<std::int32_t>(cases.integer(INT32_MIN, INT32_MAX))};
    FtsRegisters s = r;
    const auto n = cases.integer(0, 400);
    for (std::int64_t i = 0; i < n; ++i) {
      s.acc = (s.acc + static_cast<std::uint64_t>(s.freq)) & kAccumulatorMask;
      s.freq = wrap_freq(s.freq + s.chirp);
    }
    REQUIRE(r.advanced(n) == s);
  }
}

TEST_CASE("zero phase function stays at zero") {
  harness::Array a(one_fts());
  a.start();
  a.pulse();
  auto h = a.manager().resolve("ANT1/FTS");
  set_phase_function(a.manager(), h, {0, 0, 0, 4}, a.clock().event_time(1));
  const auto& hw = a.hardware_as<FtsHardware>("ANT1/FTS");
  for (std::uint64_t e = 4; e < 40; ++e) {
    run_to(a, e);
    REQUIRE(hw.registers() == FtsRegisters{});
    REQUIRE(hw.tracking_word(a.clock().event_time(e) + 47ms) == 0);
  }
  CHECK((hw.status_word() & status::kTracking) != 0);
}

TEST_CASE("phi0 = 0.25 latches 0x40000000 at the epoch") {
  harness::Array a(one_fts());
  a.start();
  a.pulse();
  auto h = a.manager().resolve("ANT1/FTS");
  set_phase_function(a.manager(), h, {0.25, 0, 0, 5}, a.clock().event_time(1));
  const auto& hw = a.hardware_as<FtsHardware>("ANT1/FTS");
  run_to(a, 4);
  CHECK(hw.registers().phase_word() == 0);
  run_to(a, 5);
  CHECK(hw.registers().phase_word() == 0x40000000u);
  for (const auto& l : hw.latches()) {
    if (l.reg == reg::kPhase) CHECK(l.event == 5);
  }
}

TEST_CASE("phase function lead, kind and overflow checks") {
  harness::Array a(framework::Registry::load(test::small_array()));
  a.start();
  a.pulse();
  auto fts = a.manager().resolve("ANT1/FTS");
  auto gen = a.manager().resolve("ANT1/GEN");
  const ArrayTime now = a.clock().event_time(1);
  CHECK_THROWS_AS(set_phase_function(a.manager(), fts, {0, 0, 0, 2}, now), framework::CommandRejected);
  CHECK_THROWS_AS(set_phase_function(a.manager(), gen, {0, 0, 0, 5}, now), UsageError);
  CHECK_THROWS_AS(set_phase_function(a.manager(), fts, {0, 1e6, 0, 5}, now), RangeError);
  CHECK_NOTHROW(set_phase_function(a.manager(), fts, {0, 0, 0, 3}, now));
}

TEST_CASE("no chirp is needed without a frequency slope") {
  // 2^-18 * 4000 turns/s is exactly 2^30 accumulator units per step
  const PhaseFunction pf{0.125, 4000.0 / 262144.0, 0, 4};
  harness::Array a(one_fts());
  a.start();
  a.pulse();
  auto h = a.manager().resolve("ANT1/FTS");
  set_phase_function(a.manager(), h, pf, a.clock().event_time(1));
  const auto& hw = a.hardware_as<FtsHardware>("ANT1/FTS");
  for (std::uint64_t e = 4; e < 60; ++e) {
    run_to(a, e);
    REQUIRE(hw.registers().chirp == 0);
    REQUIRE(hw.registers().freq == std::int64_t{1} << 30);
  }
}

TEST_CASE("chirp tracking stays within 2^-20 turns of the exact quadratic") {
  const auto run = test::track({0.1, 3.0, 1.0, 4}, true, 200, 17);
  CHECK(run.max_error <= std::ldexp(1.0, -20));
  test::Cases cases(52);
  for (int trial = 0; trial < 6; ++trial) {
    const PhaseFunction pf{cases.real(0, 1), cases.real(-100, 100), cases.real(-2, 2), 4};
    CAPTURE(pf.f);
    CAPTURE(pf.fdot);
    CHECK(test::track(pf, true, 60).max_error <= std::ldexp(1.0, -20));
  }
}

TEST_CASE("without chirp the quadratic remainder shows") {
  const double expected = 0.5 * 1.0 * 0.048 * 0.048;
  CHECK(expected == doctest::Approx(1.152e-3).epsilon(1e-12));
  const auto off = test::track({0.1, 3.0, 1.0, 4}, false, 100, 17);
  CHECK(off.max_error == doctest::Approx(expected).epsilon(0.01));
  // the remainder is reached at the end of every period
  for (double e : off.per_event) CHECK(e == doctest::Approx(expected).epsilon(0.01));
  const auto on = test::track({0.1, 3.0, 1.0, 4}, true, 100, 17);
  CHECK(off.max_error >= 100 * on.max_error);
}

TEST_CASE("accumulator error grows by at most one phase-word LSB per step") {
  const PhaseFunction pf{0.3, -17.0, 1.0, 4};
  harness::Array a(one_fts());
  a.start();
  a.pulse();
  auto h = a.manager().resolve("ANT1/FTS");
  set_phase_function(a.manager(), h, pf, a.clock().event_time(1));
  const auto& hw = a.hardware_as<FtsHardware>("ANT1/FTS");
  const test::cpp_rational lsb(1, test::cpp_int(1) << 32);
  const test::cpp_rational acc_unit(1, test::cpp_int(1) << kAccumulatorBits);
  std::optional<test::cpp_rational> prev;
  double worst = 0;
  for (std::uint64_t e = 4; e < 30; ++e) {
    run_to(a, e);
    for (std::int64_t n = 0; n < kStepsPerEvent; ++n) {
      const auto regs = hw.registers().advanced(n);
      const Nanos since = (a.clock().event_time(e) - a.clock().event_time(4)) + n * kAccumulatorStep;
      test::cpp_rational err = test::cpp_rational(test::cpp_int(regs.acc)) * acc_unit - test::exact_phase(pf, since);
      // take the error on the circle
      const auto wrapped = test::circular_error(err, 0);
      const test::cpp_rational e_now = err >= 0 ? test::cpp_rational(wrapped) : test::cpp_rational(-wrapped);
      if (prev) {
        const auto growth = std::abs(static_cast<double>(e_now - *prev));
        worst = std::max(worst, growth);
      }
      prev = e_now;
    }
  }
  CHECK(worst <= static_cast<double>(lsb));
}

TEST_CASE("latching keeps the phase continuous") {
  harness::Array a(one_fts());
  a.start();
  a.pulse();
  auto h = a.manager().resolve("ANT1/FTS");
  set_phase_function(a.manager(), h, {0.7, 12.5, -0.8, 4}, a.clock().event_time(1));
  const auto& hw = a.hardware_as<FtsHardware>("ANT1/FTS");
  run_to(a, 4);
  for (std::uint64_t e = 5; e < 80; ++e) {
    const auto before = hw.registers().advanced(kStepsPerEvent).phase_word();
    a.pulse();
    const auto after = hw.registers().phase_word();
    REQUIRE(static_cast<std::int32_t>(after - before) <= 1);
    REQUIRE(static_cast<std::int32_t>(after - before) >= -1);
  }
  // a tagged frequency change: slope jumps, phase does not
  const auto event = a.current_event() + 3;
  a.manager().set_property(h, "FREQUENCY", 123456789.0, a.clock().event_time(a.current_event()), event);
  run_to(a, event - 1);
  const auto before = hw.registers().advanced(kStepsPerEvent);
  a.pulse();
  CHECK(hw.registers().freq == 123456789);
  CHECK(hw.registers().freq != before.freq);
  CHECK(hw.registers().acc == before.acc);
}

TEST_CASE("hardware state changes only on pulse edges") {
  harness::Array a(one_fts());
  a.start();
  run_to(a, 3);
  const auto& hw = a.hardware_as<FtsHardware>("ANT1/FTS");
  const auto before = hw.registers();
  const auto& spec = a.registry().device("ANT1/FTS");
  a.manager().write_register(spec, reg::kFrequency, framework::pack_be(5000, 6), a.clock().event_time(3) + 20ms);
  CHECK(hw.registers() == before);
  CHECK(hw.tracking_word(a.clock().event_time(3) + 40ms) == before.phase_word());
  a.pulse();
  CHECK(hw.registers().freq == 5000);
  CHECK(hw.latches().back().event == 4);
}

TEST_CASE("pattern changes wait for a pattern epoch") {
  harness::Array a(one_fts(9));
  a.start();
  const auto& hw = a.hardware_as<FtsHardware>("ANT1/FTS");
  CHECK(hw.configured_pattern() == 9);
  run_to(a, 63);
  CHECK(hw.active_pattern() == 0);
  CHECK(hw.pending_pattern() == 9);
  CHECK_FALSE(hw.quadrant_at(a.clock().event_time(63)));
  a.pulse();
  CHECK(hw.active_pattern() == 9);
  CHECK(hw.pattern_epoch_event() == 64);
  CHECK_FALSE(hw.pending_pattern());

  auto h = a.manager().resolve("ANT1/FTS");
  run_to(a, 70);
  a.manager().set_property(h, "PHASE_SWITCH_INDEX", 12, a.clock().event_time(70) + 1ms);
  run_to(a, 127);
  CHECK(hw.active_pattern() == 9);
  CHECK(hw.pending_pattern() == 12);
  a.pulse();
  CHECK(hw.active_pattern() == 12);
  CHECK(hw.pattern_epoch_event() == 128);

  a.manager().set_property(h, "PHASE_SWITCH_INDEX", 0, a.clock().event_time(128) + 1ms);
  run_to(a, 192);
  CHECK(hw.active_pattern() == 0);
  CHECK_FALSE(hw.quadrant_at(a.clock().event_time(192) + 3ms));
}

TEST_CASE("sample phase adds the switching quadrant") {
  harness::Array a(one_fts(1));
  a.start();
  run_to(a, 64);
  const auto& hw = a.hardware_as<FtsHardware>("ANT1/FTS");
  const ArrayTime epoch = a.clock().event_time(64);
  CHECK(hw.sample_phase(epoch) == 0.0);
  // walsh 1: the fast bit flips every slot, the slow bit every 64 slots
  CHECK(hw.sample_phase(epoch + 250us) == 0.5);
  CHECK(hw.sample_phase(epoch + 16ms) == 0.25);
  CHECK(hw.sample_phase(epoch + 16ms + 250us) == 0.75);
  const auto pattern = build_pattern(1);
  for (int s = 0; s < 192; ++s) {
    const auto t = epoch + s * kSwitchSlot + 100us;
    REQUIRE(hw.sample_phase(t) == 0.25 * pattern.quadrant(static_cast<std::size_t>(s)));
  }
  // slots keep counting from the pattern epoch across later events
  run_to(a, 70);
  const auto t = a.clock().event_time(70) + 5ms;
  const auto slot = static_cast<std::size_t>((t - epoch) / kSwitchSlot);
  CHECK(hw.sample_phase(t) == 0.25 * pattern.quadrant(slot));
  CHECK_THROWS_AS(hw.sample_phase(a.clock().event_time(69)), DomainError);
}

TEST_CASE("f = 1 turn/s reads half a turn 0.5 s after the epoch") {
  harness::Array a(one_fts(1));
  a.start();
  a.pulse();
  auto h = a.manager().resolve("ANT1/FTS");
  set_phase_function(a.manager(), h, {0, 1.0, 0, 4}, a.clock().event_time(1));
  const ArrayTime t = a.clock().event_time(4) + 500ms;
  run_to(a, a.clock().event_at_or_before(t));
  const auto& hw = a.hardware_as<FtsHardware>("ANT1/FTS");
  CHECK_FALSE(hw.quadrant_at(t));
  CHECK(std::abs(hw.sample_phase(t) - 0.5) <= std::ldexp(1.0, -31));
}

TEST_CASE("status word") {
  harness::Array a(one_fts(9));
  a.start();
  run_to(a, 5);
  const auto& hw = a.hardware_as<FtsHardware>("ANT1/FTS");
  auto s = hw.status_word();
  CHECK((s & status::kTracking) == 0);
  CHECK((s & status::kSwitching) == 0);
  CHECK(((s >> status::kPendingIndexShift) & 0xFF) == 9);
  CHECK(((s >> status::kEventShift) & 0xFFFFFF) == 5);
  run_to(a, 64);
  s = hw.status_word();
  CHECK((s & status::kSwitching) != 0);
  CHECK(((s >> status::kActiveIndexShift) & 0xFF) == 9);

  auto h = a.manager().resolve("ANT1/FTS");
  const auto r = a.manager().get_property(h, "STATUS", a.clock().event_time(64) + 1ms);
  CHECK(static_cast<std::uint64_t>(r.value) == s);
}
