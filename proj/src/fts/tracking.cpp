#include "tics/fts/tracking.hpp"

#include <cmath>
#include <limits>

#include "tics/error.hpp"

namespace tics::fts {

namespace {

using u128 = IdealTrajectory::u128;
using i128 = IdealTrajectory::i128;

constexpr i128 kStepsPerSecond = 1'000'000'000 / kAccumulatorStep.count();  // 4000
constexpr u128 kMask80 = (u128{1} << 80) - 1;
constexpr int kShift80to48 = IdealTrajectory::kFracBits - kAccumulatorBits;  // 32
constexpr std::int64_t kFreqLimit = std::int64_t{1} << (kAccumulatorBits - 1);

// Closed-loop gains placing both eigenvalues of the per-period error
// dynamics at zero. Per period, with N steps and S = N(N-1)/2:
//   phase_err' = phase_err + N*freq_err + S*d,  freq_err' = freq_err + N*d.
constexpr long double kN = kStepsPerEvent;
constexpr long double kS = kN * (kN - 1) / 2;
constexpr long double kPhaseGain = 1.0L / (kN * kN);
constexpr long double kFreqGain = (2.0L - kS / (kN * kN)) / kN;

i128 round_div(i128 a, i128 d) { return a >= 0 ? (a + d / 2) / d : -((-a + d / 2) / d); }

i128 floor_div(i128 a, i128 d) {
  i128 q = a / d;
  if ((a % d != 0) && ((a < 0) != (d < 0))) --q;
  return q;
}

// Rounds a value in 2^-80 units to 2^-48 units.
i128 to48(i128 v) { return (v + (i128{1} << (kShift80to48 - 1))) >> kShift80to48; }

i128 to_fixed80(double x) {
  if (!std::isfinite(x) || std::fabs(x) >= std::ldexp(1.0, 40)) throw RangeError("phase function term too large");
  return static_cast<i128>(std::ldexp(x, IdealTrajectory::kFracBits));
}

std::int64_t checked_freq(i128 v) {
  if (v >= kFreqLimit || v < -kFreqLimit) throw RangeError("frequency word overflows 48 bits");
  return static_cast<std::int64_t>(v);
}

std::int32_t checked_chirp(long double v) {
  const long double r = std::nearbyint(v);
  if (r > std::numeric_limits<std::int32_t>::max() || r < std::numeric_limits<std::int32_t>::min()) {
    throw RangeError("chirp word overflows 32 bits");
  }
  return static_cast<std::int32_t>(r);
}

long double to_long_double(i128 v) { return static_cast<long double>(v); }

}  // namespace

std::int64_t wrap_freq(std::int64_t raw) {
  const auto u = static_cast<std::uint64_t>(raw) & kAccumulatorMask;
  return static_cast<std::int64_t>(u << (64 - kAccumulatorBits)) >> (64 - kAccumulatorBits);
}

FtsRegisters FtsRegisters::advanced(std::int64_t steps) const {
  const i128 n = steps;
  const i128 delta = n * freq + static_cast<i128>(chirp) * (n * (n - 1) / 2);
  FtsRegisters r = *this;
  r.acc = static_cast<std::uint64_t>(static_cast<u128>(static_cast<i128>(acc) + delta)) & kAccumulatorMask;
  r.freq = wrap_freq(static_cast<std::int64_t>(freq + n * chirp));
  return r;
}

std::uint64_t FtsRegisters::acc_at(Nanos into) const {
  const std::int64_t step_ns = kAccumulatorStep.count();
  const std::int64_t whole = into.count() / step_ns;
  const std::int64_t rest = into.count() % step_ns;
  const FtsRegisters s = advanced(whole);
  const i128 partial = floor_div(static_cast<i128>(s.freq) * rest, step_ns);
  return static_cast<std::uint64_t>(static_cast<u128>(static_cast<i128>(s.acc) + partial)) & kAccumulatorMask;
}

std::uint32_t quantize_phase(double turns) {
  if (!std::isfinite(turns)) throw RangeError("phase is not finite");
  const double frac = turns - std::floor(turns);
  const double scaled = std::nearbyint(std::ldexp(frac, kPhaseWordBits));
  return static_cast<std::uint32_t>(static_cast<std::uint64_t>(scaled) & 0xFFFFFFFFu);
}

IdealTrajectory::IdealTrajectory(const PhaseFunction& pf) {
  const double frac = pf.phi0 - std::floor(pf.phi0);
  phase0_ = static_cast<u128>(to_fixed80(frac)) & kMask80;
  const i128 f = to_fixed80(pf.f);
  const i128 fdot = to_fixed80(pf.fdot);
  // increment over step 0: f*h + fdot*h^2/2, chirp: fdot*h^2, with h = 1/4000 s
  increment0_ = round_div(f, kStepsPerSecond) + round_div(fdot, 2 * kStepsPerSecond * kStepsPerSecond);
  chirp_ = round_div(fdot, kStepsPerSecond * kStepsPerSecond);
}

IdealTrajectory::u128 IdealTrajectory::phase(std::uint64_t step) const {
  const u128 n = step;
  const u128 tri = n == 0 ? 0 : n * (n - 1) / 2;
  return (phase0_ + n * static_cast<u128>(increment0_) + tri * static_cast<u128>(chirp_)) & kMask80;
}

FtsRegisters initial_registers(const PhaseFunction& pf, ChirpMode mode) {
  const IdealTrajectory ideal(pf);
  FtsRegisters r;
  r.acc = acc_of_phase_word(quantize_phase(pf.phi0));
  if (mode == ChirpMode::enabled) {
    r.freq = checked_freq(to48(ideal.increment(0)));
    r.chirp = checked_chirp(std::ldexp(to_long_double(ideal.chirp()), -kShift80to48));
  } else {
    r.freq = checked_freq(to48(ideal.increment(0) - ideal.chirp() / 2));
  }
  return r;
}

std::int32_t next_chirp(const IdealTrajectory& ideal, std::uint64_t step, const FtsRegisters& predicted) {
  const u128 hw = static_cast<u128>(predicted.acc) << kShift80to48;
  u128 diff = (hw - ideal.phase(step)) & kMask80;
  i128 phase_err = static_cast<i128>(diff);
  if (diff >= (u128{1} << 79)) phase_err -= static_cast<i128>(u128{1} << 80);
  const i128 freq_err = (static_cast<i128>(predicted.freq) << kShift80to48) - ideal.increment(step);

  const long double ep = std::ldexp(to_long_double(phase_err), -kShift80to48);
  const long double ef = std::ldexp(to_long_double(freq_err), -kShift80to48);
  const long double ideal_chirp = std::ldexp(to_long_double(ideal.chirp()), -kShift80to48);
  return checked_chirp(ideal_chirp - (kPhaseGain * ep + kFreqGain * ef));
}

FtsRegisters linear_anchor(const IdealTrajectory& ideal, std::uint64_t step) {
  const u128 phase = ideal.phase(step);
  const auto word = static_cast<std::uint32_t>(
      ((phase + (u128{1} << (IdealTrajectory::kFracBits - kPhaseWordBits - 1))) >>
       (IdealTrajectory::kFracBits - kPhaseWordBits)) &
      0xFFFFFFFFu);
  FtsRegisters r;
  r.acc = acc_of_phase_word(word);
  r.freq = checked_freq(to48(ideal.increment(step) - ideal.chirp() / 2));
  return r;
}

}  // namespace tics::fts
