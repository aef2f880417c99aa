#include <doctest.h>

#include "support.hpp"
#include "tics/error.hpp"
#include "tics/timebase.hpp"

using namespace tics;
using namespace std::chrono_literals;

TEST_CASE("event_time is epoch plus seq periods") {
  const MasterClock clock;
  CHECK(clock.event_time(0).ns() == 0);
  CHECK(clock.event_time(1).ns() == 48'000'000);
  CHECK(clock.event_time(1000).ns() == 48'000'000'000);

  const MasterClock shifted(ArrayTime(123));
  CHECK(shifted.event_time(2).ns() == 123 + 96'000'000);
}

TEST_CASE("event_at_or_after rounds up to the next pulse") {
  const MasterClock clock;
  CHECK(clock.event_at_or_after(ArrayTime(0)) == 0);
  CHECK(clock.event_at_or_after(ArrayTime(48'000'000)) == 1);
  CHECK(clock.event_at_or_after(ArrayTime(100'000'000)) == 3);
  CHECK(clock.event_at_or_after(ArrayTime(1)) == 1);
  CHECK(clock.event_at_or_before(ArrayTime(100'000'000)) == 2);

  const MasterClock late(ArrayTime(1'000));
  CHECK_THROWS_AS(late.event_at_or_after(ArrayTime(999)), DomainError);
}

TEST_CASE("event_at_or_after inverts event_time") {
  test::Cases cases(1);
  for (int i = 0; i < 2000; ++i) {
    const MasterClock clock(ArrayTime(cases.integer(0, 1'000'000'000)));
    const auto seq = static_cast<std::uint64_t>(cases.integer(0, 1'000'000'000));
    const ArrayTime t = clock.event_time(seq);
    REQUIRE(clock.event_at_or_after(t) == seq);
    REQUIRE(clock.event_at_or_before(t) == seq);
    // one nanosecond either side lands on the neighbours
    REQUIRE(clock.event_at_or_after(t + 1ns) == seq + 1);
    if (seq > 0) REQUIRE(clock.event_at_or_before(t - 1ns) == seq - 1);
  }
}

TEST_CASE("timing event stream is gapless") {
  TimingEventSource source{MasterClock{}};
  TimingEvent prev = source.next();
  CHECK(prev.seq == 0);
  for (int i = 0; i < 10'000; ++i) {
    const TimingEvent ev = source.next();
    REQUIRE(ev.seq == prev.seq + 1);
    REQUIRE(ev.tai - prev.tai == MasterClock::kPeriod);
    prev = ev;
  }
  CHECK(source.peek_seq() == 10'001);
}

TEST_CASE("slave clock keeps time by counting") {
  SlaveClock slave;
  CHECK_THROWS_AS(slave.now(), NotSynchronized);
  CHECK_THROWS_AS(slave.current_seq(), NotSynchronized);

  slave.sync(0, ArrayTime(0));
  CHECK(slave.now().ns() == 0);

  slave.sync(5, ArrayTime(240'000'000));
  CHECK(slave.pulses_since_sync() == 0);
  for (int i = 0; i < 10; ++i) slave.pulse();
  CHECK(slave.now().ns() == 720'000'000);
  CHECK(slave.current_seq() == 15);
}

TEST_CASE("slave clock ignores pulse delivery jitter") {
  const MasterClock master;
  SlaveClock slave;
  slave.sync(5, master.event_time(5));
  test::Cases cases(2);
  for (std::uint64_t n = 6; n <= 15; ++n) {
    slave.pulse(master.event_time(n) + Nanos(cases.integer(0, 10'000'000)));
  }
  CHECK(slave.now().ns() == 720'000'000);
}

TEST_CASE("slave clock reaches 4800 s after 100000 pulses") {
  SlaveClock slave;
  slave.sync(0, ArrayTime(0));
  for (int i = 0; i < 100'000; ++i) slave.pulse();
  CHECK(slave.now().ns() == 4'800'000'000'000);
}

TEST_CASE("slave now equals master event time for any jitter below half a period") {
  test::Cases cases(3);
  for (int trial = 0; trial < 20; ++trial) {
    const MasterClock master(ArrayTime(cases.integer(0, 1'000'000)));
    const auto start = static_cast<std::uint64_t>(cases.integer(0, 100'000));
    SlaveClock slave;
    slave.sync(start, master.event_time(start));
    for (std::uint64_t n = start + 1; n < start + 2000; ++n) {
      slave.pulse(master.event_time(n) + Nanos(cases.integer(0, 24'000'000 - 1)));
      REQUIRE(slave.now() == master.event_time(n));
      REQUIRE(slave.current_seq() == n);
    }
  }
}

TEST_CASE("time scale ladder") {
  CHECK(timescale::kTimingPeriod == 48ms);
  CHECK(timescale::kShortestInteraction == 2ms);
  CHECK(timescale::kFastestCorrelatorDump == 16ms);
  CHECK(timescale::kSlowMonitoring == 300s);
  // 300 s of monitoring is 6250 timing events
  CHECK(timescale::kSlowMonitoring / timescale::kTimingPeriod == 6250);
}
