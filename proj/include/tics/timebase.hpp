#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>

namespace tics {

using Nanos = std::chrono::nanoseconds;

/// An instant on the array's TAI time scale, in integer nanoseconds since the
/// simulation epoch. Arithmetic with durations is exact.
class ArrayTime {
 public:
  constexpr ArrayTime() = default;
  constexpr explicit ArrayTime(std::int64_t tai_ns) : tai_ns_(tai_ns) {}
  constexpr explicit ArrayTime(Nanos since_epoch) : tai_ns_(since_epoch.count()) {}

  constexpr std::int64_t ns() const { return tai_ns_; }

  constexpr auto operator<=>(const ArrayTime&) const = default;

  constexpr ArrayTime& operator+=(Nanos d) {
    tai_ns_ += d.count();
    return *this;
  }
  friend constexpr ArrayTime operator+(ArrayTime t, Nanos d) { return t += d; }
  friend constexpr ArrayTime operator+(Nanos d, ArrayTime t) { return t += d; }
  friend constexpr ArrayTime operator-(ArrayTime t, Nanos d) { return ArrayTime(t.tai_ns_ - d.count()); }
  friend constexpr Nanos operator-(ArrayTime a, ArrayTime b) { return Nanos(a.tai_ns_ - b.tai_ns_); }

 private:
  std::int64_t tai_ns_ = 0;
};

/// Time scales of the control system.
namespace timescale {
using namespace std::chrono_literals;
inline constexpr Nanos kShortestInteraction = 2ms;    // below this, hardware only
inline constexpr Nanos kFastestCorrelatorDump = 16ms;
inline constexpr Nanos kTimingPeriod = 48ms;          // the pervasive timing event
inline constexpr Nanos kObservationalChange = 1s;
inline constexpr Nanos kSlowMonitoring = 300s;
}  // namespace timescale

/// One edge of the array-wide timing pulse.
struct TimingEvent {
  std::uint64_t seq = 0;
  ArrayTime tai;

  constexpr bool operator==(const TimingEvent&) const = default;
};

/// The central master clock. Event `seq` occurs at `epoch + seq * period`.
class MasterClock {
 public:
  static constexpr Nanos kPeriod = timescale::kTimingPeriod;

  constexpr MasterClock() = default;
  constexpr explicit MasterClock(ArrayTime epoch) : epoch_(epoch) {}

  constexpr ArrayTime epoch() const { return epoch_; }
  constexpr Nanos period() const { return kPeriod; }

  ArrayTime event_time(std::uint64_t seq) const;
  TimingEvent event(std::uint64_t seq) const { return {seq, event_time(seq)}; }

  /// Smallest seq whose event time is at or after `t`. Throws DomainError if
  /// `t` precedes the epoch.
  std::uint64_t event_at_or_after(ArrayTime t) const;

  /// Largest seq whose event time is at or before `t`.
  std::uint64_t event_at_or_before(ArrayTime t) const;

 private:
  ArrayTime epoch_;
};

/// Emits the gapless stream of timing events, starting at seq 0.
class TimingEventSource {
 public:
  explicit TimingEventSource(MasterClock clock, std::uint64_t first_seq = 0)
      : clock_(clock), next_seq_(first_seq) {}

  TimingEvent next() { return clock_.event(next_seq_++); }
  std::uint64_t peek_seq() const { return next_seq_; }
  const MasterClock& clock() const { return clock_; }

 private:
  MasterClock clock_;
  std::uint64_t next_seq_;
};

/// A clock that is given the array time of one timing event and thereafter
/// keeps time purely by counting pulses. Delivery latency of a pulse never
/// enters the computation.
class SlaveClock {
 public:
  SlaveClock() = default;

  void sync(std::uint64_t seq, ArrayTime tai);

  /// Count one pulse. `delivered_at` is when the edge physically arrived; it
  /// is recorded for diagnostics only.
  void pulse(std::optional<ArrayTime> delivered_at = std::nullopt);

  bool synchronized() const { return synced_; }

  /// Array time of the most recently counted pulse. Throws NotSynchronized.
  ArrayTime now() const;

  /// Sequence number of the most recently counted pulse. Throws NotSynchronized.
  std::uint64_t current_seq() const;

  std::uint64_t pulses_since_sync() const { return pulses_since_sync_; }
  std::optional<ArrayTime> last_delivery() const { return last_delivery_; }

  /// Array time of a pulse relative to the synchronization point.
  ArrayTime time_of(std::uint64_t seq) const;

 private:
  bool synced_ = false;
  std::uint64_t synced_seq_ = 0;
  ArrayTime synced_tai_;
  std::uint64_t pulses_since_sync_ = 0;
  std::optional<ArrayTime> last_delivery_;
};

}  // namespace tics
