#include "tics/timebase.hpp"

#include "tics/error.hpp"

namespace tics {

ArrayTime MasterClock::event_time(std::uint64_t seq) const {
  return epoch_ + Nanos(static_cast<std::int64_t>(seq) * kPeriod.count());
}

std::uint64_t MasterClock::event_at_or_after(ArrayTime t) const {
  if (t < epoch_) throw DomainError("time precedes the clock epoch");
  const std::int64_t since = (t - epoch_).count();
  const std::int64_t p = kPeriod.count();
  return static_cast<std::uint64_t>((since + p - 1) / p);
}

std::uint64_t MasterClock::event_at_or_before(ArrayTime t) const {
  if (t < epoch_) throw DomainError("time precedes the clock epoch");
  return static_cast<std::uint64_t>((t - epoch_).count() / kPeriod.count());
}

void SlaveClock::sync(std::uint64_t seq, ArrayTime tai) {
  synced_ = true;
  synced_seq_ = seq;
  synced_tai_ = tai;
  pulses_since_sync_ = 0;
}

void SlaveClock::pulse(std::optional<ArrayTime> delivered_at) {
  ++pulses_since_sync_;
  last_delivery_ = delivered_at;
}

ArrayTime SlaveClock::now() const {
  if (!synced_) throw NotSynchronized("slave clock has never been synchronized");
  return synced_tai_ + Nanos(static_cast<std::int64_t>(pulses_since_sync_) * MasterClock::kPeriod.count());
}

std::uint64_t SlaveClock::current_seq() const {
  if (!synced_) throw NotSynchronized("slave clock has never been synchronized");
  return synced_seq_ + pulses_since_sync_;
}

ArrayTime SlaveClock::time_of(std::uint64_t seq) const {
  if (!synced_) throw NotSynchronized("slave clock has never been synchronized");
  const auto delta = static_cast<std::int64_t>(seq) - static_cast<std::int64_t>(synced_seq_);
  return synced_tai_ + Nanos(delta * MasterClock::kPeriod.count());
}

}  // namespace tics
