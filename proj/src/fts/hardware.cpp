#include "tics/fts/hardware.hpp"

#include <cmath>

#include "tics/error.hpp"
#include "tics/framework/codec.hpp"

namespace tics::fts {

using framework::pack_be;
using framework::sign_extend;
using framework::unpack_be;

namespace {

std::optional<std::size_t> width_of(std::uint32_t r) {
  switch (r) {
    case reg::kPhase:
      return 4;
    case reg::kFrequency:
      return 6;
    case reg::kChirp:
      return 4;
    case reg::kPatternIndex:
      return 1;
    case reg::kStatus:
      return 8;
    default:
      return std::nullopt;
  }
}

}  // namespace

std::optional<simbus::Payload> FtsHardware::transact(std::uint32_t rca, std::span<const std::uint8_t> request,
                                                     ArrayTime at) {
  namespace proto = simbus::protocol;
  const std::uint32_t r = proto::register_of(rca);
  const auto width = width_of(r);
  if (!width || request.size() != *width) return std::nullopt;

  if (!proto::is_write(rca)) {
    switch (r) {
      case reg::kPhase:
        return pack_be(tracking_word(at), 4);
      case reg::kFrequency:
        return pack_be(static_cast<std::uint64_t>(regs_.freq), 6);
      case reg::kChirp:
        return pack_be(static_cast<std::uint32_t>(regs_.chirp), 4);
      case reg::kPatternIndex:
        return pack_be(static_cast<std::uint64_t>(configured_pattern_), 1);
      default:
        return pack_be(status_word(), 8);
    }
  }

  const std::uint64_t raw = unpack_be(request);
  std::int64_t value = 0;
  switch (r) {
    case reg::kPhase:
      value = static_cast<std::int64_t>(raw);
      break;
    case reg::kFrequency:
      value = sign_extend(raw, 6);
      break;
    case reg::kChirp:
      value = sign_extend(raw, 4);
      break;
    case reg::kPatternIndex:
      if (raw >= kFastSlots) return std::nullopt;
      value = static_cast<std::int64_t>(raw);
      configured_pattern_ = static_cast<int>(raw);
      break;
    default:
      return std::nullopt;  // status is read only
  }
  staged_.push_back({r, value});
  return simbus::Payload(request);
}

Nanos FtsHardware::into_period(ArrayTime t) const {
  const ArrayTime start = clock().now();
  if (t < start) throw DomainError("synthesizer state before the current timing period is gone");
  return t - start;
}

std::uint32_t FtsHardware::tracking_word(ArrayTime t) const {
  const std::uint64_t acc = regs_.acc_at(into_period(t));
  return static_cast<std::uint32_t>(acc >> (kAccumulatorBits - kPhaseWordBits));
}

std::optional<std::uint8_t> FtsHardware::quadrant_at(ArrayTime t) const {
  if (!pattern_) return std::nullopt;
  (void)into_period(t);
  const Nanos since = t - clock().time_of(pattern_epoch_);
  const auto slot = static_cast<std::size_t>(since / kSwitchSlot);
  return pattern_->quadrant(slot);
}

std::uint32_t FtsHardware::output_word(ArrayTime t) const {
  std::uint32_t word = tracking_word(t);
  if (auto q = quadrant_at(t)) word += static_cast<std::uint32_t>(*q) << 30;
  return word;
}

double FtsHardware::sample_phase(ArrayTime t) const { return std::ldexp(static_cast<double>(output_word(t)), -32); }

std::uint64_t FtsHardware::status_word() const {
  std::uint64_t s = 0;
  if (tracking_) s |= status::kTracking;
  if (pattern_) s |= status::kSwitching;
  s |= static_cast<std::uint64_t>(active_pattern()) << status::kActiveIndexShift;
  s |= static_cast<std::uint64_t>(pending_pattern_.value_or(0)) << status::kPendingIndexShift;
  if (clock().synchronized()) s |= (clock().current_seq() & 0xFFFFFF) << status::kEventShift;
  return s;
}

void FtsHardware::finish_period() {
  if (clock().synchronized()) regs_ = regs_.advanced(kStepsPerEvent);
}

void FtsHardware::latch(const TimingEvent& event) {
  for (const auto& w : staged_) {
    switch (w.reg) {
      case reg::kPhase:
        regs_.acc = acc_of_phase_word(static_cast<std::uint32_t>(w.value));
        tracking_ = true;
        break;
      case reg::kFrequency:
        regs_.freq = w.value;
        tracking_ = true;
        break;
      case reg::kChirp:
        regs_.chirp = static_cast<std::int32_t>(w.value);
        break;
      case reg::kPatternIndex:
        pending_pattern_ = static_cast<int>(w.value);
        break;
    }
    latches_.push_back({event.seq, w.reg, w.value});
  }
  staged_.clear();

  if (pending_pattern_ && event.seq % kPatternEpochEvents == 0) {
    if (*pending_pattern_ == 0) {
      pattern_.reset();
    } else {
      pattern_ = build_pattern(*pending_pattern_);
    }
    pattern_epoch_ = event.seq;
    pending_pattern_.reset();
  }
}

}  // namespace tics::fts
