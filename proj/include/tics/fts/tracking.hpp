#pragma once

// Fringe-tracking numerics of the synthesizer.
//
// The hardware is a phase accumulator clocked every 250 us (192 steps per
// timing period). Registers, all two's complement:
//
//   accumulator  48 bits, turns * 2^48; its top 32 bits are the phase word
//   freq word    48 bits, accumulator increment per step (turns * 2^48)
//   chirp word   32 bits, added to the freq word after every step
//
// Within one period the accumulator therefore follows an exact discrete
// quadratic, and the controller only has to rewrite the chirp word once per
// timing event to keep it on the requested phase function.

#include <cstdint>

#include "tics/fts/walsh.hpp"
#include "tics/timebase.hpp"

namespace tics::fts {

inline constexpr Nanos kAccumulatorStep = kSwitchSlot;
inline constexpr std::int64_t kStepsPerEvent = MasterClock::kPeriod / kAccumulatorStep;  // 192
static_assert(kStepsPerEvent == 192);

inline constexpr int kAccumulatorBits = 48;
inline constexpr int kPhaseWordBits = 32;
inline constexpr std::uint64_t kAccumulatorMask = (std::uint64_t{1} << kAccumulatorBits) - 1;

/// Time scales the synthesizer works on.
namespace timescale {
inline constexpr Nanos kShortestSwitch = kSwitchSlot;
inline constexpr Nanos kFastSwitchPeriod = kFastPeriod;
inline constexpr Nanos kChirpUpdate = MasterClock::kPeriod;  // 20 5/6 Hz
inline constexpr Nanos kSlowSwitchPeriod = kPatternPeriod;
inline constexpr Nanos kFastSwitchCalibration = std::chrono::seconds(10);
inline constexpr Nanos kFringeFrequencyUpdate = std::chrono::seconds(100);
}  // namespace timescale

/// phase(t) = phi0 + f*d + fdot*d^2/2 turns, d = t - event_time(epoch_event).
struct PhaseFunction {
  double phi0 = 0.0;  // turns
  double f = 0.0;     // turns/s
  double fdot = 0.0;  // turns/s^2
  std::uint64_t epoch_event = 0;

  bool operator==(const PhaseFunction&) const = default;
};

enum class ChirpMode {
  enabled,   // chirp word rewritten every event
  disabled,  // phase and freq words re-anchored every event, no chirp
};

/// Register image of the accumulator.
struct FtsRegisters {
  std::uint64_t acc = 0;     // 48 bits
  std::int64_t freq = 0;     // 48-bit signed
  std::int32_t chirp = 0;

  std::uint32_t phase_word() const { return static_cast<std::uint32_t>(acc >> (kAccumulatorBits - kPhaseWordBits)); }

  /// State after `steps` accumulator clocks.
  FtsRegisters advanced(std::int64_t steps) const;

  /// Accumulator value `into` nanoseconds after this state, interpolating
  /// linearly inside the current step.
  std::uint64_t acc_at(Nanos into) const;

  bool operator==(const FtsRegisters&) const = default;
};

std::int64_t wrap_freq(std::int64_t raw);

/// Nearest phase word to a phase in turns.
std::uint32_t quantize_phase(double turns);

/// Accumulator value of a phase word.
inline std::uint64_t acc_of_phase_word(std::uint32_t word) {
  return static_cast<std::uint64_t>(word) << (kAccumulatorBits - kPhaseWordBits);
}

/// The requested phase function sampled on the accumulator step grid, held
/// in 80-bit fixed point (turns * 2^80) so that tracking errors can be
/// measured far below one accumulator LSB.
class IdealTrajectory {
 public:
  using u128 = unsigned __int128;
  using i128 = __int128;
  static constexpr int kFracBits = 80;

  explicit IdealTrajectory(const PhaseFunction& pf);

  /// Phase at step n from the epoch, turns * 2^80 modulo 2^80.
  u128 phase(std::uint64_t step) const;
  /// Increment applied over step n (mid-step frequency times step length).
  i128 increment(std::uint64_t step) const { return increment0_ + static_cast<i128>(step) * chirp_; }
  /// Change of the increment from one step to the next.
  i128 chirp() const { return chirp_; }

 private:
  u128 phase0_;
  i128 increment0_;
  i128 chirp_;
};

/// Register writes that start tracking at the phase function's epoch.
/// Throws RangeError if the frequency or chirp word would overflow.
FtsRegisters initial_registers(const PhaseFunction& pf, ChirpMode mode);

/// Chirp word for the period starting at `step` steps from the epoch, given
/// the accumulator state predicted for that instant. Drives phase and
/// frequency error to zero within two periods (deadbeat), absorbing the
/// quantization of every word. Throws RangeError if the word overflows.
std::int32_t next_chirp(const IdealTrajectory& ideal, std::uint64_t step, const FtsRegisters& predicted);

/// Phase and freq words re-anchoring the accumulator to the first-order
/// expansion of the phase function at `step`.
FtsRegisters linear_anchor(const IdealTrajectory& ideal, std::uint64_t step);

}  // namespace tics::fts
