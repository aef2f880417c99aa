#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tics/framework/hardware.hpp"
#include "tics/fts/tracking.hpp"
#include "tics/fts/walsh.hpp"

namespace tics::fts {

/// CAN register map of the synthesizer.
namespace reg {
inline constexpr std::uint32_t kPhase = 0x01;         // 4 bytes, phase word
inline constexpr std::uint32_t kFrequency = 0x02;     // 6 bytes, signed freq word
inline constexpr std::uint32_t kChirp = 0x03;         // 4 bytes, signed chirp word
inline constexpr std::uint32_t kPatternIndex = 0x04;  // 1 byte, walsh index (0 = off)
inline constexpr std::uint32_t kStatus = 0x10;        // 8 bytes, read only
}  // namespace reg

/// Status word layout.
namespace status {
inline constexpr std::uint64_t kTracking = 1u << 0;
inline constexpr std::uint64_t kSwitching = 1u << 1;
inline constexpr int kActiveIndexShift = 8;
inline constexpr int kPendingIndexShift = 16;
inline constexpr int kEventShift = 24;  // low 24 bits of the current timing event
}  // namespace status

/// Pattern changes only take effect on events that are multiples of this.
/// 64 events = 3.072 s = exactly three 1.024 s switching cycles.
inline constexpr std::uint64_t kPatternEpochEvents = 64;

struct LatchRecord {
  std::uint64_t event = 0;
  std::uint32_t reg = 0;
  std::int64_t value = 0;
};

/// The synthesizer hardware. Every register write is held until the next
/// timing pulse, so its state only ever changes on a pulse edge.
class FtsHardware : public framework::Hardware {
 public:
  explicit FtsHardware(std::string name) : Hardware(std::move(name)) {}

  std::optional<simbus::Payload> transact(std::uint32_t rca, std::span<const std::uint8_t> request,
                                          ArrayTime at) override;

  /// Registers as latched at the start of the current timing period.
  const FtsRegisters& registers() const { return regs_; }

  /// Tracking phase word at `t`, without phase switching.
  std::uint32_t tracking_word(ArrayTime t) const;

  /// Active switching quadrant at `t`, if a pattern is running.
  std::optional<std::uint8_t> quadrant_at(ArrayTime t) const;

  /// Output phase word: tracking phase plus the switching quadrant.
  std::uint32_t output_word(ArrayTime t) const;

  /// Output phase in turns, in [0, 1).
  double sample_phase(ArrayTime t) const;

  int active_pattern() const { return pattern_ ? pattern_->walsh_index : 0; }
  std::optional<int> pending_pattern() const { return pending_pattern_; }
  std::uint64_t pattern_epoch_event() const { return pattern_epoch_; }
  int configured_pattern() const { return configured_pattern_; }

  std::uint64_t status_word() const;

  const std::vector<LatchRecord>& latches() const { return latches_; }

 protected:
  void finish_period() override;
  void latch(const TimingEvent& event) override;

 private:
  struct Staged {
    std::uint32_t reg;
    std::int64_t value;
  };

  Nanos into_period(ArrayTime t) const;

  FtsRegisters regs_;
  bool tracking_ = false;
  std::optional<PhaseSwitchPattern> pattern_;
  std::optional<int> pending_pattern_;
  int configured_pattern_ = 0;
  std::uint64_t pattern_epoch_ = 0;
  std::vector<Staged> staged_;
  std::vector<LatchRecord> latches_;
};

}  // namespace tics::fts
