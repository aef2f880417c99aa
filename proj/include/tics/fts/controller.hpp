#pragma once

#include <cstdint>
#include <optional>

#include "tics/framework/manager.hpp"
#include "tics/fts/hardware.hpp"
#include "tics/fts/tracking.hpp"

namespace tics::fts {

inline constexpr const char* kKind = "FTS";
inline constexpr const char* kPhaseFunctionMethod = "PHASE_FUNCTION";

/// Device controller of one synthesizer. On instantiation it programs the
/// walsh index from its configuration; once a phase function is active it
/// sends one tracking update per timing event.
class FtsController : public framework::DeviceController {
 public:
  FtsController(const framework::DeviceSpec& spec, std::uint64_t generation);

  int walsh_index() const { return walsh_index_; }
  ChirpMode mode() const { return mode_; }
  const std::optional<PhaseFunction>& phase_function() const { return pf_; }

  void on_instantiate(framework::Manager& manager, ArrayTime at) override;
  std::vector<executive::RegisterWrite> prepare(const executive::TimedCommand& cmd) override;
  std::vector<executive::RegisterWrite> periodic(std::uint64_t next_event) override;

  /// Chirp word for the period starting at `event`. Advances the controller's
  /// model of the hardware to that event.
  std::int32_t chirp_update(std::uint64_t event);

 private:
  void advance_model(std::uint64_t event);

  int walsh_index_;
  ChirpMode mode_;
  std::optional<PhaseFunction> pf_;
  std::optional<IdealTrajectory> ideal_;
  FtsRegisters model_;  // predicted hardware registers at the start of model_event_
  std::uint64_t model_event_ = 0;
};

/// Registers the synthesizer controller with a manager.
void register_controller(framework::Manager& manager);

/// Submits a phase function from the array control computer. Tracking starts
/// at pf.epoch_event. Throws RangeError if the function overflows the
/// synthesizer words and CommandRejected if the lead is insufficient.
std::uint64_t set_phase_function(framework::Manager& manager, const framework::DeviceHandle& fts,
                                 const PhaseFunction& pf, ArrayTime now);

/// Writes the walsh index; it becomes active at the next pattern epoch.
executive::RegisterWrite pattern_write(int walsh_index);

std::vector<executive::RegisterWrite> register_writes(const FtsRegisters& regs);

}  // namespace tics::fts
