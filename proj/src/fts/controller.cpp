#include "tics/fts/controller.hpp"

#include "tics/error.hpp"
#include "tics/framework/codec.hpp"

namespace tics::fts {

using executive::RegisterWrite;
using framework::pack_be;

namespace {

ChirpMode mode_of(const framework::DeviceSpec& spec) {
  auto it = spec.params.find("chirp");
  if (it != spec.params.end() && it->is_boolean() && !it->get<bool>()) return ChirpMode::disabled;
  return ChirpMode::enabled;
}

RegisterWrite chirp_write(std::int32_t c) { return {reg::kChirp, pack_be(static_cast<std::uint32_t>(c), 4)}; }

}  // namespace

std::vector<RegisterWrite> register_writes(const FtsRegisters& regs) {
  return {
      {reg::kPhase, pack_be(regs.phase_word(), 4)},
      {reg::kFrequency, pack_be(static_cast<std::uint64_t>(regs.freq), 6)},
      chirp_write(regs.chirp),
  };
}

RegisterWrite pattern_write(int walsh_index) {
  if (walsh_index < 0 || walsh_index >= static_cast<int>(kFastSlots)) throw DomainError("walsh index out of range");
  return {reg::kPatternIndex, pack_be(static_cast<std::uint64_t>(walsh_index), 1)};
}

FtsController::FtsController(const framework::DeviceSpec& spec, std::uint64_t generation)
    : DeviceController(spec, generation),
      walsh_index_(static_cast<int>(spec.int_param("walsh_index", 0))),
      mode_(mode_of(spec)) {}

void FtsController::on_instantiate(framework::Manager& manager, ArrayTime at) {
  if (walsh_index_ == 0) return;
  const auto w = pattern_write(walsh_index_);
  manager.write_register(spec(), w.reg, w.payload, at);
}

std::vector<RegisterWrite> FtsController::prepare(const executive::TimedCommand& cmd) {
  if (cmd.member == kPhaseFunctionMethod) {
    PhaseFunction pf{cmd.args.at("phi0"), cmd.args.at("f"), cmd.args.at("fdot"), cmd.execute_event};
    pf_ = pf;
    ideal_.emplace(pf);
    model_ = initial_registers(pf, mode_);
    model_event_ = pf.epoch_event;
    return cmd.writes;
  }
  // Manual writes to the accumulator take it out of tracking.
  for (const auto& w : cmd.writes) {
    if (w.reg == reg::kPhase || w.reg == reg::kFrequency || w.reg == reg::kChirp) {
      pf_.reset();
      ideal_.reset();
    }
  }
  return cmd.writes;
}

void FtsController::advance_model(std::uint64_t event) {
  if (event <= model_event_) return;
  model_ = model_.advanced(static_cast<std::int64_t>(event - model_event_) * kStepsPerEvent);
  model_event_ = event;
}

std::int32_t FtsController::chirp_update(std::uint64_t event) {
  if (!pf_ || event < pf_->epoch_event) return 0;
  advance_model(event);
  const auto step = (event - pf_->epoch_event) * static_cast<std::uint64_t>(kStepsPerEvent);
  model_.chirp = next_chirp(*ideal_, step, model_);
  return model_.chirp;
}

std::vector<RegisterWrite> FtsController::periodic(std::uint64_t next_event) {
  if (!pf_ || next_event <= pf_->epoch_event) return {};
  if (mode_ == ChirpMode::enabled) return {chirp_write(chirp_update(next_event))};

  const auto step = (next_event - pf_->epoch_event) * static_cast<std::uint64_t>(kStepsPerEvent);
  model_ = linear_anchor(*ideal_, step);
  model_event_ = next_event;
  auto writes = register_writes(model_);
  writes.pop_back();  // chirp stays zero
  return writes;
}

void register_controller(framework::Manager& manager) {
  manager.register_kind(kKind, [](const framework::DeviceSpec& spec, std::uint64_t generation) {
    return std::make_unique<FtsController>(spec, generation);
  });
}

std::uint64_t set_phase_function(framework::Manager& manager, const framework::DeviceHandle& fts,
                                 const PhaseFunction& pf, ArrayTime now) {
  const auto& spec = manager.registry().device(fts.device);
  if (spec.kind != kKind) throw UsageError(fts.device + " is not a synthesizer");
  const auto regs = initial_registers(pf, mode_of(spec));

  auto cmd = manager.make_command(fts, kPhaseFunctionMethod, pf.epoch_event);
  cmd.writes = register_writes(regs);
  cmd.args = {{"phi0", pf.phi0}, {"f", pf.f}, {"fdot", pf.fdot}};
  return manager.submit(std::move(cmd), now);
}

}  // namespace tics::fts
