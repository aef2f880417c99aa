#include "tics/harness/array.hpp"

#include "tics/error.hpp"
#include "tics/fts/controller.hpp"
#include "tics/fts/hardware.hpp"

namespace tics::harness {

namespace {

std::unique_ptr<framework::Hardware> make_hardware(const framework::DeviceSpec& spec) {
  if (spec.kind == fts::kKind) return std::make_unique<fts::FtsHardware>(spec.name);
  return std::make_unique<framework::RegisterDevice>(spec);
}

}  // namespace

Array::Array(framework::Registry registry, executive::LeadPolicy lead)
    : registry_(std::move(registry)), clock_(registry_.epoch()), executive_(lead) {
  for (const auto& b : registry_.buses()) {
    auto& bus = buses_[b.name];
    bus = std::make_unique<simbus::Bus>();
    executive_.add_abm(b.abm, *bus);
  }
  for (const auto& d : registry_.devices()) {
    auto hw = make_hardware(d);
    buses_.at(d.bus)->attach(d.node, *hw);
    hardware_[d.name] = std::move(hw);
  }
  framework::Environment env{clock_, {}, &executive_, &channels_};
  for (auto& [name, bus] : buses_) env.buses[name] = bus.get();
  manager_ = std::make_unique<framework::Manager>(registry_, env);
  fts::register_controller(*manager_);
}

Array::~Array() {
  manager_.reset();
  for (const auto& d : registry_.devices()) buses_.at(d.bus)->detach(d.node);
}

framework::Hardware& Array::hardware(const std::string& device) {
  auto it = hardware_.find(device);
  if (it == hardware_.end()) throw NameNotFound("no hardware named " + device);
  return *it->second;
}

std::uint64_t Array::current_event() const {
  if (!last_event_) throw NotSynchronized("array not started");
  return *last_event_;
}

void Array::start() {
  if (started()) throw UsageError("array already started");
  const TimingEvent zero = clock_.event(0);
  for (auto& [name, hw] : hardware_) hw->sync(zero.seq, zero.tai);
  for (auto& [name, abm] : executive_.abms()) abm->clock().sync(zero.seq, zero.tai);
  last_event_ = 0;

  manager_->start(zero.tai);
  manager_->attach_configured_monitors(zero.seq);
  for (auto& [name, abm] : executive_.abms()) {
    abm->abm_dispatch(zero);
    abm->schedule_monitors(zero);
  }
}

TimingEvent Array::pulse(std::optional<ArrayTime> delivered_at, bool last) {
  if (!started()) throw NotSynchronized("array not started");
  const TimingEvent ended = clock_.event(*last_event_);
  for (auto& [name, hw] : hardware_) hw->pulse(delivered_at);

  TimingEvent ev;
  for (auto& [name, abm] : executive_.abms()) {
    ev = abm->on_pulse(delivered_at);
    abm->close_period(ended);
    manager_->flush(name, ev);
    if (last) continue;
    abm->abm_dispatch(ev);
    abm->schedule_monitors(ev);
  }
  last_event_ = ended.seq + 1;
  return clock_.event(*last_event_);
}

}  // namespace tics::harness
