#include "tics/framework/manager.hpp"

#include "tics/error.hpp"

namespace tics::framework {

using monitor_stream::Quality;
using monitor_stream::Sample;

std::optional<AlarmTransition> AlarmState::update(double value) {
  if (!raised_) {
    if (value > hi_ || value < lo_) {
      raised_ = true;
      return AlarmTransition::raised;
    }
  } else if (value >= lo_ + hyst_ && value <= hi_ - hyst_) {
    raised_ = false;
    return AlarmTransition::cleared;
  }
  return std::nullopt;
}

namespace {
std::string rejection_text(executive::Rejection r) {
  return r == executive::Rejection::late ? "command rejected: insufficient lead (Late)"
                                         : "command rejected: execution event not in the future (Past)";
}
}  // namespace

CommandRejected::CommandRejected(executive::Rejection reason) : Error(rejection_text(reason)), reason_(reason) {}

Manager::Manager(const Registry& registry, Environment env) : registry_(registry), env_(std::move(env)) {
  if (!env_.executive || !env_.channels) throw UsageError("manager needs an executive and a channel hub");
  for (const auto& d : registry_.devices()) {
    if (!env_.buses.count(d.bus)) throw UsageError("no bus instance for " + d.bus);
  }
}

Manager::~Manager() {
  for (auto& [name, inst] : instances_) {
    const auto& spec = registry_.device(name);
    env_.executive->abm(abm_of(spec)).detach_device(name);
  }
}

void Manager::register_kind(const std::string& kind, ControllerFactory factory) {
  factories_[kind] = std::move(factory);
}

void Manager::start(ArrayTime at) {
  for (const auto& d : registry_.devices()) {
    if (d.lifecycle == Lifecycle::persistent && !instantiated(d.name)) instantiate(d, at);
  }
}

void Manager::attach_configured_monitors(std::uint64_t now_event) {
  for (const auto& d : registry_.devices()) {
    for (const auto& p : d.properties) {
      if (!p.monitor_period_events) continue;
      attach_monitor({d.name, p.name, *p.monitor_period_events, "monitor"}, now_event);
      if (p.alarm) attach_alarm({d.name, p.name, p.alarm->lo, p.alarm->hi, p.alarm->hysteresis});
    }
  }
}

Manager::Instance& Manager::instantiate(const DeviceSpec& spec, ArrayTime at) {
  const std::uint64_t generation = ++generations_[spec.name];
  std::unique_ptr<DeviceController> ctl;
  if (auto f = factories_.find(spec.kind); f != factories_.end()) {
    ctl = f->second(spec, generation);
  } else {
    ctl = std::make_unique<DeviceController>(spec, generation);
  }
  auto& inst = instances_[spec.name];
  inst.controller = std::move(ctl);
  inst.refs = 0;
  env_.executive->abm(abm_of(spec)).attach_device(spec.name, *inst.controller, spec.node, spec.slot);
  inst.controller->on_instantiate(*this, at);
  return inst;
}

void Manager::destroy(const std::string& name) {
  const auto& spec = registry_.device(name);
  env_.executive->abm(abm_of(spec)).detach_device(name);
  instances_.erase(name);
}

DeviceHandle Manager::resolve(std::string_view name, ArrayTime at) {
  const DeviceSpec* spec = registry_.find(name);
  if (!spec) throw NameNotFound("no device named " + std::string(name));
  auto it = instances_.find(name);
  Instance& inst = it != instances_.end() ? it->second : instantiate(*spec, at);
  ++inst.refs;
  const std::uint64_t id = next_handle_++;
  handles_.emplace(id, spec->name);
  return {spec->name, id};
}

void Manager::release(const DeviceHandle& handle) {
  auto h = handles_.find(handle.id);
  if (h == handles_.end() || h->second != handle.device) {
    throw UsageError("handle " + std::to_string(handle.id) + " is not live (double release?)");
  }
  handles_.erase(h);
  auto& inst = instances_.at(handle.device);
  --inst.refs;
  const auto& spec = registry_.device(handle.device);
  if (inst.refs == 0 && spec.lifecycle == Lifecycle::transient) destroy(handle.device);
}

bool Manager::instantiated(std::string_view name) const { return instances_.find(name) != instances_.end(); }

std::size_t Manager::refcount(std::string_view name) const {
  auto it = instances_.find(name);
  return it == instances_.end() ? 0 : it->second.refs;
}

DeviceController& Manager::controller(const DeviceHandle& handle) {
  if (!handles_.count(handle.id)) throw UsageError("handle is not live");
  return *instances_.at(handle.device).controller;
}

const DeviceSpec& Manager::spec_of(const DeviceHandle& handle) const {
  auto h = handles_.find(handle.id);
  if (h == handles_.end() || h->second != handle.device) throw UsageError("handle is not live");
  return registry_.device(handle.device);
}

const PropertySpec& Manager::property_of(const DeviceSpec& dev, std::string_view prop) const {
  const PropertySpec* p = dev.property(prop);
  if (!p) throw NameNotFound("device " + dev.name + " has no property " + std::string(prop));
  return *p;
}

simbus::Bus& Manager::bus_of(const DeviceSpec& dev) const { return *env_.buses.at(dev.bus); }

const std::string& Manager::abm_of(const DeviceSpec& dev) const {
  return registry_.find_bus(dev.bus)->abm;
}

Reading Manager::get_property(const DeviceHandle& handle, std::string_view prop, ArrayTime at) {
  const auto& dev = spec_of(handle);
  const auto& p = property_of(dev, prop);
  auto& bus = bus_of(dev);
  const auto request = simbus::Payload::zeros(static_cast<std::size_t>(p.codec.bytes));
  auto tx = bus.poll({dev.node, simbus::protocol::read_rca(p.rca)}, request.bytes(), bus.next_free(at));
  if (tx.timed_out()) throw TimeoutError("no response from " + dev.name + "." + p.name);
  Reading r;
  r.timestamp = tx.end;
  try {
    r.value = p.codec.decode(tx.response->payload.bytes());
    r.quality = p.range.contains(r.value) ? Quality::ok : Quality::range;
  } catch (const DomainError&) {
    r.quality = Quality::range;
  }
  return r;
}

WriteOutcome Manager::set_property(const DeviceHandle& handle, std::string_view prop, double value, ArrayTime at,
                                   std::optional<std::uint64_t> at_event) {
  const auto& dev = spec_of(handle);
  const auto& p = property_of(dev, prop);
  if (!p.writable()) throw UsageError(dev.name + "." + p.name + " is read-only");
  if (!p.range.contains(value)) throw RangeError(dev.name + "." + p.name + " value outside its range");
  const auto payload = p.codec.encode(value);

  WriteOutcome out;
  if (!at_event) {
    auto& bus = bus_of(dev);
    auto tx = bus.poll({dev.node, simbus::protocol::write_rca(p.rca, false)}, payload.bytes(), bus.next_free(at));
    if (tx.timed_out()) throw TimeoutError("no response from " + dev.name + "." + p.name);
    out.transaction = tx;
    return out;
  }

  auto cmd = make_command(handle, p.name, *at_event);
  cmd.writes.push_back({p.rca, payload});
  out.command_id = submit(std::move(cmd), at);
  return out;
}

simbus::BusTransaction Manager::write_register(const DeviceSpec& dev, std::uint32_t reg,
                                              const simbus::Payload& value, ArrayTime at, bool latched) {
  auto& bus = bus_of(dev);
  return bus.poll({dev.node, simbus::protocol::write_rca(reg, latched)}, value.bytes(), bus.next_free(at));
}

executive::TimedCommand Manager::make_command(const DeviceHandle& handle, std::string member,
                                              std::uint64_t execute_event) const {
  const auto& dev = spec_of(handle);
  executive::TimedCommand cmd;
  cmd.abm = abm_of(dev);
  cmd.device = dev.name;
  cmd.member = std::move(member);
  cmd.node = dev.node;
  cmd.execute_event = execute_event;
  cmd.window_slot = dev.slot;
  return cmd;
}

std::uint64_t Manager::submit(executive::TimedCommand cmd, ArrayTime at) {
  const auto result = env_.executive->submit(std::move(cmd), env_.clock.event_at_or_after(at));
  if (!result) throw CommandRejected(*result.reason);
  return result.id;
}

monitor_stream::Collector& Manager::collector(const std::string& abm, const std::string& channel) {
  auto& slot = collectors_[{abm, channel}];
  if (!slot) slot = std::make_unique<monitor_stream::Collector>(abm);
  return *slot;
}

std::uint64_t Manager::attach_monitor(const MonitorSpec& spec, std::uint64_t now_event) {
  const auto& dev = registry_.device(spec.device);
  const auto& p = property_of(dev, spec.property);
  if (spec.period_events < 1) throw DomainError("monitor period must be at least one event");
  const std::string& abm_name = abm_of(dev);
  auto& sink = collector(abm_name, spec.channel);

  executive::MonitorPoll poll;
  poll.node = dev.node;
  poll.reg = p.rca;
  poll.width = static_cast<std::size_t>(p.codec.bytes);
  poll.period_events = spec.period_events;
  poll.start_event = now_event;
  poll.on_result = [this, &dev, &p, &sink](const simbus::BusTransaction& tx) {
    Sample s{dev.name, p.name, 0.0, Quality::timeout, 0, 0};
    if (tx.response) {
      try {
        s.value = p.codec.decode(tx.response->payload.bytes());
        s.quality = p.range.contains(s.value) ? Quality::ok : Quality::range;
      } catch (const DomainError&) {
        s.quality = Quality::range;
      }
    }
    s = monitor_stream::stamp(std::move(s), env_.clock, tx.end);
    on_monitor_sample(s);
    sink.collect(std::move(s));
  };

  const auto abm_id = env_.executive->abm(abm_name).add_monitor(std::move(poll));
  const std::uint64_t id = next_monitor_++;
  monitors_.emplace(id, ActiveMonitor{spec, abm_name, abm_id});
  return id;
}

void Manager::detach_monitor(std::uint64_t id) {
  auto it = monitors_.find(id);
  if (it == monitors_.end()) throw UsageError("no monitor " + std::to_string(id));
  env_.executive->abm(it->second.abm).remove_monitor(it->second.abm_monitor);
  monitors_.erase(it);
}

std::uint64_t Manager::attach_alarm(const AlarmSpec& spec) {
  const auto& dev = registry_.device(spec.device);
  (void)property_of(dev, spec.property);
  bool monitored = false;
  for (const auto& [id, m] : monitors_) {
    monitored = monitored || (m.spec.device == spec.device && m.spec.property == spec.property);
  }
  if (!monitored) throw UsageError("alarm on " + spec.device + "." + spec.property + " needs an active monitor");
  if (spec.lo > spec.hi || spec.hysteresis < 0.0) throw DomainError("invalid alarm limits");
  const std::uint64_t id = next_alarm_++;
  alarms_.emplace(id, ActiveAlarm{spec, AlarmState(spec.lo, spec.hi, spec.hysteresis)});
  return id;
}

void Manager::on_monitor_sample(const Sample& sample) {
  if (sample.quality == Quality::timeout) return;
  for (auto& [id, alarm] : alarms_) {
    if (alarm.spec.device != sample.device || alarm.spec.property != sample.property) continue;
    if (auto t = alarm.state.update(sample.value)) {
      alarm_events_.push_back({id, sample.device, sample.property, *t, sample.value, sample.event_seq,
                               sample.offset_ns});
    }
  }
}

void Manager::flush(const std::string& abm, const TimingEvent& event) {
  for (auto& [key, col] : collectors_) {
    if (key.first != abm) continue;
    if (auto batch = col->flush(event)) env_.channels->channel(key.second).publish(*batch);
  }
}

std::uint64_t Manager::samples_collected() const {
  std::uint64_t n = 0;
  for (const auto& [key, col] : collectors_) n += col->samples_collected();
  return n;
}

}  // namespace tics::framework
