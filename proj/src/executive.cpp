#include "tics/executive.hpp"

#include <algorithm>

#include "tics/error.hpp"

namespace tics::executive {

SubmitResult judge(std::uint64_t execute_event, std::uint64_t now_event, const LeadPolicy& lead) {
  if (execute_event <= now_event) return {false, Rejection::past, 0};
  if (execute_event - now_event < lead.min_lead_events) return {false, Rejection::late, 0};
  return {true, std::nullopt, 0};
}

Abm::Abm(std::string name, simbus::Bus& bus, WindowPolicy windows)
    : name_(std::move(name)), bus_(bus), windows_(windows) {}

TimingEvent Abm::on_pulse(std::optional<ArrayTime> delivered_at) {
  clock_.pulse(delivered_at);
  return {clock_.current_seq(), clock_.now()};
}

void Abm::deliver(TimedCommand cmd) {
  // Commands for event E go out while handling pulse E-1.
  if (clock_.synchronized() && cmd.execute_event <= clock_.current_seq() + 1) {
    ++report_.late_arrivals;
    return;
  }
  queue_[cmd.execute_event].push_back(std::move(cmd));
}

void Abm::attach_device(const std::string& device, AbmDevice& logic, std::uint32_t node, int slot) {
  if (slot < 0 || slot >= windows_.slots_per_period) throw DomainError("window slot out of range");
  devices_[device] = AttachedDevice{&logic, node, slot};
}

void Abm::detach_device(const std::string& device) { devices_.erase(device); }

std::vector<DispatchedWrite> Abm::abm_dispatch(const TimingEvent& pulse) {
  const std::uint64_t next = pulse.seq + 1;
  const ArrayTime latch_time = pulse.tai + MasterClock::kPeriod;

  std::vector<TimedCommand> due;
  if (auto it = queue_.find(next); it != queue_.end()) {
    due = std::move(it->second);
    queue_.erase(it);
  }
  // Anything older can no longer make its event.
  for (auto it = queue_.begin(); it != queue_.end() && it->first < next;) {
    report_.late_arrivals += it->second.size();
    it = queue_.erase(it);
  }

  std::vector<DispatchedWrite> sent;
  auto transmit = [&](std::uint64_t command_id, std::uint32_t node, const RegisterWrite& w, int slot) {
    const ArrayTime start = bus_.next_free(windows_.slot_start(pulse.tai, slot));
    auto tx = bus_.poll({node, simbus::protocol::write_rca(w.reg, true)}, w.payload.bytes(), start);
    DispatchedWrite d{command_id, next, tx, tx.end > windows_.slot_end(pulse.tai, slot)};
    if (d.overrun) ++report_.window_overruns;
    if (tx.end > latch_time) ++report_.latch_violations;
    sent.push_back(d);
  };

  for (int slot = 0; slot < windows_.slots_per_period; ++slot) {
    for (const auto& cmd : due) {
      if (cmd.window_slot != slot) continue;
      std::vector<RegisterWrite> writes;
      if (auto dev = devices_.find(cmd.device); dev != devices_.end()) {
        writes = dev->second.logic->prepare(cmd);
      } else {
        writes = cmd.writes;
      }
      for (const auto& w : writes) transmit(cmd.id, cmd.node, w, slot);
      ++report_.dispatched;
    }
    for (auto& [name, dev] : devices_) {
      if (dev.slot != slot) continue;
      for (const auto& w : dev.logic->periodic(next)) transmit(0, dev.node, w, slot);
    }
  }

  history_.insert(history_.end(), sent.begin(), sent.end());
  return sent;
}

std::vector<simbus::BusTransaction> Abm::schedule_monitors(const TimingEvent& pulse) {
  const ArrayTime period_end = pulse.tai + MasterClock::kPeriod;
  std::vector<simbus::BusTransaction> polls;
  for (auto& [id, m] : monitors_) {
    if (pulse.seq <= m.start_event || (pulse.seq - m.start_event) % m.period_events != 0) continue;
    const auto request = simbus::Payload::zeros(m.width);
    auto tx = bus_.poll({m.node, simbus::protocol::read_rca(m.reg)}, request.bytes(), bus_.next_free(pulse.tai));
    if (tx.end > period_end) {
      throw Overcommitted("ABM " + name_ + ": monitor polls overrun timing period " + std::to_string(pulse.seq));
    }
    ++report_.monitor_polls;
    if (m.on_result) m.on_result(tx);
    polls.push_back(tx);
  }
  return polls;
}

Nanos Abm::poll_cost(std::size_t width) const {
  return 2 * simbus::frame_duration(width, bus_.model());
}

Nanos Abm::monitor_load() const {
  Nanos total{0};
  for (const auto& [id, m] : monitors_) total += poll_cost(m.width);
  return total;
}

std::uint64_t Abm::add_monitor(MonitorPoll poll) {
  if (poll.period_events < 1) throw DomainError("monitor period must be at least one event");
  if (poll.width > simbus::kMaxPayload) throw DomainError("monitor width exceeds 8 bytes");
  const Nanos load = monitor_load() + poll_cost(poll.width);
  if (load > MasterClock::kPeriod) {
    throw Overcommitted("ABM " + name_ + ": monitors would need " + std::to_string(load.count()) +
                        " ns per timing period");
  }
  const std::uint64_t id = next_monitor_id_++;
  monitors_.emplace(id, std::move(poll));
  return id;
}

void Abm::remove_monitor(std::uint64_t id) { monitors_.erase(id); }

void Abm::close_period(const TimingEvent& ended) {
  const Nanos busy = bus_.busy_time(ended.tai, ended.tai + MasterClock::kPeriod);
  report_.max_period_occupancy = std::max(report_.max_period_occupancy, busy);
}

std::size_t Abm::queued() const {
  std::size_t n = 0;
  for (const auto& [event, cmds] : queue_) n += cmds.size();
  return n;
}

Executive::Executive(LeadPolicy lead, WindowPolicy windows) : lead_(lead), windows_(windows) {
  if (lead_.min_lead_events < 1) throw DomainError("min_lead_events must be at least 1");
}

Abm& Executive::add_abm(const std::string& name, simbus::Bus& bus) {
  auto& slot = abms_[name];
  if (slot) throw UsageError("duplicate ABM " + name);
  slot = std::make_unique<Abm>(name, bus, windows_);
  return *slot;
}

Abm& Executive::abm(const std::string& name) {
  auto it = abms_.find(name);
  if (it == abms_.end()) throw NameNotFound("no ABM named " + name);
  return *it->second;
}

SubmitResult Executive::submit(TimedCommand cmd, std::uint64_t now_event) {
  if (cmd.window_slot < 0 || cmd.window_slot >= windows_.slots_per_period) {
    throw DomainError("window slot out of range");
  }
  Abm& target = abm(cmd.abm);
  SubmitResult result = judge(cmd.execute_event, now_event, lead_);
  if (!result) {
    ++(*result.reason == Rejection::late ? rejected_late_ : rejected_past_);
    return result;
  }
  ++accepted_;
  cmd.id = result.id = next_id_++;
  if (uplink_) {
    uplink_(std::move(cmd));
  } else {
    target.deliver(std::move(cmd));
  }
  return result;
}

DispatchReport Executive::report() const {
  DispatchReport total;
  total.accepted = accepted_;
  total.rejected_late = rejected_late_;
  total.rejected_past = rejected_past_;
  for (const auto& [name, abm] : abms_) {
    const auto& r = abm->report();
    total.dispatched += r.dispatched;
    total.window_overruns += r.window_overruns;
    total.late_arrivals += r.late_arrivals;
    total.latch_violations += r.latch_violations;
    total.monitor_polls += r.monitor_polls;
    total.max_period_occupancy = std::max(total.max_period_occupancy, r.max_period_occupancy);
  }
  return total;
}

}  // namespace tics::executive
