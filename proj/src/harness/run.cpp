#include "tics/harness/run.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "tics/error.hpp"
#include "tics/fts/controller.hpp"

namespace tics::harness {

using nlohmann::json;

void BatchConsumer::drain() {
  while (auto batch = sub_->next()) {
    auto [it, fresh] = next_seq_.try_emplace(batch->source, batch->batch_seq);
    if (batch->batch_seq != it->second) ++gaps_;
    it->second = batch->batch_seq + 1;
    ++batches_;
    samples_ += batch->samples.size();
  }
}

namespace {

std::string_view transition_name(framework::AlarmTransition t) {
  return t == framework::AlarmTransition::raised ? "raised" : "cleared";
}

bool later(const auto& a, const auto& b) {
  return a.arrival != b.arrival ? a.arrival > b.arrival : a.order > b.order;
}

}  // namespace

json RunReport::to_json() const {
  json j;
  j["seed"] = seed;
  j["duration_ns"] = duration.count();
  j["last_event"] = last_event;
  j["commands"] = {{"accepted", dispatch.accepted},
                   {"rejected_late", dispatch.rejected_late},
                   {"rejected_past", dispatch.rejected_past},
                   {"dispatched", dispatch.dispatched},
                   {"undelivered", undelivered}};
  j["violations"] = violations;
  j["late_arrivals"] = dispatch.late_arrivals;
  j["latch_violations"] = dispatch.latch_violations;
  j["window_overruns"] = dispatch.window_overruns;
  j["monitor_polls"] = dispatch.monitor_polls;
  j["buses"] = json::object();
  for (const auto& [name, b] : buses) {
    j["buses"][name] = {{"abm", b.abm},
                        {"max_period_occupancy_ns", b.max_period_occupancy.count()},
                        {"transactions", b.transactions},
                        {"window_overruns", b.window_overruns}};
  }
  j["channels"] = json::object();
  for (const auto& [name, c] : channels) j["channels"][name] = {{"batches", c.batches}, {"samples", c.samples}};
  j["samples_collected"] = samples_collected;
  j["records_archived"] = records_archived;
  j["consumer"] = {{"batches", consumer_batches}, {"gaps", consumer_gaps}};
  j["alarms"] = json::array();
  for (const auto& a : alarms) {
    j["alarms"].push_back({{"device", a.device},
                           {"property", a.property},
                           {"transition", transition_name(a.transition)},
                           {"value", a.value},
                           {"event_seq", a.event_seq},
                           {"offset_ns", a.offset_ns}});
  }
  j["operations"] = json::array();
  for (const auto& o : operations) {
    json e = {{"index", o.index}, {"op", to_string(o.kind)}, {"status", o.status}};
    if (!o.detail.empty()) e["detail"] = o.detail;
    if (o.command_id) e["command_id"] = *o.command_id;
    if (o.execute_event) e["execute_event"] = *o.execute_event;
    if (o.reading) {
      e["value"] = o.reading->value;
      e["quality"] = monitor_stream::to_string(o.reading->quality);
      e["timestamp_ns"] = o.reading->timestamp.ns();
    }
    j["operations"].push_back(std::move(e));
  }
  return j;
}

Simulation::Simulation(framework::Registry registry, Scenario scenario, std::ostream& archive)
    : scenario_(std::move(scenario)),
      array_(std::move(registry), executive::LeadPolicy{scenario_.min_lead_events}),
      rng_(scenario_.seed),
      archiver_(archive),
      consumer_(array_.channels().subscribe("monitor")) {
  scenario_.validate();
  archive_subs_["monitor"] = array_.channels().subscribe("monitor");
  for (const auto& op : scenario_.script) {
    if (op.kind == OpKind::monitor && !archive_subs_.count(op.channel)) {
      archive_subs_[op.channel] = array_.channels().subscribe(op.channel);
    }
  }
  array_.executive().set_uplink([this](executive::TimedCommand cmd) {
    const ArrayTime arrival = now_ + draw(scenario_.latency.lo, scenario_.latency.hi);
    in_flight_.push_back({arrival, sent_++, std::move(cmd)});
    std::push_heap(in_flight_.begin(), in_flight_.end(), [](const auto& a, const auto& b) { return later(a, b); });
  });
}

Nanos Simulation::draw(Nanos lo, Nanos hi) {
  if (hi <= lo) return lo;
  // Plain modulo keeps the stream identical across standard libraries.
  const auto span = static_cast<std::uint64_t>((hi - lo).count());
  return lo + Nanos(static_cast<std::int64_t>(rng_() % span));
}

framework::DeviceHandle& Simulation::handle(const std::string& device, ArrayTime at) {
  auto it = handles_.find(device);
  if (it == handles_.end()) it = handles_.emplace(device, array_.manager().resolve(device, at)).first;
  return it->second;
}

void Simulation::deliver_due(ArrayTime until, bool inclusive) {
  auto cmp = [](const auto& a, const auto& b) { return later(a, b); };
  while (!in_flight_.empty()) {
    const ArrayTime t = in_flight_.front().arrival;
    if (inclusive ? t > until : t >= until) break;
    std::pop_heap(in_flight_.begin(), in_flight_.end(), cmp);
    InFlight msg = std::move(in_flight_.back());
    in_flight_.pop_back();
    now_ = msg.arrival;
    array_.executive().abm(msg.cmd.abm).deliver(std::move(msg.cmd));
  }
}

void Simulation::execute(std::size_t index, const ScriptOp& op) {
  auto& mgr = array_.manager();
  OpOutcome out;
  out.index = index;
  out.kind = op.kind;
  auto tag = [&]() -> std::optional<std::uint64_t> {
    if (op.at_event) return op.at_event;
    if (op.lead_events) return array_.clock().event_at_or_after(op.at) + *op.lead_events;
    return std::nullopt;
  };
  try {
    switch (op.kind) {
      case OpKind::set: {
        out.execute_event = tag();
        const auto w = mgr.set_property(handle(op.device, op.at), op.property, op.value, op.at, out.execute_event);
        out.command_id = w.command_id;
        break;
      }
      case OpKind::phase_function: {
        out.execute_event = tag();
        const fts::PhaseFunction pf{op.phi0, op.f, op.fdot, *out.execute_event};
        out.command_id = fts::set_phase_function(mgr, handle(op.device, op.at), pf, op.at);
        break;
      }
      case OpKind::monitor:
        mgr.attach_monitor({op.device, op.property, op.period_events, op.channel}, array_.current_event());
        break;
      case OpKind::alarm:
        mgr.attach_alarm({op.device, op.property, op.lo, op.hi, op.hysteresis});
        break;
      case OpKind::get:
        out.reading = mgr.get_property(handle(op.device, op.at), op.property, op.at);
        break;
      case OpKind::sense: {
        const auto& spec = array_.registry().device(op.device);
        const auto* p = spec.property(op.property);
        if (!p) throw NameNotFound("device " + op.device + " has no property " + op.property);
        array_.hardware_as<framework::RegisterDevice>(op.device).set_register(p->rca, p->codec.encode(op.value));
        break;
      }
    }
  } catch (const framework::CommandRejected& e) {
    out.status = e.reason() == executive::Rejection::late ? "rejected_late" : "rejected_past";
  } catch (const Overcommitted&) {
    throw;
  } catch (const Error& e) {
    out.status = "error";
    out.detail = e.what();
  }
  outcomes_.push_back(std::move(out));
}

void Simulation::drain_streams() {
  for (auto& [name, sub] : archive_subs_) archiver_.archive(*sub);
  consumer_.drain();
}

RunReport Simulation::run() {
  const auto wall_start = std::chrono::steady_clock::now();
  const MasterClock& clock = array_.clock();
  const std::uint64_t last =
      static_cast<std::uint64_t>((scenario_.duration + MasterClock::kPeriod - Nanos{1}) / MasterClock::kPeriod);

  std::vector<std::size_t> order(scenario_.script.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scenario_.script[a].at < scenario_.script[b].at; });

  array_.start();
  std::size_t next_op = 0;
  for (std::uint64_t seq = 1; seq <= last; ++seq) {
    const ArrayTime pulse_time = clock.event_time(seq);
    while (next_op < order.size() && scenario_.script[order[next_op]].at <= pulse_time) {
      const auto& op = scenario_.script[order[next_op]];
      deliver_due(op.at, true);
      now_ = op.at;
      execute(order[next_op], op);
      ++next_op;
    }
    deliver_due(pulse_time, true);
    now_ = pulse_time;
    const ArrayTime delivered = pulse_time + draw(Nanos{0}, scenario_.pulse_jitter);
    array_.pulse(delivered, seq == last);
    drain_streams();
  }

  RunReport r;
  r.seed = scenario_.seed;
  r.duration = scenario_.duration;
  r.last_event = last;
  r.dispatch = array_.executive().report();
  r.violations = r.dispatch.late_arrivals + r.dispatch.latch_violations;
  r.undelivered = in_flight_.size();
  for (const auto& [name, abm] : array_.executive().abms()) r.undelivered += abm->queued();
  for (const auto& b : array_.registry().buses()) {
    const auto& abm = array_.executive().abm(b.abm);
    r.buses[b.name] = {b.abm, abm.report().max_period_occupancy, array_.bus(b.name).transaction_count(),
                       abm.report().window_overruns};
  }
  for (const auto& [name, ch] : array_.channels().channels()) {
    r.channels[name] = {ch->batches_published(), ch->samples_published()};
  }
  r.samples_collected = array_.manager().samples_collected();
  r.records_archived = archiver_.records();
  r.consumer_batches = consumer_.batches();
  r.consumer_gaps = consumer_.gaps();
  r.alarms = array_.manager().alarm_events();
  r.operations = outcomes_;
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return r;
}

RunReport run_to_directory(const framework::Registry& registry, const Scenario& scenario,
                           const std::filesystem::path& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());

  std::ofstream archive(out / "archive.csv", std::ios::binary | std::ios::trunc);
  if (!archive) throw IoError("cannot open " + (out / "archive.csv").string());
  Simulation sim(registry, scenario, archive);
  RunReport report = sim.run();
  archive.flush();
  if (!archive) throw IoError("failed writing " + (out / "archive.csv").string());

  std::ofstream rep(out / "report.json", std::ios::binary | std::ios::trunc);
  rep << report.to_json().dump(2) << '\n';
  if (!rep) throw IoError("failed writing " + (out / "report.json").string());
  return report;
}

}  // namespace tics::harness
