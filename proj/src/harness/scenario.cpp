#include "tics/harness/scenario.hpp"

#include <fstream>
#include <sstream>

#include "../json_node.hpp"
#include "tics/error.hpp"

namespace tics::harness {

using detail::Node;
using nlohmann::json;

std::string_view to_string(OpKind k) {
  switch (k) {
    case OpKind::set:
      return "set";
    case OpKind::phase_function:
      return "phase_function";
    case OpKind::monitor:
      return "monitor";
    case OpKind::alarm:
      return "alarm";
    case OpKind::get:
      return "get";
    case OpKind::sense:
      return "sense";
  }
  return "?";
}

namespace {

constexpr std::int64_t kMaxNs = std::int64_t{1} << 60;

OpKind parse_kind(const Node& n) {
  const auto s = n.str();
  for (auto k : {OpKind::set, OpKind::phase_function, OpKind::monitor, OpKind::alarm, OpKind::get, OpKind::sense}) {
    if (s == to_string(k)) return k;
  }
  n.fail("unknown op '" + s + "'");
}

void parse_tag(const Node& n, ScriptOp& op, bool required) {
  if (n.has("at_event") && n.has("lead_events")) n.fail("give at_event or lead_events, not both");
  if (n.has("at_event")) op.at_event = static_cast<std::uint64_t>(n.at("at_event").integer(0, kMaxNs));
  if (n.has("lead_events")) op.lead_events = static_cast<std::uint64_t>(n.at("lead_events").integer(0, kMaxNs));
  if (required && !op.at_event && !op.lead_events) n.fail("needs at_event or lead_events");
}

ScriptOp parse_op(const Node& n) {
  n.expect_object();
  ScriptOp op;
  op.kind = parse_kind(n.at("op"));
  op.at = ArrayTime(n.at("at_ns").integer(0, kMaxNs));
  op.device = n.at("device").name();

  switch (op.kind) {
    case OpKind::set:
      n.only_keys({"op", "at_ns", "device", "property", "value", "at_event", "lead_events"});
      op.property = n.at("property").name();
      op.value = n.at("value").number();
      parse_tag(n, op, false);
      break;
    case OpKind::phase_function:
      n.only_keys({"op", "at_ns", "device", "phi0", "f", "fdot", "at_event", "lead_events"});
      op.phi0 = n.has("phi0") ? n.at("phi0").number() : 0.0;
      op.f = n.has("f") ? n.at("f").number() : 0.0;
      op.fdot = n.has("fdot") ? n.at("fdot").number() : 0.0;
      parse_tag(n, op, true);
      break;
    case OpKind::monitor:
      n.only_keys({"op", "at_ns", "device", "property", "period_events", "channel"});
      op.property = n.at("property").name();
      op.period_events = static_cast<std::uint64_t>(n.at("period_events").integer(1, 1 << 30));
      if (n.has("channel")) op.channel = n.at("channel").name();
      break;
    case OpKind::alarm:
      n.only_keys({"op", "at_ns", "device", "property", "lo", "hi", "hysteresis"});
      op.property = n.at("property").name();
      op.lo = n.at("lo").number();
      op.hi = n.at("hi").number();
      op.hysteresis = n.has("hysteresis") ? n.at("hysteresis").number() : 0.0;
      if (op.lo > op.hi) n.at("lo").fail("lo exceeds hi");
      break;
    case OpKind::get:
      n.only_keys({"op", "at_ns", "device", "property"});
      op.property = n.at("property").name();
      break;
    case OpKind::sense:
      n.only_keys({"op", "at_ns", "device", "property", "value"});
      op.property = n.at("property").name();
      op.value = n.at("value").number();
      break;
  }
  return op;
}

Nanos parse_ns(const Node& n) { return Nanos(n.integer(0, kMaxNs)); }

}  // namespace

Nanos Scenario::latency_bound() const {
  return static_cast<std::int64_t>(min_lead_events - 1) * MasterClock::kPeriod;
}

void Scenario::validate() const {
  if (duration <= Nanos{0}) throw ConfigError("$.duration_s", "must be positive");
  if (min_lead_events < 1) throw ConfigError("$.min_lead_events", "must be at least 1");
  if (latency.lo < Nanos{0} || latency.hi < latency.lo) throw ConfigError("$.latency_ns", "need 0 <= lo <= hi");
  // Latencies are drawn from [lo, hi), so hi itself is never reached.
  const Nanos worst = latency.hi > latency.lo ? latency.hi - Nanos{1} : latency.lo;
  if (worst > Nanos{0} && worst >= latency_bound()) {
    throw ConfigError("$.latency_ns", "latency must stay below (min_lead_events - 1) * 48 ms = " +
                                          std::to_string(latency_bound().count()) + " ns");
  }
  if (pulse_jitter < Nanos{0} || 2 * pulse_jitter >= MasterClock::kPeriod) {
    throw ConfigError("$.pulse_jitter_ns", "must be below half a timing period");
  }
  for (std::size_t i = 0; i < script.size(); ++i) {
    if (script[i].at.ns() >= duration.count()) {
      throw ConfigError("$.script[" + std::to_string(i) + "].at_ns", "after the end of the run");
    }
  }
}

Scenario Scenario::load(const json& doc) {
  const Node root(doc, "$");
  root.expect_object();
  root.only_keys({"duration_s", "seed", "min_lead_events", "latency_ns", "pulse_jitter_ns", "script"});
  Scenario s;
  if (root.has("duration_s")) {
    const double d = root.at("duration_s").number();
    if (!(d > 0.0) || d > 1e6) root.at("duration_s").fail("must be in (0, 1e6]");
    s.duration = Nanos(static_cast<std::int64_t>(d * 1e9 + 0.5));
  }
  if (root.has("seed")) s.seed = static_cast<std::uint64_t>(root.at("seed").integer(0, INT64_MAX));
  if (root.has("min_lead_events")) {
    s.min_lead_events = static_cast<std::uint64_t>(root.at("min_lead_events").integer(1, 1 << 20));
  }
  if (root.has("latency_ns")) {
    const Node l = root.at("latency_ns");
    l.expect_object();
    l.only_keys({"lo", "hi"});
    s.latency.lo = parse_ns(l.at("lo"));
    s.latency.hi = parse_ns(l.at("hi"));
  }
  if (root.has("pulse_jitter_ns")) s.pulse_jitter = parse_ns(root.at("pulse_jitter_ns"));
  if (root.has("script")) {
    const Node script = root.at("script");
    script.expect_array();
    for (std::size_t i = 0; i < script.size(); ++i) s.script.push_back(parse_op(script.at(i)));
  }
  s.validate();
  return s;
}

Scenario Scenario::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("$", "cannot open scenario " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("scenario is not valid JSON: ") + e.what());
  }
  return load(doc);
}

}  // namespace tics::harness
