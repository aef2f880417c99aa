#include "tics/framework/registry.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "tics/error.hpp"
#include "../json_node.hpp"
#include "tics/simbus.hpp"

namespace tics::framework {

using nlohmann::json;
using detail::Node;

std::string_view to_string(Access a) { return a == Access::read_only ? "read-only" : "read-write"; }

std::string_view to_string(ValueKind k) {
  switch (k) {
    case ValueKind::integer:
      return "integer";
    case ValueKind::fixed_point:
      return "fixed-point";
    case ValueKind::enumeration:
      return "enum";
  }
  return "?";
}

std::string_view to_string(Lifecycle l) { return l == Lifecycle::persistent ? "persistent" : "transient"; }

const PropertySpec* DeviceSpec::property(std::string_view prop) const {
  for (const auto& p : properties) {
    if (p.name == prop) return &p;
  }
  return nullptr;
}

std::int64_t DeviceSpec::int_param(const std::string& key, std::int64_t fallback) const {
  auto it = params.find(key);
  if (it == params.end() || !it->is_number_integer()) return fallback;
  return it->get<std::int64_t>();
}

namespace {

Codec parse_codec(const Node& n) {
  n.expect_object();
  n.only_keys({"type", "bytes", "signed", "scale"});
  Codec c;
  const auto type = n.at("type").str();
  if (type == "unsigned") {
    c.type = Codec::Type::unsigned_int;
  } else if (type == "signed") {
    c.type = Codec::Type::signed_int;
  } else if (type == "fixed") {
    c.type = Codec::Type::fixed;
  } else {
    n.at("type").fail("codec type must be unsigned, signed or fixed");
  }
  c.bytes = static_cast<int>(n.at("bytes").integer(1, 8));
  if (c.type == Codec::Type::fixed) {
    c.is_signed = n.has("signed") ? n.at("signed").boolean() : false;
    c.scale = n.at("scale").number();
    if (!(c.scale > 0.0)) n.at("scale").fail("scale must be positive");
  } else if (n.has("signed") || n.has("scale")) {
    n.fail("signed/scale apply to fixed codecs only");
  }
  return c;
}

json emit_codec(const Codec& c) {
  json j;
  switch (c.type) {
    case Codec::Type::unsigned_int:
      j["type"] = "unsigned";
      break;
    case Codec::Type::signed_int:
      j["type"] = "signed";
      break;
    case Codec::Type::fixed:
      j["type"] = "fixed";
      j["signed"] = c.is_signed;
      j["scale"] = c.scale;
      break;
  }
  j["bytes"] = c.bytes;
  return j;
}

PropertySpec parse_property(const Node& n) {
  n.expect_object();
  n.only_keys({"name", "access", "kind", "units", "range", "rca", "codec", "monitor_period_events", "alarm",
               "initial"});
  PropertySpec p;
  p.name = n.at("name").name();

  const auto access = n.at("access").str();
  if (access == "read-only") {
    p.access = Access::read_only;
  } else if (access == "read-write") {
    p.access = Access::read_write;
  } else {
    n.at("access").fail("access must be read-only or read-write");
  }

  const auto kind = n.at("kind").str();
  if (kind == "integer") {
    p.kind = ValueKind::integer;
  } else if (kind == "fixed-point") {
    p.kind = ValueKind::fixed_point;
  } else if (kind == "enum") {
    p.kind = ValueKind::enumeration;
  } else {
    n.at("kind").fail("kind must be integer, fixed-point or enum");
  }

  p.units = n.at("units").str();

  const Node range = n.at("range");
  range.expect_array();
  if (range.size() != 2) range.fail("range must be [lo, hi]");
  p.range = {range.at(std::size_t{0}).number(), range.at(std::size_t{1}).number()};
  if (p.range.lo > p.range.hi) range.fail("range lo exceeds hi");

  p.rca = static_cast<std::uint32_t>(n.at("rca").integer(0, simbus::protocol::kRegisterMask));
  p.codec = parse_codec(n.at("codec"));
  if (p.kind == ValueKind::fixed_point && p.codec.type != Codec::Type::fixed) {
    n.at("codec").fail("fixed-point properties need a fixed codec");
  }
  if (p.kind != ValueKind::fixed_point && p.codec.type == Codec::Type::fixed) {
    n.at("codec").fail("fixed codec on a non fixed-point property");
  }

  if (n.has("monitor_period_events")) {
    p.monitor_period_events =
        static_cast<std::uint64_t>(n.at("monitor_period_events").integer(1, std::int64_t{1} << 40));
  }
  if (n.has("alarm")) {
    const Node a = n.at("alarm");
    a.expect_object();
    a.only_keys({"lo", "hi", "hysteresis"});
    AlarmLimits lim{a.at("lo").number(), a.at("hi").number(), 0.0};
    if (a.has("hysteresis")) lim.hysteresis = a.at("hysteresis").number();
    if (lim.lo > lim.hi) a.fail("alarm lo exceeds hi");
    if (lim.hysteresis < 0.0) a.at("hysteresis").fail("hysteresis must be non-negative");
    p.alarm = lim;
  }
  if (n.has("initial")) {
    p.initial = n.at("initial").number();
    try {
      (void)p.codec.encode(p.initial);
    } catch (const RangeError& e) {
      n.at("initial").fail(e.what());
    }
  }
  return p;
}

json emit_property(const PropertySpec& p) {
  json j;
  j["name"] = p.name;
  j["access"] = std::string(to_string(p.access));
  j["kind"] = std::string(to_string(p.kind));
  j["units"] = p.units;
  j["range"] = json::array({p.range.lo, p.range.hi});
  j["rca"] = p.rca;
  j["codec"] = emit_codec(p.codec);
  j["monitor_period_events"] = p.monitor_period_events ? json(*p.monitor_period_events) : json(nullptr);
  if (p.alarm) {
    j["alarm"] = {{"lo", p.alarm->lo}, {"hi", p.alarm->hi}, {"hysteresis", p.alarm->hysteresis}};
  } else {
    j["alarm"] = nullptr;
  }
  j["initial"] = p.initial;
  return j;
}

DeviceSpec parse_device(const Node& n) {
  n.expect_object();
  n.only_keys({"name", "kind", "lifecycle", "bus", "node", "slot", "parent", "params", "properties"});
  DeviceSpec d;
  d.name = n.at("name").name();
  d.kind = n.at("kind").name();

  const auto lifecycle = n.at("lifecycle").str();
  if (lifecycle == "persistent") {
    d.lifecycle = Lifecycle::persistent;
  } else if (lifecycle == "transient") {
    d.lifecycle = Lifecycle::transient;
  } else {
    n.at("lifecycle").fail("lifecycle must be persistent or transient");
  }

  d.bus = n.at("bus").str();
  d.node = static_cast<std::uint32_t>(n.at("node").integer(0, simbus::kMaxNode));
  if (n.has("slot")) d.slot = static_cast<int>(n.at("slot").integer(0, 15));
  if (n.has("parent")) d.parent = n.at("parent").name();
  if (n.has("params")) {
    n.at("params").expect_object();
    d.params = n.at("params").raw();
  }

  const Node props = n.at("properties");
  props.expect_array();
  std::set<std::string> names;
  std::set<std::uint32_t> rcas;
  for (std::size_t i = 0; i < props.size(); ++i) {
    auto p = parse_property(props.at(i));
    if (!names.insert(p.name).second) props.at(i).at("name").fail("duplicate property name " + p.name);
    if (!rcas.insert(p.rca).second) props.at(i).at("rca").fail("duplicate rca within device");
    d.properties.push_back(std::move(p));
  }

  if (d.kind == "FTS") {
    const Node params(d.params, n.path() + ".params");
    params.at("walsh_index").integer(1, 63);
    if (params.has("chirp")) params.at("chirp").boolean();
  }
  return d;
}

}  // namespace

Registry Registry::load(const json& doc) {
  const Node root(doc, "$");
  root.expect_object();
  root.only_keys({"epoch_ns", "buses", "devices"});

  Registry r;
  if (root.has("epoch_ns")) r.epoch_ = ArrayTime(root.at("epoch_ns").integer(0, INT64_MAX / 2));

  const Node buses = root.at("buses");
  buses.expect_array();
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const Node b = buses.at(i);
    b.expect_object();
    b.only_keys({"name", "abm"});
    BusSpec spec{b.at("name").name(), ""};
    spec.abm = b.has("abm") ? b.at("abm").name() : spec.name;
    if (r.find_bus(spec.name)) b.at("name").fail("duplicate bus name " + spec.name);
    for (const auto& other : r.buses_) {
      if (other.abm == spec.abm) b.at("abm").fail("ABM already masters bus " + other.name);
    }
    r.buses_.push_back(spec);
  }

  const Node devices = root.at("devices");
  devices.expect_array();
  std::set<std::pair<std::string, std::uint32_t>> nodes;
  std::set<std::int64_t> walsh;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const Node dn = devices.at(i);
    auto d = parse_device(dn);
    if (r.find(d.name)) dn.at("name").fail("duplicate device name " + d.name);
    if (!r.find_bus(d.bus)) dn.at("bus").fail("unknown bus " + d.bus);
    if (!nodes.insert({d.bus, d.node}).second) dn.at("node").fail("node already used on bus " + d.bus);
    if (d.kind == "FTS" && !walsh.insert(d.int_param("walsh_index", 0)).second) {
      dn.at("params").at("walsh_index").fail("walsh_index already assigned to another FTS");
    }
    r.devices_.push_back(std::move(d));
  }
  for (std::size_t i = 0; i < r.devices_.size(); ++i) {
    const auto& d = r.devices_[i];
    if (d.parent && (!r.find(*d.parent) || *d.parent == d.name)) {
      devices.at(i).at("parent").fail("parent must name another device");
    }
  }
  return r;
}

Registry Registry::parse(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("malformed JSON: ") + e.what());
  }
  return load(doc);
}

Registry Registry::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open configuration file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

json Registry::emit() const {
  json doc;
  doc["epoch_ns"] = epoch_.ns();
  doc["buses"] = json::array();
  for (const auto& b : buses_) doc["buses"].push_back({{"name", b.name}, {"abm", b.abm}});
  doc["devices"] = json::array();
  for (const auto& d : devices_) {
    json j;
    j["name"] = d.name;
    j["kind"] = d.kind;
    j["lifecycle"] = std::string(to_string(d.lifecycle));
    j["bus"] = d.bus;
    j["node"] = d.node;
    j["slot"] = d.slot;
    if (d.parent) j["parent"] = *d.parent;
    j["params"] = d.params;
    j["properties"] = json::array();
    for (const auto& p : d.properties) j["properties"].push_back(emit_property(p));
    doc["devices"].push_back(std::move(j));
  }
  return doc;
}

const DeviceSpec* Registry::find(std::string_view name) const {
  for (const auto& d : devices_) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

const BusSpec* Registry::find_bus(std::string_view name) const {
  for (const auto& b : buses_) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

const DeviceSpec& Registry::device(std::string_view name) const {
  if (const auto* d = find(name)) return *d;
  throw NameNotFound("no device named " + std::string(name));
}

std::size_t Registry::property_count() const {
  std::size_t n = 0;
  for (const auto& d : devices_) n += d.properties.size();
  return n;
}

}  // namespace tics::framework
