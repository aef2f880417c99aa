#pragma once

// Scenario files: run length, seed, uplink latency bounds and a script of
// operator actions. Schema in docs/scenario-schema.md.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tics/timebase.hpp"

namespace tics::harness {

enum class OpKind { set, phase_function, monitor, alarm, get, sense };

std::string_view to_string(OpKind k);

struct ScriptOp {
  OpKind kind = OpKind::set;
  ArrayTime at;  // submit time on the ACC
  std::string device;
  std::string property;
  double value = 0.0;
  // Time tag. At most one is set; neither means an immediate write.
  std::optional<std::uint64_t> at_event;
  std::optional<std::uint64_t> lead_events;  // relative to the submit event
  // phase_function
  double phi0 = 0.0, f = 0.0, fdot = 0.0;
  // monitor
  std::uint64_t period_events = 1;
  std::string channel = "monitor";
  // alarm
  double lo = 0.0, hi = 0.0, hysteresis = 0.0;
};

/// Uniform ACC->ABM message latency in [lo, hi).
struct LatencyModel {
  Nanos lo{0};
  Nanos hi{0};
};

struct Scenario {
  Nanos duration = std::chrono::seconds(60);
  std::uint64_t seed = 1;
  std::uint64_t min_lead_events = 2;
  LatencyModel latency;
  Nanos pulse_jitter{0};  // pulse edges arrive up to this late
  std::vector<ScriptOp> script;

  /// Largest latency the lead rule absorbs: (min_lead - 1) periods.
  Nanos latency_bound() const;

  /// Throws ConfigError on bounds that break the scenario invariants.
  void validate() const;

  static Scenario load(const nlohmann::json& doc);
  static Scenario load_file(const std::filesystem::path& path);
};

}  // namespace tics::harness
