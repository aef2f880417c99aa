#pragma once

// Deterministic discrete-event run of a scenario against an array.
//
// Ordering at equal simulated times: message arrivals, then script actions,
// then the timing pulse. The only randomness is the seeded latency and pulse
// jitter drawn here.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "tics/harness/array.hpp"
#include "tics/harness/scenario.hpp"

namespace tics::harness {

struct OpOutcome {
  std::size_t index = 0;
  OpKind kind = OpKind::set;
  std::string status = "ok";  // ok, rejected_late, rejected_past, error
  std::string detail;
  std::optional<std::uint64_t> command_id;
  std::optional<std::uint64_t> execute_event;
  std::optional<framework::Reading> reading;
};

/// Stand-in for the correlator computer: consumes monitor batches and checks
/// that every source's batch numbers arrive without gaps.
class BatchConsumer {
 public:
  explicit BatchConsumer(std::shared_ptr<monitor_stream::Subscription> sub) : sub_(std::move(sub)) {}

  void drain();

  std::uint64_t batches() const { return batches_; }
  std::uint64_t samples() const { return samples_; }
  std::uint64_t gaps() const { return gaps_; }

 private:
  std::shared_ptr<monitor_stream::Subscription> sub_;
  std::map<std::string, std::uint64_t> next_seq_;
  std::uint64_t batches_ = 0;
  std::uint64_t samples_ = 0;
  std::uint64_t gaps_ = 0;
};

struct BusStats {
  std::string abm;
  Nanos max_period_occupancy{0};
  std::uint64_t transactions = 0;
  std::uint64_t window_overruns = 0;
};

struct ChannelStats {
  std::uint64_t batches = 0;
  std::uint64_t samples = 0;
};

struct RunReport {
  std::uint64_t seed = 0;
  Nanos duration{0};
  std::uint64_t last_event = 0;
  executive::DispatchReport dispatch;
  std::uint64_t violations = 0;  // late arrivals + latch violations
  std::uint64_t undelivered = 0;  // commands still in flight or queued at the end
  std::map<std::string, BusStats> buses;
  std::map<std::string, ChannelStats> channels;
  std::uint64_t samples_collected = 0;
  std::uint64_t records_archived = 0;
  std::uint64_t consumer_batches = 0;
  std::uint64_t consumer_gaps = 0;
  std::vector<framework::AlarmEvent> alarms;
  std::vector<OpOutcome> operations;
  double wall_seconds = 0.0;  // not serialized, so reports stay reproducible

  bool passed() const { return violations == 0; }
  nlohmann::json to_json() const;
};

class Simulation {
 public:
  /// Archive records go to `archive`, header first.
  Simulation(framework::Registry registry, Scenario scenario, std::ostream& archive);

  Array& array() { return array_; }
  const Scenario& scenario() const { return scenario_; }

  /// Runs to the end of the scenario. Throws Overcommitted if the monitors
  /// do not fit on a bus, and IoError if the archive cannot be written.
  RunReport run();

  const std::vector<OpOutcome>& outcomes() const { return outcomes_; }

 private:
  struct InFlight {
    ArrayTime arrival;
    std::uint64_t order;
    executive::TimedCommand cmd;
  };

  Nanos draw(Nanos lo, Nanos hi);
  void execute(std::size_t index, const ScriptOp& op);
  void deliver_due(ArrayTime until, bool inclusive);
  framework::DeviceHandle& handle(const std::string& device, ArrayTime at);
  void drain_streams();

  Scenario scenario_;
  Array array_;
  std::mt19937_64 rng_;
  ArrayTime now_;
  std::vector<InFlight> in_flight_;  // min-heap on (arrival, order)
  std::uint64_t sent_ = 0;
  std::map<std::string, framework::DeviceHandle> handles_;
  std::vector<OpOutcome> outcomes_;
  monitor_stream::Archiver archiver_;
  std::map<std::string, std::shared_ptr<monitor_stream::Subscription>> archive_subs_;
  BatchConsumer consumer_;
};

/// Runs the scenario, writing archive.csv and report.json into `out`.
RunReport run_to_directory(const framework::Registry& registry, const Scenario& scenario,
                           const std::filesystem::path& out);

}  // namespace tics::harness
