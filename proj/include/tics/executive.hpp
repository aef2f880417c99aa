#pragma once

// Command path from the array control computer (ACC) to the antenna bus
// masters (ABMs). The ACC accepts time-tagged commands only if they leave
// enough lead for the network; each ABM transmits a command during the period
// before its execution event, inside the target device's window slot, and the
// hardware latches it on the pulse.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tics/simbus.hpp"
#include "tics/timebase.hpp"

namespace tics::executive {

struct RegisterWrite {
  std::uint32_t reg = 0;  // device register, without protocol flags
  simbus::Payload payload;

  bool operator==(const RegisterWrite&) const = default;
};

struct TimedCommand {
  std::uint64_t id = 0;  // assigned on acceptance
  std::string abm;
  std::string device;
  std::string member;  // property or method name
  std::uint32_t node = 0;
  std::vector<RegisterWrite> writes;
  std::map<std::string, double> args;  // method arguments, if any
  std::uint64_t execute_event = 0;
  int window_slot = 0;
  std::uint32_t client_id = 0;
};

struct WindowPolicy {
  int slots_per_period = 16;
  Nanos slot_width = std::chrono::milliseconds(3);

  ArrayTime slot_start(ArrayTime period_start, int slot) const { return period_start + slot * slot_width; }
  ArrayTime slot_end(ArrayTime period_start, int slot) const { return period_start + (slot + 1) * slot_width; }
};
static_assert(16 * std::chrono::milliseconds(3) == timescale::kTimingPeriod);

struct LeadPolicy {
  std::uint64_t min_lead_events = 2;
};

enum class Rejection { late, past };

struct SubmitResult {
  bool accepted = false;
  std::optional<Rejection> reason;
  std::uint64_t id = 0;

  explicit operator bool() const { return accepted; }
};

/// Lead rule, as a pure function.
SubmitResult judge(std::uint64_t execute_event, std::uint64_t now_event, const LeadPolicy& lead);

/// ABM-resident logic of a device controller. Lets a controller turn method
/// commands into register writes and send its own per-event updates.
class AbmDevice {
 public:
  virtual ~AbmDevice() = default;

  /// Register writes transmitting `cmd`. Called in the period before
  /// cmd.execute_event.
  virtual std::vector<RegisterWrite> prepare(const TimedCommand& cmd) { return cmd.writes; }

  /// Writes to latch on `next_event`, sent after the device's commands.
  virtual std::vector<RegisterWrite> periodic(std::uint64_t /*next_event*/) { return {}; }
};

struct DispatchedWrite {
  std::uint64_t command_id = 0;  // 0 for periodic controller updates
  std::uint64_t latch_event = 0;
  simbus::BusTransaction transaction;
  bool overrun = false;
};

struct MonitorPoll {
  std::uint32_t node = 0;
  std::uint32_t reg = 0;
  std::size_t width = 0;  // bytes in request and response
  std::uint64_t period_events = 1;
  std::uint64_t start_event = 0;  // polled on events start + k*period, k >= 1
  std::function<void(const simbus::BusTransaction&)> on_result;
};

struct DispatchReport {
  std::uint64_t accepted = 0;
  std::uint64_t rejected_late = 0;
  std::uint64_t rejected_past = 0;
  std::uint64_t dispatched = 0;
  std::uint64_t window_overruns = 0;
  std::uint64_t late_arrivals = 0;      // reached the ABM after their transmit period
  std::uint64_t latch_violations = 0;   // transmission spilled past the execution event
  std::uint64_t monitor_polls = 0;
  Nanos max_period_occupancy{0};
};

/// One antenna bus master: its dispatch queue, attached controllers, monitor
/// schedule and pulse-counting clock.
class Abm {
 public:
  Abm(std::string name, simbus::Bus& bus, WindowPolicy windows = {});

  const std::string& name() const { return name_; }
  simbus::Bus& bus() { return bus_; }
  SlaveClock& clock() { return clock_; }
  const SlaveClock& clock() const { return clock_; }

  /// Counts a timing pulse and returns it as a timing event in slave time.
  TimingEvent on_pulse(std::optional<ArrayTime> delivered_at = std::nullopt);

  /// ABM-side intake of a command that has crossed the network.
  void deliver(TimedCommand cmd);

  void attach_device(const std::string& device, AbmDevice& logic, std::uint32_t node, int slot);
  void detach_device(const std::string& device);

  /// Transmits every queued command for event `pulse.seq + 1`, slot by slot,
  /// followed in each slot by the periodic writes of that slot's devices.
  std::vector<DispatchedWrite> abm_dispatch(const TimingEvent& pulse);

  /// Polls the monitors due on `pulse`, after the command traffic. Throws
  /// Overcommitted if they do not fit before the next pulse.
  std::vector<simbus::BusTransaction> schedule_monitors(const TimingEvent& pulse);

  /// Adds a monitor. Throws Overcommitted if the worst-case per-period load of
  /// all monitors would exceed one timing period.
  std::uint64_t add_monitor(MonitorPoll poll);
  void remove_monitor(std::uint64_t id);
  bool has_monitor(std::uint64_t id) const { return monitors_.count(id) != 0; }

  /// Bus time taken by one poll of every monitor.
  Nanos monitor_load() const;

  /// Records the bus occupancy of the period that just ended.
  void close_period(const TimingEvent& ended);

  std::size_t queued() const;
  const DispatchReport& report() const { return report_; }
  const std::vector<DispatchedWrite>& history() const { return history_; }

 private:
  struct AttachedDevice {
    AbmDevice* logic = nullptr;
    std::uint32_t node = 0;
    int slot = 0;
  };

  Nanos poll_cost(std::size_t width) const;

  std::string name_;
  simbus::Bus& bus_;
  WindowPolicy windows_;
  SlaveClock clock_;
  std::map<std::uint64_t, std::vector<TimedCommand>> queue_;  // by execute_event, FIFO within
  std::map<std::string, AttachedDevice> devices_;
  std::map<std::uint64_t, MonitorPoll> monitors_;
  std::uint64_t next_monitor_id_ = 1;
  DispatchReport report_;
  std::vector<DispatchedWrite> history_;
};

/// The ACC-side command intake plus the set of ABMs it feeds.
class Executive {
 public:
  using Uplink = std::function<void(TimedCommand)>;

  explicit Executive(LeadPolicy lead = {}, WindowPolicy windows = {});

  Abm& add_abm(const std::string& name, simbus::Bus& bus);
  Abm& abm(const std::string& name);
  const std::map<std::string, std::unique_ptr<Abm>>& abms() const { return abms_; }

  const LeadPolicy& lead() const { return lead_; }
  const WindowPolicy& windows() const { return windows_; }

  /// Accepts the command iff it leaves at least min_lead_events of lead.
  /// Accepted commands are handed to the uplink, which by default delivers
  /// straight to the target ABM.
  SubmitResult submit(TimedCommand cmd, std::uint64_t now_event);

  /// Replaces the ACC->ABM transport, e.g. with one that adds latency.
  void set_uplink(Uplink uplink) { uplink_ = std::move(uplink); }

  /// Totals over the ACC intake and every ABM.
  DispatchReport report() const;

 private:
  LeadPolicy lead_;
  WindowPolicy windows_;
  std::map<std::string, std::unique_ptr<Abm>> abms_;
  Uplink uplink_;
  std::uint64_t next_id_ = 1;
  std::uint64_t accepted_ = 0;
  std::uint64_t rejected_late_ = 0;
  std::uint64_t rejected_past_ = 0;
};

}  // namespace tics::executive
