#pragma once

// Device management: naming and lifetime of device controllers, property
// access over the bus, monitors and alarms.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tics/error.hpp"
#include "tics/executive.hpp"
#include "tics/framework/registry.hpp"
#include "tics/monitor_stream.hpp"
#include "tics/simbus.hpp"
#include "tics/timebase.hpp"

namespace tics::framework {

class Manager;

/// Software side of a device. Lives on the real-time computer of its bus and
/// talks to the hardware only through that bus.
class DeviceController : public executive::AbmDevice {
 public:
  DeviceController(const DeviceSpec& spec, std::uint64_t generation) : spec_(spec), generation_(generation) {}

  const DeviceSpec& spec() const { return spec_; }

  /// Distinguishes successive instantiations of the same transient device.
  std::uint64_t generation() const { return generation_; }

  /// Runs once, right after instantiation.
  virtual void on_instantiate(Manager& /*manager*/, ArrayTime /*at*/) {}

 private:
  const DeviceSpec& spec_;
  std::uint64_t generation_;
};

using ControllerFactory = std::function<std::unique_ptr<DeviceController>(const DeviceSpec&, std::uint64_t)>;

struct DeviceHandle {
  std::string device;
  std::uint64_t id = 0;

  bool operator==(const DeviceHandle&) const = default;
};

struct Reading {
  double value = 0.0;
  ArrayTime timestamp;  // end of the poll transaction
  monitor_stream::Quality quality = monitor_stream::Quality::ok;
};

struct WriteOutcome {
  std::optional<simbus::BusTransaction> transaction;  // immediate writes
  std::optional<std::uint64_t> command_id;           // time-tagged writes
};

struct MonitorSpec {
  std::string device;
  std::string property;
  std::uint64_t period_events = 1;
  std::string channel = "monitor";
};

struct AlarmSpec {
  std::string device;
  std::string property;
  double lo = 0.0;
  double hi = 0.0;
  double hysteresis = 0.0;
};

enum class AlarmTransition { raised, cleared };

/// Threshold alarm with hysteresis. Raises when a sample leaves [lo, hi] and
/// clears once a sample is back inside [lo + hysteresis, hi - hysteresis].
class AlarmState {
 public:
  AlarmState(double lo, double hi, double hysteresis) : lo_(lo), hi_(hi), hyst_(hysteresis) {}

  std::optional<AlarmTransition> update(double value);
  bool raised() const { return raised_; }

 private:
  double lo_, hi_, hyst_;
  bool raised_ = false;
};

struct AlarmEvent {
  std::uint64_t alarm_id = 0;
  std::string device;
  std::string property;
  AlarmTransition transition = AlarmTransition::raised;
  double value = 0.0;
  std::uint64_t event_seq = 0;
  std::int64_t offset_ns = 0;
};

/// Raised by time-tagged property writes that fail the lead rule.
class CommandRejected : public Error {
 public:
  explicit CommandRejected(executive::Rejection reason);
  executive::Rejection reason() const { return reason_; }

 private:
  executive::Rejection reason_;
};

struct Environment {
  MasterClock clock;
  std::map<std::string, simbus::Bus*> buses;  // by bus name
  executive::Executive* executive = nullptr;
  monitor_stream::ChannelHub* channels = nullptr;
};

class Manager {
 public:
  Manager(const Registry& registry, Environment env);
  ~Manager();

  Manager(const Manager&) = delete;
  Manager& operator=(const Manager&) = delete;

  const Registry& registry() const { return registry_; }
  const MasterClock& clock() const { return env_.clock; }

  void register_kind(const std::string& kind, ControllerFactory factory);

  /// Instantiates every persistent device.
  void start(ArrayTime at);

  /// Attaches the monitors and alarms declared in the configuration.
  void attach_configured_monitors(std::uint64_t now_event);

  DeviceHandle resolve(std::string_view name, ArrayTime at = ArrayTime{});
  void release(const DeviceHandle& handle);

  bool instantiated(std::string_view name) const;
  std::size_t refcount(std::string_view name) const;
  DeviceController& controller(const DeviceHandle& handle);

  Reading get_property(const DeviceHandle& handle, std::string_view prop, ArrayTime at);

  /// Writes immediately when `at_event` is empty, otherwise submits a
  /// time-tagged command for that event (throws CommandRejected).
  WriteOutcome set_property(const DeviceHandle& handle, std::string_view prop, double value, ArrayTime at,
                            std::optional<std::uint64_t> at_event = std::nullopt);

  /// Direct register write, bypassing property checks. Used by controllers
  /// to program their own hardware.
  simbus::BusTransaction write_register(const DeviceSpec& dev, std::uint32_t reg, const simbus::Payload& value,
                                        ArrayTime at, bool latched = false);

  /// Command skeleton addressed at a device: ABM, node and window slot filled in.
  executive::TimedCommand make_command(const DeviceHandle& handle, std::string member,
                                       std::uint64_t execute_event) const;

  /// Submits through the executive, taking "now" as the next timing event at
  /// or after `at`. Throws CommandRejected.
  std::uint64_t submit(executive::TimedCommand cmd, ArrayTime at);

  std::uint64_t attach_monitor(const MonitorSpec& spec, std::uint64_t now_event);
  void detach_monitor(std::uint64_t id);
  std::size_t monitor_count() const { return monitors_.size(); }

  std::uint64_t attach_alarm(const AlarmSpec& spec);
  const std::vector<AlarmEvent>& alarm_events() const { return alarm_events_; }

  /// Publishes the buffered samples of one ABM, one batch per channel.
  void flush(const std::string& abm, const TimingEvent& event);

  std::uint64_t samples_collected() const;
  const std::map<std::pair<std::string, std::string>, std::unique_ptr<monitor_stream::Collector>>& collectors()
      const {
    return collectors_;
  }

 private:
  struct Instance {
    std::unique_ptr<DeviceController> controller;
    std::size_t refs = 0;
  };
  struct ActiveMonitor {
    MonitorSpec spec;
    std::string abm;
    std::uint64_t abm_monitor = 0;
  };
  struct ActiveAlarm {
    AlarmSpec spec;
    AlarmState state;
  };

  const DeviceSpec& spec_of(const DeviceHandle& handle) const;
  const PropertySpec& property_of(const DeviceSpec& dev, std::string_view prop) const;
  simbus::Bus& bus_of(const DeviceSpec& dev) const;
  const std::string& abm_of(const DeviceSpec& dev) const;
  Instance& instantiate(const DeviceSpec& spec, ArrayTime at);
  void destroy(const std::string& name);
  monitor_stream::Collector& collector(const std::string& abm, const std::string& channel);
  void on_monitor_sample(const monitor_stream::Sample& sample);

  const Registry& registry_;
  Environment env_;
  std::map<std::string, ControllerFactory> factories_;
  std::map<std::string, Instance, std::less<>> instances_;
  std::map<std::string, std::uint64_t, std::less<>> generations_;
  std::map<std::uint64_t, std::string> handles_;
  std::uint64_t next_handle_ = 1;
  std::map<std::uint64_t, ActiveMonitor> monitors_;
  std::uint64_t next_monitor_ = 1;
  std::map<std::uint64_t, ActiveAlarm> alarms_;
  std::uint64_t next_alarm_ = 1;
  std::vector<AlarmEvent> alarm_events_;
  std::map<std::pair<std::string, std::string>, std::unique_ptr<monitor_stream::Collector>> collectors_;
};

}  // namespace tics::framework
