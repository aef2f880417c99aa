#pragma once

// The simulated array: one bus and one ABM per configured bus, one hardware
// model per device, the executive, the channel hub and the device manager.
// Pulses are applied in a fixed order so a run is a pure function of its
// inputs.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tics/executive.hpp"
#include "tics/framework/hardware.hpp"
#include "tics/framework/manager.hpp"
#include "tics/framework/registry.hpp"
#include "tics/monitor_stream.hpp"
#include "tics/simbus.hpp"
#include "tics/timebase.hpp"

namespace tics::harness {

class Array {
 public:
  explicit Array(framework::Registry registry, executive::LeadPolicy lead = {});
  ~Array();

  Array(const Array&) = delete;
  Array& operator=(const Array&) = delete;

  const framework::Registry& registry() const { return registry_; }
  const MasterClock& clock() const { return clock_; }
  framework::Manager& manager() { return *manager_; }
  executive::Executive& executive() { return executive_; }
  monitor_stream::ChannelHub& channels() { return channels_; }
  simbus::Bus& bus(const std::string& name) { return *buses_.at(name); }
  const std::map<std::string, std::unique_ptr<simbus::Bus>>& buses() const { return buses_; }

  framework::Hardware& hardware(const std::string& device);
  template <class T>
  T& hardware_as(const std::string& device) {
    auto* h = dynamic_cast<T*>(&hardware(device));
    if (!h) throw UsageError(device + " has a different hardware model");
    return *h;
  }

  /// Event 0: synchronizes every clock, instantiates the persistent devices
  /// and attaches the configured monitors.
  void start();
  bool started() const { return last_event_.has_value(); }

  /// Last pulse applied.
  std::uint64_t current_event() const;

  /// Applies the next pulse everywhere. `delivered_at` is when the edge
  /// physically reaches the slaves; their time does not depend on it. With
  /// `last` set the pulse only closes the previous period: buffered samples
  /// are flushed but nothing new goes on the buses.
  TimingEvent pulse(std::optional<ArrayTime> delivered_at = std::nullopt, bool last = false);

 private:
  framework::Registry registry_;
  MasterClock clock_;
  std::map<std::string, std::unique_ptr<simbus::Bus>> buses_;
  std::map<std::string, std::unique_ptr<framework::Hardware>> hardware_;
  executive::Executive executive_;
  monitor_stream::ChannelHub channels_;
  std::unique_ptr<framework::Manager> manager_;
  std::optional<std::uint64_t> last_event_;
};

}  // namespace tics::harness
