#pragma once

// Configuration database: the validated set of buses, devices and properties
// the array is built from. See docs/config-schema.md for the file format.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tics/framework/codec.hpp"
#include "tics/timebase.hpp"

namespace tics::framework {

enum class Access { read_only, read_write };
enum class ValueKind { integer, fixed_point, enumeration };
enum class Lifecycle { persistent, transient };

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  bool operator==(const Range&) const = default;
};

struct AlarmLimits {
  double lo = 0.0;
  double hi = 0.0;
  double hysteresis = 0.0;

  bool operator==(const AlarmLimits&) const = default;
};

struct PropertySpec {
  std::string name;
  Access access = Access::read_only;
  ValueKind kind = ValueKind::integer;
  std::string units;
  Range range;
  std::uint32_t rca = 0;
  Codec codec;
  std::optional<std::uint64_t> monitor_period_events;
  std::optional<AlarmLimits> alarm;
  double initial = 0.0;  // register content at power-up

  bool writable() const { return access == Access::read_write; }
  bool operator==(const PropertySpec&) const = default;
};

struct DeviceSpec {
  std::string name;  // hierarchical, e.g. "ANT1/FTS"
  std::string kind;
  Lifecycle lifecycle = Lifecycle::persistent;
  std::string bus;
  std::uint32_t node = 0;
  int slot = 0;  // dispatch window within each timing period
  std::optional<std::string> parent;
  nlohmann::json params = nlohmann::json::object();
  std::vector<PropertySpec> properties;

  const PropertySpec* property(std::string_view name) const;

  /// Integer device parameter, or `fallback` if absent.
  std::int64_t int_param(const std::string& key, std::int64_t fallback) const;

  bool operator==(const DeviceSpec&) const = default;
};

struct BusSpec {
  std::string name;
  std::string abm;  // real-time computer mastering the bus

  bool operator==(const BusSpec&) const = default;
};

class Registry {
 public:
  /// Validates a parsed document. Throws ConfigError naming the offending path.
  static Registry load(const nlohmann::json& doc);
  static Registry parse(std::string_view text);
  static Registry load_file(const std::filesystem::path& path);

  /// Canonical document; load(emit()) reproduces the registry.
  nlohmann::json emit() const;

  ArrayTime epoch() const { return epoch_; }
  const std::vector<BusSpec>& buses() const { return buses_; }
  const std::vector<DeviceSpec>& devices() const { return devices_; }

  const DeviceSpec* find(std::string_view name) const;
  const BusSpec* find_bus(std::string_view name) const;

  /// Throws NameNotFound.
  const DeviceSpec& device(std::string_view name) const;

  std::size_t property_count() const;

  bool operator==(const Registry&) const = default;

 private:
  ArrayTime epoch_;
  std::vector<BusSpec> buses_;
  std::vector<DeviceSpec> devices_;
};

std::string_view to_string(Access a);
std::string_view to_string(ValueKind k);
std::string_view to_string(Lifecycle l);

}  // namespace tics::framework
