#pragma once

// Shared helpers for the unit tests: seeded case generators and small
// configuration documents.

#include <cstdint>
#include <random>
#include <string>

#include <json.hpp>

namespace test {

inline constexpr std::uint64_t kSeed = 0x5eed'2026;

/// Deterministic random case source for property tests.
class Cases {
 public:
  explicit Cases(std::uint64_t salt = 0) : rng_(kSeed ^ (salt * 0x9E3779B97F4A7C15ull)) {}

  /// Uniform integer in [lo, hi].
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
  }
  std::uint64_t bits(int n) { return n >= 64 ? rng_() : rng_() & ((std::uint64_t{1} << n) - 1); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin() { return (rng_() & 1) != 0; }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline nlohmann::json property(const std::string& name, std::uint32_t rca, const std::string& access = "read-write",
                               nlohmann::json codec = {{"type", "unsigned"}, {"bytes", 2}},
                               nlohmann::json range = {0, 65535}, nlohmann::json monitor = nullptr) {
  return {{"name", name},     {"access", access}, {"kind", codec["type"] == "fixed" ? "fixed-point" : "integer"},
          {"units", "count"}, {"range", range},   {"rca", rca},
          {"codec", codec},   {"monitor_period_events", monitor}, {"alarm", nullptr}};
}

inline nlohmann::json fts_device(const std::string& name, const std::string& bus, int walsh, bool chirp = true,
                                 std::uint32_t node = 16) {
  using nlohmann::json;
  return {{"name", name},
          {"kind", "FTS"},
          {"lifecycle", "persistent"},
          {"bus", bus},
          {"node", node},
          {"slot", 2},
          {"params", {{"walsh_index", walsh}, {"chirp", chirp}}},
          {"properties",
           json::array({property("PHASE", 0x01, "read-write", {{"type", "unsigned"}, {"bytes", 4}}, {0, 4294967295.0}),
                        property("FREQUENCY", 0x02, "read-write", {{"type", "signed"}, {"bytes", 6}},
                                 {-140737488355328.0, 140737488355327.0}),
                        property("CHIRP", 0x03, "read-write", {{"type", "signed"}, {"bytes", 4}},
                                 {-2147483648.0, 2147483647.0}),
                        property("PHASE_SWITCH_INDEX", 0x04, "read-write", {{"type", "unsigned"}, {"bytes", 1}},
                                 {0, 63}),
                        property("STATUS", 0x10, "read-only", {{"type", "unsigned"}, {"bytes", 8}},
                                 {0, 281474976710655.0})})}};
}

inline nlohmann::json generic_device(const std::string& name, const std::string& bus, std::uint32_t node, int slot,
                                     const std::string& lifecycle = "persistent") {
  using nlohmann::json;
  return {{"name", name},
          {"kind", "Generic"},
          {"lifecycle", lifecycle},
          {"bus", bus},
          {"node", node},
          {"slot", slot},
          {"properties",
           json::array({property("SETPOINT", 0x01), property("READBACK", 0x02, "read-only"),
                        property("WORD", 0x03, "read-write", {{"type", "unsigned"}, {"bytes", 4}},
                                 {0, 4294967295.0})})}};
}

/// One antenna bus with an FTS (walsh index 5) and a generic device, plus a
/// central bus with a transient device.
inline nlohmann::json small_array() {
  using nlohmann::json;
  return {{"buses", json::array({{{"name", "ant1"}, {"abm", "abm1"}}, {{"name", "central"}, {"abm", "artm"}}})},
          {"devices", json::array({fts_device("ANT1/FTS", "ant1", 5), generic_device("ANT1/GEN", "ant1", 32, 4),
                                   generic_device("ARTM/TMP", "central", 3, 0, "transient")})}};
}

}  // namespace test
