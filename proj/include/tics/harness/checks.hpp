#pragma once

// Verification commands of the CLI.

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "tics/framework/registry.hpp"
#include "tics/fts/walsh.hpp"
#include "tics/simbus.hpp"

namespace tics::harness {

struct OrthogonalityEntry {
  int index_a = 0;  // walsh indices
  int index_b = 0;
  fts::GaussianInt sum;
};

struct OrthogonalityTable {
  std::vector<int> indices;
  std::vector<OrthogonalityEntry> entries;  // all ordered pairs, diagonal included
  std::size_t off_diagonal_zero = 0;
  std::size_t off_diagonal_total = 0;
  std::size_t diagonal_full = 0;  // diagonal entries equal to the slot count

  bool passed() const {
    return off_diagonal_zero == off_diagonal_total && diagonal_full == indices.size();
  }
};

/// Walsh indices of the first n synthesizers in configuration order.
/// Throws UsageError if the configuration has fewer.
std::vector<int> configured_indices(const framework::Registry& registry, std::size_t n);

/// cross_demod over every ordered pair of `indices`.
OrthogonalityTable check_orthogonality(const std::vector<int>& indices);

/// Indices 1..n, or the first n configured ones. Throws DomainError unless 1 <= n <= 63.
OrthogonalityTable check_orthogonality(std::size_t n, const framework::Registry* registry = nullptr);

void print(std::ostream& out, const OrthogonalityTable& table, bool full);

inline constexpr double kRequiredOpsPerSecond = 2000.0;

struct ThroughputResult {
  std::size_t dlc = 0;
  simbus::Rational ops_per_second;
  bool passed() const { return ops_per_second.value() >= kRequiredOpsPerSecond; }
};

/// Throws DomainError for dlc > 8.
ThroughputResult throughput(std::size_t dlc, const simbus::BusModel& model = {});

}  // namespace tics::harness
