#include "tics/harness/checks.hpp"

#include <iomanip>

#include "tics/error.hpp"
#include "tics/fts/controller.hpp"

namespace tics::harness {

std::vector<int> configured_indices(const framework::Registry& registry, std::size_t n) {
  std::vector<int> out;
  for (const auto& d : registry.devices()) {
    if (out.size() == n) break;
    if (d.kind == fts::kKind) out.push_back(static_cast<int>(d.int_param("walsh_index", 0)));
  }
  if (out.size() < n) {
    throw UsageError("configuration has " + std::to_string(out.size()) + " synthesizers, " + std::to_string(n) +
                     " requested");
  }
  return out;
}

OrthogonalityTable check_orthogonality(const std::vector<int>& indices) {
  OrthogonalityTable t;
  t.indices = indices;
  std::vector<fts::PhaseSwitchPattern> patterns;
  patterns.reserve(indices.size());
  for (int k : indices) patterns.push_back(fts::build_pattern(k));

  const fts::GaussianInt full{static_cast<std::int64_t>(fts::kPatternSlots), 0};
  for (std::size_t a = 0; a < indices.size(); ++a) {
    for (std::size_t b = 0; b < indices.size(); ++b) {
      const auto sum = fts::cross_demod(patterns[a], patterns[b]);
      t.entries.push_back({indices[a], indices[b], sum});
      if (a == b) {
        if (sum == full) ++t.diagonal_full;
      } else {
        ++t.off_diagonal_total;
        if (sum == fts::GaussianInt{}) ++t.off_diagonal_zero;
      }
    }
  }
  return t;
}

OrthogonalityTable check_orthogonality(std::size_t n, const framework::Registry* registry) {
  if (n < 1 || n >= fts::kFastSlots) throw DomainError("antenna count must be in 1..63");
  if (registry) return check_orthogonality(configured_indices(*registry, n));
  std::vector<int> indices;
  for (std::size_t k = 1; k <= n; ++k) indices.push_back(static_cast<int>(k));
  return check_orthogonality(indices);
}

void print(std::ostream& out, const OrthogonalityTable& table, bool full) {
  if (full) {
    out << "a,b,re,im\n";
    for (const auto& e : table.entries) {
      out << e.index_a << ',' << e.index_b << ',' << e.sum.re << ',' << e.sum.im << '\n';
    }
  }
  out << "antennas: " << table.indices.size() << '\n'
      << "off-diagonal zero: " << table.off_diagonal_zero << " / " << table.off_diagonal_total << '\n'
      << "diagonal == " << fts::kPatternSlots << ": " << table.diagonal_full << " / " << table.indices.size()
      << '\n'
      << (table.passed() ? "PASS" : "FAIL") << '\n';
}

ThroughputResult throughput(std::size_t dlc, const simbus::BusModel& model) {
  if (dlc > simbus::kMaxPayload) throw DomainError("dlc must be in 0..8");
  return {dlc, simbus::max_polled_ops_per_second(model, dlc)};
}

}  // namespace tics::harness
