// Command-line front end: simulation runs and the verification checks.

#include <chrono>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "tics/error.hpp"
#include "tics/harness/checks.hpp"
#include "tics/harness/run.hpp"

namespace {

using namespace tics;

int cmd_run(const std::string& config, const std::string& scenario_path, std::optional<double> duration,
            std::optional<std::uint64_t> seed, const std::string& out) {
  const auto registry = framework::Registry::load_file(config);
  harness::Scenario scenario;
  if (!scenario_path.empty()) scenario = harness::Scenario::load_file(scenario_path);
  if (duration) {
    if (!(*duration > 0.0)) throw ConfigError("--duration", "must be positive");
    scenario.duration = Nanos(static_cast<std::int64_t>(*duration * 1e9 + 0.5));
  }
  if (seed) scenario.seed = *seed;
  scenario.validate();

  const auto report = harness::run_to_directory(registry, scenario, out);
  std::cout << "events: " << report.last_event << '\n'
            << "commands accepted: " << report.dispatch.accepted << ", rejected late: " << report.dispatch.rejected_late
            << ", rejected past: " << report.dispatch.rejected_past << '\n'
            << "samples collected: " << report.samples_collected << ", archived: " << report.records_archived << '\n';
  for (const auto& [name, b] : report.buses) {
    std::cout << "bus " << name << ": max occupancy " << std::fixed << std::setprecision(3)
              << b.max_period_occupancy.count() / 1e6 << " ms per period\n";
  }
  std::cout << "violations: " << report.violations << '\n'
            << "wall clock: " << std::setprecision(3) << report.wall_seconds << " s\n";
  return report.passed() ? 0 : 1;
}

int cmd_orthogonality(std::size_t antennas, const std::string& config, bool table) {
  const auto start = std::chrono::steady_clock::now();
  std::optional<framework::Registry> registry;
  if (!config.empty()) registry = framework::Registry::load_file(config);
  const auto result = harness::check_orthogonality(antennas, registry ? &*registry : nullptr);
  harness::print(std::cout, result, table);
  std::cout << "wall clock: " << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()
            << " s\n";
  return result.passed() ? 0 : 1;
}

int cmd_throughput(std::size_t dlc) {
  const auto r = harness::throughput(dlc);
  std::cout << "dlc " << r.dlc << ": " << std::fixed << std::setprecision(2) << r.ops_per_second.value()
            << " polled ops/s (" << r.ops_per_second.num << "/" << r.ops_per_second.den << "), required "
            << harness::kRequiredOpsPerSecond << ": " << (r.passed() ? "PASS" : "FAIL") << '\n';
  return r.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Array control simulator"};
  app.require_subcommand(1);

  std::string config, scenario, out;
  std::optional<double> duration;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run a scenario and write archive.csv and report.json");
  run->add_option("--config", config, "Array configuration (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--scenario", scenario, "Scenario file (JSON)")->check(CLI::ExistingFile);
  run->add_option("--duration", duration, "Simulated seconds, overrides the scenario");
  run->add_option("--seed", seed, "Jitter seed, overrides the scenario");
  run->add_option("--out", out, "Output directory")->required();

  std::size_t antennas = 0;
  std::string ortho_config;
  bool table = false;
  auto* ortho = app.add_subcommand("check-orthogonality", "Cross-demodulate the switching patterns pairwise");
  ortho->add_option("--antennas", antennas, "Number of antennas (1..63)")->required();
  ortho->add_option("--config", ortho_config, "Take walsh indices from this configuration")
      ->check(CLI::ExistingFile);
  ortho->add_flag("--table", table, "Print every pair");

  std::size_t dlc = 0;
  auto* tput = app.add_subcommand("throughput", "Polled operations per second at a payload size");
  tput->add_option("--dlc", dlc, "Payload bytes (0..8)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, scenario, duration, seed, out);
    if (*ortho) return cmd_orthogonality(antennas, ortho_config, table);
    if (*tput) return cmd_throughput(dlc);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Overcommitted& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
