#include "hvacflex/commands.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace hvacflex;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Causal flexibility envelopes for HVAC fleets"};
  app.set_version_flag("--version", std::string(HVACFLEX_VERSION));
  app.require_subcommand(1);

  cli::CommonOptions common;
  for (int i = 1; i < argc; ++i) common.arguments.emplace_back(argv[i]);
  std::uint64_t seed = 0;
  cli::SimulateOptions sim;
  int scenarios = 0;
  std::string policy;
  cli::BenchOptions bench;
  bench.zones.clear();

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", common.config, "JSON run configuration");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Random seed, overrides the config");
    sub->add_option("--out", common.out, "Output directory")->capture_default_str();
    sub->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--tolerance", common.tolerance, "Solver and comparison tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  };

  auto* offline = app.add_subcommand("offline", "Backward sweep for every building of the fleet");
  add_common(offline, true);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo real-time runs on stored sweeps");
  add_common(simulate, true);
  simulate->add_option("--scenarios", scenarios, "Number of scenarios, overrides the config")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--policy", policy, "uniform, extremes or constant:<f>, overrides the config");
  auto* toy = app.add_subcommand("toy", "Two-zone example with polygon exports");
  add_common(toy, false);
  auto* benchmark = app.add_subcommand("bench", "Offline and online timings by zone count");
  add_common(benchmark, false);
  benchmark->add_option("zones", bench.zones, "Zone counts (default 4 8 12 24)")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kInputError;
  }

  for (auto* sub : {offline, simulate, toy, benchmark}) {
    if (sub->count("--seed")) common.seed = seed;
  }
  if (simulate->count("--scenarios")) sim.scenarios = scenarios;
  if (simulate->count("--policy")) sim.policy = policy;

  try {
    fs::create_directories(common.out);
  } catch (const std::exception& e) {
    log::error("cannot create output directory '", common.out, "': ", e.what());
    return cli::kInputError;
  }

  if (*offline) return cli::cmd_offline(common);
  if (*simulate) return cli::cmd_simulate(common, sim);
  if (*toy) return cli::cmd_toy(common);
  return cli::cmd_bench(common, bench);
}
