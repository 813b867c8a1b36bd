#include "hvacflex/commands.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

using namespace hvacflex;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("hvacflex_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

constexpr const char* kTwoBuildings = R"({
  "schema_version": 1,
  "seed": 4,
  "fleet": {"buildings": 2, "zones": [2, 3], "horizon": 6},
  "simulation": {"scenarios": 3, "policy": "uniform"}
})";

constexpr const char* kUndersized = R"({
  "schema_version": 1,
  "buildings": [{
    "id": "hot", "horizon": 2,
    "zones": [{"capacitance": 2, "r_out": 2, "eta_ac": 3, "p_max": 1, "setpoint": 24, "tolerance": 0}],
    "envelope": {"lower": [[40, 0], [40, 0]], "upper": [[41, 0], [41, 0]]}
  }]
})";

cli::CommonOptions options(const fs::path& dir, const char* config_text) {
  cli::CommonOptions o;
  o.out = (dir / "out").string();
  if (config_text) {
    o.config = (dir / "config.json").string();
    std::ofstream(o.config) << config_text;
  }
  return o;
}

int run_binary(const std::string& args) {
  const int status = std::system((std::string(HVACFLEX_CLI) + " " + args + " 2>/dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, OfflineThenSimulate) {
  const auto dir = scratch("fleet");
  auto o = options(dir, kTwoBuildings);
  ASSERT_EQ(cli::cmd_offline(o), cli::kOk);
  const fs::path out = o.out;
  ASSERT_TRUE(fs::exists(out / "sweeps" / "b0.json"));
  ASSERT_TRUE(fs::exists(out / "sweeps" / "b1.json"));
  const auto manifest = io::read_json(out / "manifest_offline.json");
  EXPECT_EQ(manifest["files"].size(), 2u);
  EXPECT_EQ(manifest["schema_version"], io::kSchemaVersion);

  const std::string first = slurp(out / "sweeps" / "b0.json");
  ASSERT_EQ(cli::cmd_offline(o), cli::kOk);
  EXPECT_EQ(slurp(out / "sweeps" / "b0.json"), first);

  cli::SimulateOptions so;
  so.scenarios = 1;
  so.policy = "constant:0.5";
  ASSERT_EQ(cli::cmd_simulate(o, so), cli::kOk);
  std::ifstream in(out / "trace_fleet.csv");
  std::string line;
  int causal = 0;
  while (std::getline(in, line)) causal += line.find(",causal,") != std::string::npos ? 1 : 0;
  EXPECT_EQ(causal, 6);
  const auto metrics = io::read_json(out / "metrics.json");
  EXPECT_EQ(metrics["causal"]["infeasible_ratio"], 0.0);
  EXPECT_EQ(metrics["policy"], "constant:0.5");
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("codes");
  EXPECT_EQ(cli::cmd_offline(options(dir, kUndersized)), cli::kInfeasible);
  EXPECT_EQ(cli::cmd_offline(options(dir, nullptr)), cli::kInputError);
  EXPECT_EQ(cli::cmd_offline(options(dir, "{ broken")), cli::kInputError);

  const auto fresh = scratch("nosweeps");
  EXPECT_EQ(cli::cmd_simulate(options(fresh, kTwoBuildings), {}), cli::kInputError);
  cli::SimulateOptions bad;
  bad.policy = "sideways";
  EXPECT_EQ(cli::cmd_simulate(options(fresh, kTwoBuildings), bad), cli::kInputError);
}

TEST(Cli, Toy) {
  const auto dir = scratch("toy");
  auto o = options(dir, nullptr);
  ASSERT_EQ(cli::cmd_toy(o), cli::kOk);
  for (int t = 1; t <= 4; ++t) EXPECT_TRUE(fs::exists(fs::path(o.out) / ("toy_period_" + std::to_string(t) + ".csv")));
  const auto report = io::read_json(fs::path(o.out) / "toy_report.json");
  EXPECT_TRUE(report["passed"].get<bool>());
  EXPECT_EQ(report["causal_first_infeasible_period"], 0);
  EXPECT_GE(report["myopic_first_infeasible_period"].get<int>(), 1);
}

TEST(Cli, Bench) {
  const auto dir = scratch("bench");
  auto o = options(dir, nullptr);
  cli::BenchOptions b;
  b.zones = {1, 3};
  ASSERT_EQ(cli::cmd_bench(o, b), cli::kOk);
  std::ifstream in(fs::path(o.out) / "bench.csv");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) rows += (line.rfind("1,ok", 0) == 0 || line.rfind("3,ok", 0) == 0) ? 1 : 0;
  EXPECT_EQ(rows, 2);
}

TEST(Cli, BinaryExitCodes) {
  const auto dir = scratch("binary");
  EXPECT_EQ(run_binary("--help >/dev/null"), 0);
  EXPECT_EQ(run_binary("offline --config " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(run_binary("simulate --config x.json --scenarios -1"), 2);
  EXPECT_EQ(run_binary("frobnicate"), 2);
  EXPECT_EQ(run_binary("toy --out " + (dir / "toy").string()), 0);
  std::ofstream(dir / "hot.json") << kUndersized;
  EXPECT_EQ(run_binary("offline --config " + (dir / "hot.json").string() + " --out " + (dir / "o").string()), 3);
}
