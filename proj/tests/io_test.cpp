#include "hvacflex/io.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace hvacflex;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("hvacflex_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Io, BuildingRoundTrip) {
  std::mt19937_64 rng(3);
  auto b = sample_building(FleetConfig{}, 6, rng, "rt");
  b.zones[2].hvac = false;
  b.zones[2].p_max = 0.0;
  b.zones[1].setpoint[5] = 22.5;
  const auto j = io::to_json(b);
  const auto back = io::building_from(j, "test");
  EXPECT_EQ(io::to_json(back), j);
  EXPECT_EQ(back.coupling.entries(), b.coupling.entries());
  EXPECT_EQ(back.zones[0].capacitance, b.zones[0].capacitance);
}

TEST(Io, ScalarProfilesExpand) {
  const auto j = io::Json::parse(R"({"id": "x", "horizon": 3,
      "zones": [{"capacitance": 1, "p_max": 2, "setpoint": 24, "tolerance": [1, 2, 3]}]})");
  const auto b = io::building_from(j, "cfg");
  EXPECT_EQ(b.zones[0].setpoint, std::vector<double>(3, 24.0));
  EXPECT_EQ(b.zones[0].tolerance, (std::vector<double>{1, 2, 3}));
}

TEST(Io, InvalidBuildingsAreConfigErrors) {
  EXPECT_THROW(io::building_from(io::Json::parse(R"({"id": "x", "zones": []})"), "cfg"), io::ConfigError);
  EXPECT_THROW(io::building_from(io::Json::parse(R"({"id": "x", "horizon": 2,
      "zones": [{"capacitance": 0, "setpoint": 24, "tolerance": 1}]})"),
                                 "cfg"),
               io::ConfigError);
  EXPECT_THROW(io::building_from(io::Json::parse(R"({"id": "x", "horizon": 2,
      "zones": [{"capacitance": 1, "setpoint": [24], "tolerance": 1}]})"),
                                 "cfg"),
               io::ConfigError);
}

TEST(Io, SweepRoundTripIsExact) {
  const auto b = fixture::one_zone(3);
  const auto env = fixture::constant_envelope(3, Vector2(29, 0), Vector2(31, 0));
  const auto r = backward_sweep(b, env);
  const auto dir = scratch("sweep");
  const auto path = io::sweep_path(dir, b.id);
  io::write_json(path, io::to_json(r, b, env));
  const auto back = io::sweep_from(io::read_json(path), b, env, path.string());
  ASSERT_EQ(back.bodies.size(), r.bodies.size());
  for (std::size_t t = 0; t < r.bodies.size(); ++t) {
    EXPECT_EQ(back.bodies[t].matrix, r.bodies[t].matrix);
    EXPECT_EQ(back.bodies[t].center, r.bodies[t].center);
  }
  auto other = b;
  other.zones[0].p_max = 11.0;
  EXPECT_THROW(io::sweep_from(io::read_json(path), other, env, "x"), io::ConfigError);
}

TEST(Io, SchemaVersionIsChecked) {
  const auto dir = scratch("schema");
  std::ofstream(dir / "a.json") << R"({"schema_version": 99, "fleet": {}})";
  EXPECT_THROW(io::load_run_config((dir / "a.json").string()), io::ConfigError);
  std::ofstream(dir / "b.json") << R"({"fleet": {}})";  // version defaults to the current one
  EXPECT_EQ(io::load_run_config((dir / "b.json").string()).fleet().size(), 10);
  std::ofstream(dir / "c.json") << R"({"schema_version": 1, "fleet": {"buildings": 2, "zones": [1, 2]},
                                      "simulation": {"scenarios": 7}})";
  const auto rc = io::load_run_config((dir / "c.json").string());
  EXPECT_EQ(rc.scenarios, 7);
  EXPECT_EQ(rc.fleet().size(), 2);
  std::ofstream(dir / "d.json") << "{ not json";
  EXPECT_THROW(io::load_run_config((dir / "d.json").string()), io::ConfigError);
  EXPECT_THROW(io::load_run_config((dir / "missing.json").string()), io::ConfigError);
}

TEST(Io, FleetAndBuildingsAreExclusive) {
  const auto j = io::Json::parse(R"({"schema_version": 1, "fleet": {}, "buildings": []})");
  EXPECT_THROW(io::run_config_from(j), io::ConfigError);
  EXPECT_THROW(io::run_config_from(io::Json::parse(R"({"schema_version": 1})")), io::ConfigError);
}

TEST(Io, AtomicWriteReplacesContent) {
  const auto dir = scratch("atomic");
  io::write_atomic(dir / "f.txt", "one");
  io::write_atomic(dir / "f.txt", "two");
  std::ifstream in(dir / "f.txt");
  std::string s;
  in >> s;
  EXPECT_EQ(s, "two");
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1);
}

TEST(Io, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 123456.789}) EXPECT_EQ(std::stod(io::num(v)), v);
}
