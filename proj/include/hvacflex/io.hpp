#pragma once

// JSON configs and sweep files, CSV exports, run manifests.
//
// Every JSON document carries "schema_version"; CSV files start with a
// "# hvacflex <kind> schema_version=<n>" comment line.

#include "hvacflex/fleet.hpp"
#include "hvacflex/reachability.hpp"
#include "hvacflex/simulation.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hvacflex::io {

using Json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Small helpers

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

/// Writes to a sibling temporary file and renames it into place.
inline void write_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

inline void write_json(const fs::path& path, const Json& j) { write_atomic(path, j.dump(2) + "\n"); }

/// Round-trip formatting for CSV cells.
inline std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

template <typename T>
T field(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(where + ": bad \"" + key + "\": " + e.what());
  }
}

template <typename T>
T field_or(const Json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? field<T>(j, key, where) : fallback;
}

inline void check_schema(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  const int v = field_or<int>(j, "schema_version", kSchemaVersion, where);
  if (v != kSchemaVersion) {
    throw ConfigError(where + ": schema_version " + std::to_string(v) + " (this build reads " +
                      std::to_string(kSchemaVersion) + ")");
  }
}

inline Json to_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

inline Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Vector(m.row(r).transpose())));
  return rows;
}

inline Vector vector_from(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(where + ": expected an array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline Matrix matrix_from(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Matrix m(rows, rows ? static_cast<Eigen::Index>(j[0].size()) : 0);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vector row = vector_from(j[r], where);
    if (row.size() != m.cols()) throw ConfigError(where + ": ragged matrix");
    m.row(r) = row.transpose();
  }
  return m;
}

// ---------------------------------------------------------------------------
// Buildings and envelopes

inline Json to_json(const BuildingModel& b) {
  Json zones = Json::array();
  for (const auto& z : b.zones) {
    zones.push_back({{"capacitance", z.capacitance},
                     {"r_out", z.r_out},
                     {"eta_rad", z.eta_rad},
                     {"eta_ac", z.eta_ac},
                     {"ambient", z.ambient},
                     {"solar", z.solar},
                     {"hvac", z.hvac},
                     {"p_min", z.p_min},
                     {"p_max", z.p_max},
                     {"setpoint", z.setpoint},
                     {"tolerance", z.tolerance}});
  }
  Json coupling = Json::array();
  for (const auto& [ij, r] : b.coupling.entries()) {
    if (ij.first < ij.second) coupling.push_back({ij.first, ij.second, r});
  }
  return {{"id", b.id}, {"horizon", b.horizon}, {"dt", b.dt}, {"zones", zones}, {"coupling", coupling}};
}

/// A profile is either one number (constant) or one value per period.
inline std::vector<double> profile_from(const Json& z, const char* key, int horizon, const std::string& where) {
  if (!z.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  const Json& p = z.at(key);
  if (p.is_number()) return std::vector<double>(static_cast<std::size_t>(horizon), p.get<double>());
  const Vector v = vector_from(p, where + "." + key);
  if (v.size() != horizon) throw ConfigError(where + ": \"" + key + "\" needs one value per period");
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline BuildingModel building_from(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  BuildingModel b;
  b.id = field<std::string>(j, "id", where);
  b.horizon = field_or<int>(j, "horizon", 24, where);
  b.dt = field_or<double>(j, "dt", 1.0, where);
  if (b.horizon < 1) throw ConfigError(where + ": horizon must be at least 1");
  const Json zones = field<Json>(j, "zones", where);
  if (!zones.is_array() || zones.empty()) throw ConfigError(where + ": \"zones\" must be a nonempty array");
  for (std::size_t i = 0; i < zones.size(); ++i) {
    const std::string zw = where + ".zones[" + std::to_string(i) + "]";
    const Json& z = zones[i];
    ZoneParams p;
    p.capacitance = field<double>(z, "capacitance", zw);
    p.r_out = field_or<double>(z, "r_out", 1.0, zw);
    p.eta_rad = field_or<double>(z, "eta_rad", 0.0, zw);
    p.eta_ac = field_or<double>(z, "eta_ac", 1.0, zw);
    p.ambient = field_or<bool>(z, "ambient", true, zw);
    p.solar = field_or<bool>(z, "solar", p.eta_rad != 0.0, zw);
    p.hvac = field_or<bool>(z, "hvac", true, zw);
    p.p_min = field_or<double>(z, "p_min", 0.0, zw);
    p.p_max = field_or<double>(z, "p_max", 0.0, zw);
    p.setpoint = profile_from(z, "setpoint", b.horizon, zw);
    p.tolerance = profile_from(z, "tolerance", b.horizon, zw);
    b.zones.push_back(std::move(p));
  }
  const Json coupling = field_or<Json>(j, "coupling", Json::array(), where);
  for (const auto& e : coupling) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() || !e[2].is_number()) {
      throw ConfigError(where + ": coupling entries are [i, j, R_in]");
    }
    b.coupling.connect(e[0].get<int>(), e[1].get<int>(), e[2].get<double>());
  }
  const auto report = validate_building(b);
  if (!report.empty()) throw ConfigError(where + ": invalid building\n" + describe(report));
  return b;
}

inline Json to_json(const ExogenousEnvelope& env) {
  Json lower = Json::array(), upper = Json::array();
  for (int t = 0; t < env.periods(); ++t) {
    lower.push_back({env.lower[t](0), env.lower[t](1)});
    upper.push_back({env.upper[t](0), env.upper[t](1)});
  }
  return {{"lower", lower}, {"upper", upper}};
}

inline ExogenousEnvelope envelope_from(const Json& j, int horizon, const std::string& where) {
  ExogenousEnvelope env;
  for (const char* side : {"lower", "upper"}) {
    const Json rows = field<Json>(j, side, where);
    if (!rows.is_array()) throw ConfigError(where + ": \"" + side + "\" must be an array of [T_out, Q] pairs");
    for (const auto& r : rows) {
      const Vector v = vector_from(r, where + "." + side);
      if (v.size() != 2) throw ConfigError(where + ": envelope entries are [T_out, Q] pairs");
      (std::string(side) == "lower" ? env.lower : env.upper).emplace_back(v(0), v(1));
    }
  }
  const auto report = validate_envelope(env, horizon);
  if (!report.empty()) throw ConfigError(where + ": invalid envelope\n" + describe(report));
  return env;
}

// ---------------------------------------------------------------------------
// Run configuration

inline Range range_from(const Json& j, const char* key, Range fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const Vector v = vector_from(j.at(key), where + "." + key);
  if (v.size() != 2) throw ConfigError(where + ": \"" + key + "\" must be [lo, hi]");
  return {v(0), v(1)};
}

inline FleetConfig fleet_config_from(const Json& j, const std::string& where) {
  FleetConfig c;
  c.buildings = field_or<int>(j, "buildings", c.buildings, where);
  if (j.contains("zones")) {
    const Vector z = vector_from(j.at("zones"), where + ".zones");
    if (z.size() != 2) throw ConfigError(where + ": \"zones\" must be [min, max]");
    c.zones_min = static_cast<int>(z(0));
    c.zones_max = static_cast<int>(z(1));
  }
  c.extra_edges = field_or<int>(j, "extra_edges", c.extra_edges, where);
  c.horizon = field_or<int>(j, "horizon", c.horizon, where);
  c.dt = field_or<double>(j, "dt", c.dt, where);
  c.outdoor_halfwidth = field_or<double>(j, "outdoor_halfwidth", c.outdoor_halfwidth, where);
  c.solar_halfwidth = field_or<double>(j, "solar_halfwidth", c.solar_halfwidth, where);
  if (j.contains("outdoor_forecast")) {
    const Vector v = vector_from(j.at("outdoor_forecast"), where + ".outdoor_forecast");
    c.outdoor_forecast.assign(v.data(), v.data() + v.size());
  }
  if (j.contains("solar_forecast")) {
    const Vector v = vector_from(j.at("solar_forecast"), where + ".solar_forecast");
    c.solar_forecast.assign(v.data(), v.data() + v.size());
  }
  const Json r = field_or<Json>(j, "ranges", Json::object(), where);
  const std::string rw = where + ".ranges";
  auto& g = c.ranges;
  g.capacitance = range_from(r, "capacitance", g.capacitance, rw);
  g.r_out = range_from(r, "r_out", g.r_out, rw);
  g.eta_rad = range_from(r, "eta_rad", g.eta_rad, rw);
  g.eta_ac = range_from(r, "eta_ac", g.eta_ac, rw);
  g.p_min = range_from(r, "p_min", g.p_min, rw);
  g.p_max = range_from(r, "p_max", g.p_max, rw);
  g.setpoint = range_from(r, "setpoint", g.setpoint, rw);
  g.tolerance = range_from(r, "tolerance", g.tolerance, rw);
  g.r_in = range_from(r, "r_in", g.r_in, rw);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return c;
}

struct RunConfig {
  std::uint64_t seed = 1;
  std::optional<FleetConfig> generator;  // random fleet, or
  Fleet explicit_fleet;                  // buildings listed in the file
  int scenarios = 500;
  std::string policy = "uniform";

  Fleet fleet() const {
    if (!generator) return explicit_fleet;
    FleetConfig c = *generator;
    c.seed = seed;
    return sample_fleet(c);
  }
};

/// Either "fleet" (generator settings) or "buildings" (explicit models, each
/// with its own "envelope").
inline RunConfig run_config_from(const Json& j, const std::string& where = "config") {
  check_schema(j, where);
  RunConfig rc;
  rc.seed = field_or<std::uint64_t>(j, "seed", rc.seed, where);
  const bool gen = j.contains("fleet"), listed = j.contains("buildings");
  if (gen == listed) throw ConfigError(where + ": give exactly one of \"fleet\" and \"buildings\"");
  if (gen) {
    rc.generator = fleet_config_from(j.at("fleet"), where + ".fleet");
  } else {
    const Json& bs = j.at("buildings");
    if (!bs.is_array() || bs.empty()) throw ConfigError(where + ": \"buildings\" must be a nonempty array");
    for (std::size_t k = 0; k < bs.size(); ++k) {
      const std::string bw = where + ".buildings[" + std::to_string(k) + "]";
      auto b = building_from(bs[k], bw);
      auto env = envelope_from(field<Json>(bs[k], "envelope", bw), b.horizon, bw + ".envelope");
      if (!rc.explicit_fleet.buildings.empty() && b.horizon != rc.explicit_fleet.buildings.front().horizon) {
        throw ConfigError(bw + ": all buildings must share the horizon");
      }
      for (const auto& other : rc.explicit_fleet.buildings) {
        if (other.id == b.id) throw ConfigError(bw + ": duplicate building id '" + b.id + "'");
      }
      rc.explicit_fleet.buildings.push_back(std::move(b));
      rc.explicit_fleet.envelopes.push_back(std::move(env));
    }
  }
  const Json sim = field_or<Json>(j, "simulation", Json::object(), where);
  rc.scenarios = field_or<int>(sim, "scenarios", rc.scenarios, where + ".simulation");
  rc.policy = field_or<std::string>(sim, "policy", rc.policy, where + ".simulation");
  return rc;
}

inline RunConfig load_run_config(const fs::path& path) { return run_config_from(read_json(path), path.string()); }

// ---------------------------------------------------------------------------
// Sweep files

inline Json to_json(const StepDiagnostics& d) {
  return {{"period", d.period},         {"status", std::string(lp::to_string(d.status))},
          {"trace", d.trace},           {"iterations", d.iterations},
          {"rows", d.rows},             {"columns", d.columns},
          {"lp_violation", d.lp_violation}, {"certificate_residual", d.certificate_residual}};
}

/// Solve times are left out so that files from repeated runs compare equal.
inline Json to_json(const ReachableApprox& r, const BuildingModel& b, const ExogenousEnvelope& env) {
  Json bodies = Json::array();
  for (const auto& body : r.bodies) bodies.push_back({{"matrix", to_json(body.matrix)}, {"center", to_json(body.center)}});
  Json diag = Json::array();
  for (const auto& d : r.diagnostics) diag.push_back(to_json(d));
  return {{"schema_version", kSchemaVersion},
          {"kind", "reachable_sweep"},
          {"building", to_json(b)},
          {"envelope", to_json(env)},
          {"bodies", bodies},
          {"diagnostics", diag}};
}

inline ReachableApprox sweep_from(const Json& j, const BuildingModel& expect_building,
                                  const ExogenousEnvelope& expect_env, const std::string& where) {
  check_schema(j, where);
  if (j.value("kind", "") != "reachable_sweep") throw ConfigError(where + ": not a sweep file");
  if (field<Json>(j, "building", where) != to_json(expect_building) ||
      field<Json>(j, "envelope", where) != to_json(expect_env)) {
    throw ConfigError(where + ": sweep was computed for a different building or envelope than the config describes");
  }
  ReachableApprox r;
  r.building = expect_building.id;
  const Json bodies = field<Json>(j, "bodies", where);
  if (!bodies.is_array() || static_cast<int>(bodies.size()) != expect_building.horizon + 1) {
    throw ConfigError(where + ": expected one body per period boundary");
  }
  const int n = expect_building.zone_count();
  for (const auto& bj : bodies) {
    AffineBody body{matrix_from(field<Json>(bj, "matrix", where), where), vector_from(field<Json>(bj, "center", where), where)};
    if (body.dimension() != n || body.matrix.rows() != n || body.matrix.cols() != n) {
      throw ConfigError(where + ": body dimension differs from zone count");
    }
    r.bodies.push_back(std::move(body));
  }
  r.diagnostics.resize(static_cast<std::size_t>(expect_building.horizon));
  return r;
}

inline fs::path sweep_path(const fs::path& out_dir, const std::string& building_id) {
  return out_dir / "sweeps" / (building_id + ".json");
}

// ---------------------------------------------------------------------------
// CSV exports

inline std::string csv_header(const std::string& kind) {
  return "# hvacflex " + kind + " schema_version=" + std::to_string(kSchemaVersion) + "\n";
}

/// One row per scenario, method, period and building.
inline void append_building_rows(std::ostringstream& os, int scenario, const SimulationTrace& tr, const Fleet& fleet,
                                 const std::vector<std::vector<FleetInterval>>* hindsight) {
  for (std::size_t p = 0; p < tr.periods.size(); ++p) {
    const auto& rec = tr.periods[p];
    for (std::size_t k = 0; k < rec.buildings.size(); ++k) {
      const auto& s = rec.buildings[k];
      os << scenario << ',' << to_string(tr.method) << ',' << rec.period << ',' << fleet.buildings[k].id << ','
         << (s.empty_interval ? 1 : 0) << ',' << num(s.lo) << ',' << num(s.hi) << ',' << num(s.power.sum()) << ','
         << num(s.temperature.minCoeff()) << ',' << num(s.temperature.maxCoeff()) << ',' << num(s.violation);
      if (hindsight) os << ',' << num((*hindsight)[p][k].lo) << ',' << num((*hindsight)[p][k].hi);
      else os << ",,";
      os << '\n';
    }
  }
}

inline const char* kBuildingColumns =
    "scenario,method,period,building,empty_interval,lo_kw,hi_kw,power_kw,temp_min_c,temp_max_c,violation,"
    "hindsight_lo_kw,hindsight_hi_kw\n";

/// One row per scenario, method and period.
inline void append_fleet_rows(std::ostringstream& os, int scenario, const SimulationTrace& tr,
                              const std::vector<std::vector<FleetInterval>>* hindsight) {
  for (std::size_t p = 0; p < tr.periods.size(); ++p) {
    const auto& rec = tr.periods[p];
    double hlo = 0.0, hhi = 0.0;
    if (hindsight) {
      for (const auto& iv : (*hindsight)[p]) {
        hlo += iv.lo;
        hhi += iv.hi;
      }
    }
    os << scenario << ',' << to_string(tr.method) << ',' << rec.period << ',' << num(rec.lo) << ',' << num(rec.hi)
       << ',' << num(rec.signal) << ',' << num(rec.lambda) << ',' << num(rec.achieved) << ','
       << num(rec.tracking_error) << ',' << (rec.feasible ? 1 : 0);
    if (hindsight) os << ',' << num(hlo) << ',' << num(hhi);
    else os << ",,";
    os << '\n';
  }
}

inline const char* kFleetColumns =
    "scenario,method,period,lo_kw,hi_kw,signal_kw,lambda,achieved_kw,tracking_error_kw,feasible,"
    "hindsight_lo_kw,hindsight_hi_kw\n";

inline Json to_json(const Metrics& m) {
  auto maybe = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  return {{"scenarios", m.scenarios},
          {"infeasible_scenarios", m.infeasible_scenarios},
          {"infeasible_ratio", m.infeasible_ratio},
          {"violations", m.violations},
          {"empty_intervals", m.empty_intervals},
          {"area_kwh", m.area},
          {"hindsight_area_kwh", maybe(m.hindsight_area)},
          {"flexibility_ratio", maybe(m.ratio)},
          {"max_tracking_error_kw", m.max_tracking_error},
          {"mean_lo_kw", m.mean_lo},
          {"mean_hi_kw", m.mean_hi}};
}

// ---------------------------------------------------------------------------
// Manifests

struct RunManifest {
  std::string command;
  std::string config;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::vector<std::string> arguments;
  std::vector<std::string> files;  // relative to out_dir
  Json timings = Json::object();   // seconds

  Json to_json() const {
    return {{"schema_version", kSchemaVersion},
            {"kind", "manifest"},
            {"tool", "hvacflex"},
            {"version", HVACFLEX_VERSION},
            {"command", command},
            {"config", config},
            {"seed", seed},
            {"out", out_dir},
            {"arguments", arguments},
            {"files", files},
            {"timings_s", timings}};
  }
};

inline void write_manifest(const fs::path& out_dir, const RunManifest& m) {
  write_json(out_dir / ("manifest_" + m.command + ".json"), m.to_json());
}

}  // namespace hvacflex::io
