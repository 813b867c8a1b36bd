#pragma once

// Random fleets and Monte Carlo scenarios.
//
// The default parameter ranges are invented plausible values for small office
// zones under daytime cooling; they are not taken from any published table.

#include "hvacflex/polytope.hpp"
#include "hvacflex/reachability.hpp"
#include "hvacflex/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hvacflex {

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  bool ordered() const { return std::isfinite(lo) && std::isfinite(hi) && lo <= hi; }
  double draw(std::mt19937_64& rng) const {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }
};

struct ZoneRanges {
  Range capacitance{1.5, 3.0};  // kWh/°C
  Range r_out{2.0, 4.0};        // °C/kW
  Range eta_rad{1.0, 3.0};      // kW per kW/m²
  Range eta_ac{2.5, 3.5};
  Range p_min{0.0, 0.0};        // kW
  Range p_max{4.0, 8.0};        // kW
  Range setpoint{24.0, 24.0};   // °C, constant over the day
  Range tolerance{1.5, 2.5};    // °C
  Range r_in{1.0, 3.0};         // °C/kW between adjacent zones
};

struct FleetConfig {
  int buildings = 10;
  int zones_min = 4;
  int zones_max = 12;
  int extra_edges = 1;  // coupling edges beyond the random spanning tree
  ZoneRanges ranges;
  std::vector<double> outdoor_forecast;  // °C per period; empty: default_outdoor
  std::vector<double> solar_forecast;    // kW/m² per period; empty: default_solar
  double outdoor_halfwidth = 1.0;        // °C
  double solar_halfwidth = 0.05;         // kW/m²
  int horizon = 24;
  double dt = 1.0;  // hours
  std::uint64_t seed = 1;

  void validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("FleetConfig: " + m); };
    if (buildings < 1) fail("need at least one building");
    if (zones_min < 1 || zones_min > zones_max) fail("zone-count range must satisfy 1 <= min <= max");
    if (extra_edges < 0) fail("extra_edges must be nonnegative");
    if (horizon < 1) fail("horizon must be at least 1");
    if (!(dt > 0.0)) fail("dt must be positive");
    if (!(outdoor_halfwidth >= 0.0) || !(solar_halfwidth >= 0.0)) fail("envelope half-widths must be nonnegative");
    const std::pair<const char*, Range> all[] = {
        {"capacitance", ranges.capacitance}, {"r_out", ranges.r_out},       {"eta_rad", ranges.eta_rad},
        {"eta_ac", ranges.eta_ac},           {"p_min", ranges.p_min},       {"p_max", ranges.p_max},
        {"setpoint", ranges.setpoint},       {"tolerance", ranges.tolerance}, {"r_in", ranges.r_in}};
    for (const auto& [name, r] : all) {
      if (!r.ordered()) fail(std::string("range ") + name + " is not well ordered");
    }
    if (!(ranges.capacitance.lo > 0.0) || !(ranges.r_out.lo > 0.0) || !(ranges.r_in.lo > 0.0) ||
        !(ranges.eta_ac.lo > 0.0)) {
      fail("capacitance, resistances and HVAC efficiency must be positive");
    }
    if (ranges.eta_rad.lo < 0.0 || ranges.tolerance.lo < 0.0) fail("solar efficiency and tolerance must be nonnegative");
    if (ranges.p_min.hi > ranges.p_max.lo) fail("p_min range overlaps p_max range");
    if (!outdoor_forecast.empty() && static_cast<int>(outdoor_forecast.size()) != horizon) {
      fail("outdoor forecast length differs from horizon");
    }
    if (!solar_forecast.empty() && static_cast<int>(solar_forecast.size()) != horizon) {
      fail("solar forecast length differs from horizon");
    }
  }
};

/// Hourly outdoor temperature for a hot day: 25 °C before dawn, 35 °C at 15:00.
/// Period t covers hours [(t-1) dt, t dt).
inline std::vector<double> default_outdoor(int horizon, double dt) {
  std::vector<double> out(static_cast<std::size_t>(horizon));
  constexpr double pi = 3.14159265358979323846;
  for (int t = 0; t < horizon; ++t) {
    const double hour = (t + 0.5) * dt;
    out[t] = 30.0 + 5.0 * std::sin(2.0 * pi * (hour - 9.0) / 24.0);
  }
  return out;
}

/// Clear-sky solar profile peaking at 0.8 kW/m² at noon, zero at night.
inline std::vector<double> default_solar(int horizon, double dt) {
  std::vector<double> out(static_cast<std::size_t>(horizon));
  constexpr double pi = 3.14159265358979323846;
  for (int t = 0; t < horizon; ++t) {
    const double hour = std::fmod((t + 0.5) * dt, 24.0);
    out[t] = std::max(0.0, 0.8 * std::sin(pi * (hour - 6.0) / 12.0));
  }
  return out;
}

inline ExogenousEnvelope make_envelope(const FleetConfig& cfg) {
  const auto temp = cfg.outdoor_forecast.empty() ? default_outdoor(cfg.horizon, cfg.dt) : cfg.outdoor_forecast;
  const auto solar = cfg.solar_forecast.empty() ? default_solar(cfg.horizon, cfg.dt) : cfg.solar_forecast;
  ExogenousEnvelope env;
  for (int t = 0; t < cfg.horizon; ++t) {
    env.lower.emplace_back(temp[t] - cfg.outdoor_halfwidth, std::max(0.0, solar[t] - cfg.solar_halfwidth));
    env.upper.emplace_back(temp[t] + cfg.outdoor_halfwidth, solar[t] + cfg.solar_halfwidth);
  }
  return env;
}

struct Fleet {
  std::vector<BuildingModel> buildings;
  std::vector<ExogenousEnvelope> envelopes;  // one per building

  int size() const { return static_cast<int>(buildings.size()); }
};

/// One building with `zones` zones drawn from the configured ranges; coupling
/// is a random spanning tree plus `cfg.extra_edges` random extra edges.
inline BuildingModel sample_building(const FleetConfig& cfg, int zones, std::mt19937_64& rng, std::string id) {
  BuildingModel b;
  b.id = std::move(id);
  b.horizon = cfg.horizon;
  b.dt = cfg.dt;
  const auto& r = cfg.ranges;
  for (int i = 0; i < zones; ++i) {
    ZoneParams z;
    z.capacitance = r.capacitance.draw(rng);
    z.r_out = r.r_out.draw(rng);
    z.eta_rad = r.eta_rad.draw(rng);
    z.eta_ac = r.eta_ac.draw(rng);
    z.ambient = true;
    z.solar = true;
    z.hvac = true;
    z.p_min = r.p_min.draw(rng);
    z.p_max = r.p_max.draw(rng);
    const double set = r.setpoint.draw(rng);
    const double tol = r.tolerance.draw(rng);
    z.setpoint.assign(static_cast<std::size_t>(cfg.horizon), set);
    z.tolerance.assign(static_cast<std::size_t>(cfg.horizon), tol);
    b.zones.push_back(std::move(z));
  }
  // Random recursive tree over a shuffled zone order.
  std::vector<int> order(static_cast<std::size_t>(zones));
  for (int i = 0; i < zones; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::set<std::pair<int, int>> edges;
  auto add = [&](int i, int j) {
    edges.insert({std::min(i, j), std::max(i, j)});
    b.coupling.connect(i, j, r.r_in.draw(rng));
  };
  for (int k = 1; k < zones; ++k) {
    const int parent = std::uniform_int_distribution<int>(0, k - 1)(rng);
    add(order[k], order[parent]);
  }
  const long possible = static_cast<long>(zones) * (zones - 1) / 2;
  const int extra = static_cast<int>(std::min<long>(cfg.extra_edges, possible - (zones - 1)));
  for (int e = 0; e < extra;) {
    const int i = std::uniform_int_distribution<int>(0, zones - 1)(rng);
    const int j = std::uniform_int_distribution<int>(0, zones - 1)(rng);
    if (i == j || edges.count({std::min(i, j), std::max(i, j)})) continue;
    add(i, j);
    ++e;
  }
  return b;
}

inline Fleet sample_fleet(const FleetConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  Fleet fleet;
  const auto env = make_envelope(cfg);
  for (int k = 0; k < cfg.buildings; ++k) {
    const int zones = std::uniform_int_distribution<int>(cfg.zones_min, cfg.zones_max)(rng);
    fleet.buildings.push_back(sample_building(cfg, zones, rng, "b" + std::to_string(k)));
    fleet.envelopes.push_back(env);
  }
  return fleet;
}

/// Realized exogenous inputs and initial states of one Monte Carlo draw.
struct Scenario {
  std::vector<std::vector<Vector2>> w;  // [building][period - 1]
  std::vector<Vector> t0;               // [building]
};

/// Independent stream per scenario index, so batches split across workers
/// reproduce the sequential draw.
inline std::mt19937_64 scenario_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

inline Scenario sample_scenario(const Fleet& fleet, const std::vector<ReachableApprox>& reach, std::mt19937_64& rng) {
  if (static_cast<int>(reach.size()) != fleet.size()) throw std::invalid_argument("sample_scenario: missing reachable sets");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Scenario s;
  for (int k = 0; k < fleet.size(); ++k) {
    const auto& b = fleet.buildings[k];
    const auto& env = fleet.envelopes[k];
    const auto& r = reach[k];
    if (r.horizon() != b.horizon || r.bodies.empty()) throw std::invalid_argument("sample_scenario: missing reachable sets");
    std::vector<Vector2> w;
    for (int t = 0; t < b.horizon; ++t) {
      Vector2 x;
      for (int c = 0; c < 2; ++c) x(c) = env.lower[t](c) + unit(rng) * (env.upper[t](c) - env.lower[t](c));
      w.push_back(x);
    }
    s.w.push_back(std::move(w));
    const auto& body = r.bodies[0];
    Vector u(body.dimension());
    for (int i = 0; i < u.size(); ++i) u(i) = 2.0 * unit(rng) - 1.0;
    s.t0.push_back(body.matrix * u + body.center);
  }
  return s;
}

}  // namespace hvacflex
