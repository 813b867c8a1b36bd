#pragma once

// Reference computations for tests and the acceptance run. They work from the
// zone parameters directly rather than through the library's matrix assembly.

#include "hvacflex/fleet.hpp"
#include "hvacflex/lp/simplex.hpp"
#include "hvacflex/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace hvacflex::oracle {

using Interval = std::pair<double, double>;

/// Heat balance of zone i in period t, written as
///   C/dt (T_i - Tp_i) = (Tout - T_i)/R + eta_rad Q + sum_j (T_j - T_i)/R_ij - eta_ac P_i.
/// Returns the coefficients of (Tp, T, P) and the constant from w, in the
/// form  sum coefficients = rhs.
struct BalanceRow {
  std::vector<double> prev, next, power;
  double rhs = 0.0;
};

inline BalanceRow balance_row(const BuildingModel& b, int i, const Vector2& w) {
  const int n = b.zone_count();
  const auto& z = b.zones[i];
  BalanceRow r;
  r.prev.assign(n, 0.0);
  r.next.assign(n, 0.0);
  r.power.assign(n, 0.0);
  const double c = z.capacitance / b.dt;
  r.prev[i] = -c;
  r.next[i] = c;
  if (z.ambient) {
    r.next[i] += 1.0 / z.r_out;
    r.rhs += w(0) / z.r_out;
  }
  if (z.solar) r.rhs += z.eta_rad * w(1);
  if (z.hvac) r.power[i] = z.eta_ac;
  for (const auto& [ij, res] : b.coupling.entries()) {
    if (ij.first != i) continue;
    r.next[i] += 1.0 / res;
    r.next[ij.second] -= 1.0 / res;
  }
  return r;
}

inline double comfort_lo(const BuildingModel& b, int i, int t) {
  return b.zones[i].setpoint[t - 1] - b.zones[i].tolerance[t - 1];
}
inline double comfort_hi(const BuildingModel& b, int i, int t) {
  return b.zones[i].setpoint[t - 1] + b.zones[i].tolerance[t - 1];
}

/// Exact robust sets of a single-zone building by interval arithmetic:
/// sets[N] is the final comfort band and sets[t-1] holds the previous
/// temperatures from which every input of period t admits a power keeping the
/// next temperature in the comfort band and in sets[t].
inline std::vector<std::optional<Interval>> interval_sets_1d(const BuildingModel& b, const ExogenousEnvelope& env) {
  if (b.zone_count() != 1) throw std::invalid_argument("interval_sets_1d: single-zone buildings only");
  const int horizon = b.horizon;
  std::vector<std::optional<Interval>> sets(static_cast<std::size_t>(horizon) + 1);
  sets[horizon] = Interval{comfort_lo(b, 0, horizon), comfort_hi(b, 0, horizon)};
  const auto& z = b.zones[0];
  for (int t = horizon; t >= 1; --t) {
    if (!sets[t]) break;
    const double lo_t = std::max(comfort_lo(b, 0, t), sets[t]->first);
    const double hi_t = std::min(comfort_hi(b, 0, t), sets[t]->second);
    if (lo_t > hi_t) break;
    // Tp = T + dt/C ((T - Tout)/R - eta_rad Q + eta_ac P), increasing in T and P.
    auto prev = [&](double temp, double power, double t_out, double q) {
      double flow = z.hvac ? z.eta_ac * power : 0.0;
      if (z.ambient) flow += (temp - t_out) / z.r_out;
      if (z.solar) flow -= z.eta_rad * q;
      return temp + b.dt / z.capacitance * flow;
    };
    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    const auto& wl = env.lower[t - 1];
    const auto& wu = env.upper[t - 1];
    for (double t_out : {wl(0), wu(0)}) {
      for (double q : {wl(1), wu(1)}) {
        lo = std::max(lo, prev(lo_t, z.p_min, t_out, q));
        hi = std::min(hi, prev(hi_t, z.p_max, t_out, q));
      }
    }
    if (lo > hi) break;
    sets[t - 1] = Interval{lo, hi};
  }
  return sets;
}

/// Minimum and maximum total fleet power in period t over one joint program:
/// every building's dynamics, comfort and power limits, and T inside its body.
inline std::optional<Interval> joint_fleet_interval(const std::vector<BuildingModel>& buildings, int t,
                                                    const std::vector<Vector>& t_prev, const std::vector<Vector2>& w,
                                                    const std::vector<AffineBody>& bodies,
                                                    const lp::SimplexOptions& opt = {}) {
  lp::LinearProgram prog;
  std::vector<int> powers;
  for (std::size_t k = 0; k < buildings.size(); ++k) {
    const auto& b = buildings[k];
    const int n = b.zone_count();
    const int temp = prog.add_variables(n);
    const int power = prog.add_variables(n);
    const int coord = prog.add_variables(n, -1.0, 1.0);
    for (int i = 0; i < n; ++i) {
      prog.set_bounds(temp + i, comfort_lo(b, i, t), comfort_hi(b, i, t));
      prog.set_bounds(power + i, b.zones[i].p_min, b.zones[i].p_max);
      powers.push_back(power + i);
    }
    for (int i = 0; i < n; ++i) {
      const auto row = balance_row(b, i, w[k]);
      double rhs = row.rhs;
      for (int j = 0; j < n; ++j) rhs -= row.prev[j] * t_prev[k](j);
      const int r = prog.add_row(lp::RowSense::Equal, rhs);
      for (int j = 0; j < n; ++j) {
        if (row.next[j] != 0.0) prog.add_entry(r, temp + j, row.next[j]);
        if (row.power[j] != 0.0) prog.add_entry(r, power + j, row.power[j]);
      }
    }
    for (int i = 0; i < n; ++i) {
      const int r = prog.add_row(lp::RowSense::Equal, bodies[k].center(i));
      prog.add_entry(r, temp + i, 1.0);
      for (int j = 0; j < n; ++j) {
        if (bodies[k].matrix(i, j) != 0.0) prog.add_entry(r, coord + j, -bodies[k].matrix(i, j));
      }
    }
  }
  for (int p : powers) prog.set_cost(p, 1.0);
  const lp::SimplexBackend solver(opt);
  prog.set_sense(lp::ObjectiveSense::Minimize);
  const auto lo = solver.solve(prog, nullptr);
  if (lo.status != lp::LpStatus::Optimal) return std::nullopt;
  prog.set_sense(lp::ObjectiveSense::Maximize);
  const auto hi = solver.solve(prog, nullptr);
  if (hi.status != lp::LpStatus::Optimal) return std::nullopt;
  return Interval{lo.objective, hi.objective};
}

/// Vertices of a 2-D polygon plus points along its edges; endpoints in 1-D.
inline std::vector<Vector> boundary_samples(const std::vector<Vector>& ccw_vertices, int per_edge = 3) {
  std::vector<Vector> out;
  const std::size_t m = ccw_vertices.size();
  for (std::size_t a = 0; a < m; ++a) {
    const Vector& p = ccw_vertices[a];
    const Vector& q = ccw_vertices[(a + 1) % m];
    out.push_back(p);
    for (int s = 1; s <= per_edge; ++s) out.push_back(p + (q - p) * (static_cast<double>(s) / (per_edge + 1)));
  }
  return out;
}

/// Random single-zone building with a horizon of `horizon` periods and a
/// random envelope around a warm day.
inline std::pair<BuildingModel, ExogenousEnvelope> random_single_zone(std::mt19937_64& rng, int horizon) {
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  BuildingModel b;
  b.id = "z1";
  b.horizon = horizon;
  b.dt = 1.0;
  ZoneParams z;
  z.capacitance = uni(1.5, 3.0);
  z.r_out = uni(2.0, 4.0);
  z.eta_rad = uni(1.0, 3.0);
  z.eta_ac = uni(2.5, 3.5);
  z.solar = true;
  z.p_min = 0.0;
  z.p_max = uni(4.0, 8.0);
  for (int t = 0; t < horizon; ++t) {
    z.setpoint.push_back(uni(23.0, 25.0));
    z.tolerance.push_back(uni(1.0, 2.5));
  }
  b.zones.push_back(z);
  ExogenousEnvelope env;
  for (int t = 0; t < horizon; ++t) {
    const double t_out = uni(26.0, 36.0), hw = uni(0.0, 1.5);
    const double q = uni(0.0, 0.8), qw = uni(0.0, 0.1);
    env.lower.emplace_back(t_out - hw, std::max(0.0, q - qw));
    env.upper.emplace_back(t_out + hw, q + qw);
  }
  return {b, env};
}

}  // namespace hvacflex::oracle
