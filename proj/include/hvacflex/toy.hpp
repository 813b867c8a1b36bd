#pragma once

// Embedded two-zone, four-period example. A hot final period forces the
// zones to be pre-cooled, so the exact set at period 3 is visibly smaller
// than the comfort box, and a policy that only looks at the current comfort
// band runs out of cooling in period 4.

#include "hvacflex/reachability.hpp"
#include "hvacflex/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace hvacflex {

inline BuildingModel toy_building() {
  BuildingModel b;
  b.id = "toy";
  b.horizon = 4;
  b.dt = 1.0;
  auto zone = [](double c, double r_out, double eta_rad, double p_max) {
    ZoneParams z;
    z.capacitance = c;
    z.r_out = r_out;
    z.eta_rad = eta_rad;
    z.eta_ac = 3.0;
    z.ambient = true;
    z.solar = true;
    z.hvac = true;
    z.p_min = 0.0;
    z.p_max = p_max;
    z.setpoint.assign(4, 24.0);
    z.tolerance.assign(4, 2.0);
    return z;
  };
  b.zones.push_back(zone(2.0, 2.0, 2.0, 2.0));  // A
  b.zones.push_back(zone(3.0, 1.5, 1.0, 2.5));  // B
  b.coupling.connect(0, 1, 1.0);
  return b;
}

inline ExogenousEnvelope toy_envelope() {
  ExogenousEnvelope env;
  const double outdoor[4] = {30.0, 30.0, 30.0, 38.0};
  for (double t_out : outdoor) {
    env.lower.emplace_back(t_out - 1.0, 0.2);
    env.upper.emplace_back(t_out + 1.0, 0.4);
  }
  return env;
}

/// Vertices of a bounded 2-D polytope in counter-clockwise order.
inline std::vector<Vector> polygon_vertices(const HPolytope& p, double tol = 1e-9) {
  if (p.dimension() != 2) throw std::invalid_argument("polygon_vertices: polytope is not two-dimensional");
  std::vector<Vector> pts;
  if (p.empty) return pts;
  for (int a = 0; a < p.rows(); ++a) {
    for (int c = a + 1; c < p.rows(); ++c) {
      Eigen::Matrix2d m;
      m << p.H.row(a), p.H.row(c);
      if (std::abs(m.determinant()) < 1e-12) continue;
      const Vector x = m.partialPivLu().solve(Eigen::Vector2d(p.h(a), p.h(c)));
      if (!contains_point(p, x, tol)) continue;
      bool seen = false;
      for (const auto& q : pts) seen = seen || (q - x).lpNorm<Eigen::Infinity>() <= 1e-9;
      if (!seen) pts.push_back(x);
    }
  }
  if (pts.empty()) return pts;
  Vector mid = Vector::Zero(2);
  for (const auto& q : pts) mid += q;
  mid /= static_cast<double>(pts.size());
  std::sort(pts.begin(), pts.end(), [&](const Vector& u, const Vector& v) {
    return std::atan2(u(1) - mid(1), u(0) - mid(0)) < std::atan2(v(1) - mid(1), v(0) - mid(0));
  });
  return pts;
}

struct ToyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ToyResult {
  BuildingModel building;
  ExogenousEnvelope envelope;
  std::vector<HPolytope> exact;    // [t], t = 0..4
  ReachableApprox approx;          // bodies[t], t = 0..4
  std::vector<HPolytope> comfort;  // [t], t = 1..4; entry 0 is period 1's box
  std::vector<ToyCheck> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const ToyCheck& c) { return c.passed; });
  }
};

inline HPolytope comfort_box(const BuildingModel& b, int t) {
  const auto d = assemble_period_matrices(b, t);
  return box(d.temperature_lower(), d.temperature_upper());
}

/// Exact and approximate sweeps with the containment, nonemptiness and
/// strict-subset checks.
inline ToyResult run_toy(double tol = 1e-7, const ReachOptions& opt = {}) {
  ToyResult r;
  r.building = toy_building();
  r.envelope = toy_envelope();
  const int horizon = r.building.horizon;
  r.exact = exact_backward_sweep(r.building, r.envelope);
  r.approx = backward_sweep(r.building, r.envelope, opt);
  r.comfort.resize(static_cast<std::size_t>(horizon) + 1);
  r.comfort[0] = comfort_box(r.building, 1);
  for (int t = 1; t <= horizon; ++t) r.comfort[t] = comfort_box(r.building, t);

  double worst = 0.0;
  bool inside = true;
  bool nonempty = true;
  for (int t = 0; t <= horizon; ++t) {
    const auto& body = r.approx.bodies[t];
    const double det = body.matrix.determinant();
    if (!(std::abs(det) > 0.0) || r.exact[t].empty) nonempty = false;
    if (r.exact[t].empty) {
      inside = false;
      continue;
    }
    for (const auto& v : body_vertices(body)) {
      const double excess = (r.exact[t].H * v - r.exact[t].h).maxCoeff();
      worst = std::max(worst, excess);
      if (excess > tol) inside = false;
    }
  }
  r.checks.push_back({"bodies inside exact sets", inside, "largest excess " + std::to_string(worst)});
  r.checks.push_back({"bodies nonempty", nonempty, ""});

  int outside = 0;
  if (!r.exact[3].empty) {
    for (const auto& v : polygon_vertices(r.comfort[3])) {
      if (!contains_point(r.exact[3], v, tol)) ++outside;
    }
  }
  r.checks.push_back({"period 3 exact set strictly inside comfort box", !r.exact[3].empty && outside > 0,
                      std::to_string(outside) + " comfort-box vertices outside the exact set"});
  return r;
}

/// A comfort-box corner at period 3 that the exact set excludes, the hottest
/// corner when several qualify.
inline Vector toy_stressed_state(const ToyResult& r, double tol = 1e-7) {
  Vector best;
  for (const auto& v : polygon_vertices(r.comfort[3])) {
    if (contains_point(r.exact[3], v, tol)) continue;
    if (best.size() == 0 || v.sum() > best.sum()) best = v;
  }
  if (best.size() == 0) throw std::logic_error("toy_stressed_state: comfort box lies inside the exact set");
  return best;
}

/// Fleet of the toy building with one realized scenario: midpoint inputs,
/// start at the center of the initial body.
struct ToyStress {
  Fleet fleet;
  std::vector<ReachableApprox> reach;
  Scenario scenario;
  SignalPolicy policy = SignalPolicy::constant(0.0);  // least cooling every period
};

inline ToyStress toy_stress(const ToyResult& r) {
  ToyStress s;
  s.fleet.buildings.push_back(r.building);
  s.fleet.envelopes.push_back(r.envelope);
  s.reach.push_back(r.approx);
  std::vector<Vector2> w;
  for (int t = 0; t < r.building.horizon; ++t) w.push_back((r.envelope.lower[t] + r.envelope.upper[t]) / 2.0);
  s.scenario.w.push_back(std::move(w));
  s.scenario.t0.push_back(r.approx.bodies[0].center);
  return s;
}

}  // namespace hvacflex
