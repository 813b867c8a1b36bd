#pragma once

// Offline stage: inner approximations of the backward reachable sets of one
// building, one affine body per period boundary.

#include "hvacflex/containment.hpp"
#include "hvacflex/feasible_set.hpp"
#include "hvacflex/fme.hpp"
#include "hvacflex/lp/simplex.hpp"
#include "hvacflex/polytope.hpp"
#include "hvacflex/thermal.hpp"

#include <chrono>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hvacflex {

inline constexpr double kDominanceMargin = 1e-4;  // °C
inline constexpr double kCertificateTolerance = 1e-7;

class EmptyReachable : public std::runtime_error {
 public:
  EmptyReachable(std::string building, int period)
      : std::runtime_error(message(building, period)), building_(std::move(building)), period_(period) {}

  const std::string& building() const { return building_; }
  int period() const { return period_; }

 private:
  static std::string message(const std::string& building, int period) {
    std::ostringstream os;
    os << "building '" << building << "': empty backward reachable set at period " << period;
    return os.str();
  }
  std::string building_;
  int period_;
};

/// Stacked polytope over x = [T_prev; T_1; P_1; ...; T_V; P_V], one (T, P)
/// pair per exogenous vertex, all sharing T_prev.
struct LiftedPolytope {
  HPolytope outer;
  Matrix proj;              // [I, 0]
  std::vector<int> partner; // negated twin of each row, or -1
  int zones = 0;
  int vertex_count = 0;
  int period = 0;

  int lifted_dimension() const { return outer.dimension(); }
  int temperature(int v, int i) const { return zones + v * 2 * zones + i; }
  int power(int v, int i) const { return zones + v * 2 * zones + zones + i; }
};

/// Inequalities describing a body. Diagonal bodies (boxes, including
/// zero-width ones) are written as bounds; others through the inverse.
inline HPolytope body_constraints(const AffineBody& body) {
  const int n = body.dimension();
  const Matrix off = body.matrix - Matrix(body.matrix.diagonal().asDiagonal());
  if (off.cwiseAbs().maxCoeff() == 0.0 || n == 0) {
    const Vector half = body.matrix.diagonal().cwiseAbs();
    return box(body.center - half, body.center + half);
  }
  return body_hrep(body);
}

inline LiftedPolytope build_lifted(const BuildingModel& b, const ExogenousEnvelope& env, int t,
                                   const AffineBody& next_body) {
  check_period(b, t);
  const int n = b.zone_count();
  if (next_body.dimension() != n || next_body.matrix.rows() != n || next_body.matrix.cols() != n) {
    throw std::invalid_argument("build_lifted: next body dimension differs from zone count");
  }
  if (env.periods() < t) throw std::invalid_argument("build_lifted: envelope shorter than horizon");
  const auto d = assemble_period_matrices(b, t);
  const auto verts = exogenous_vertices(env, t);
  const HPolytope member = body_constraints(next_body);
  const Vector t_lo = d.temperature_lower(), t_hi = d.temperature_upper();
  const Vector p_lo = d.power_lower(), p_hi = d.power_upper();

  LiftedPolytope lp;
  lp.zones = n;
  lp.vertex_count = static_cast<int>(verts.size());
  lp.period = t;
  const int dim = n * (2 * lp.vertex_count + 1);
  const int per_vertex = 6 * n + member.rows();
  const int rows = per_vertex * lp.vertex_count;
  lp.proj = Matrix::Zero(n, dim);
  lp.proj.leftCols(n).setIdentity();
  lp.outer.H = Matrix::Zero(rows, dim);
  lp.outer.h = Vector::Zero(rows);
  lp.partner.assign(static_cast<std::size_t>(rows), -1);

  int r = 0;
  auto pair_rows = [&](int first) {
    lp.partner[first] = first + 1;
    lp.partner[first + 1] = first;
  };
  for (int v = 0; v < lp.vertex_count; ++v) {
    const Vector rhs = d.b_eq - d.a_eq4 * verts[v];
    // Dynamics as paired inequalities.
    for (int i = 0; i < n; ++i, r += 2) {
      for (int j = 0; j < n; ++j) {
        lp.outer.H(r, j) = d.a_eq1(i, j);
        lp.outer.H(r, lp.temperature(v, j)) = d.a_eq2(i, j);
        lp.outer.H(r, lp.power(v, j)) = d.a_eq3(i, j);
      }
      lp.outer.h(r) = rhs(i);
      lp.outer.H.row(r + 1) = -lp.outer.H.row(r);
      lp.outer.h(r + 1) = -rhs(i);
      pair_rows(r);
    }
    for (int i = 0; i < n; ++i, r += 2) {
      lp.outer.H(r, lp.temperature(v, i)) = 1.0;
      lp.outer.h(r) = t_hi(i);
      lp.outer.H(r + 1, lp.temperature(v, i)) = -1.0;
      lp.outer.h(r + 1) = -t_lo(i);
      pair_rows(r);
    }
    for (int i = 0; i < n; ++i, r += 2) {
      lp.outer.H(r, lp.power(v, i)) = 1.0;
      lp.outer.h(r) = p_hi(i);
      lp.outer.H(r + 1, lp.power(v, i)) = -1.0;
      lp.outer.h(r + 1) = -p_lo(i);
      pair_rows(r);
    }
    // Membership rows come as [M; -M], so row k pairs with row k + n.
    const int half = member.rows() / 2;
    for (int k = 0; k < member.rows(); ++k) {
      for (int j = 0; j < n; ++j) lp.outer.H(r + k, lp.temperature(v, j)) = member.H(k, j);
      lp.outer.h(r + k) = member.h(k);
    }
    for (int k = 0; k < half; ++k) {
      lp.partner[r + k] = r + half + k;
      lp.partner[r + half + k] = r + k;
    }
    r += member.rows();
  }
  return lp;
}

enum class Encoding { Compact, Literal };

struct ReachOptions {
  Encoding encoding = Encoding::Compact;
  double dominance_margin = kDominanceMargin;
  lp::SimplexOptions simplex{};
  bool warm_start = true;  // reuse the previous period's basis when shapes agree
  double time_budget = 0.0;  // wall-clock seconds for a whole sweep, 0: none
};

struct StepDiagnostics {
  int period = 0;
  lp::LpStatus status = lp::LpStatus::Optimal;
  double trace = 0.0;
  double seconds = 0.0;
  long iterations = 0;
  int rows = 0;
  int columns = 0;
  double lp_violation = 0.0;
  double certificate_residual = 0.0;
};

struct ReachableStep {
  AffineBody body;
  ContainmentCertificate certificate;
  StepDiagnostics diagnostics;
  lp::BasisStatus basis;  // final basis, for warm starts
};

/// Largest-trace affine body whose image under the lifted feasibility
/// conditions is certified inside the one-step backward set of `next_body`.
inline ReachableStep approx_reachable_step(const BuildingModel& b, const ExogenousEnvelope& env, int t,
                                           const AffineBody& next_body, const ReachOptions& opt = {},
                                           const lp::BasisStatus* warm = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  const LiftedPolytope lifted = build_lifted(b, env, t, next_body);
  const int n = lifted.zones;

  lp::LinearProgram prog;
  ReachableStep step;
  lp::LpOutcome out;
  if (opt.encoding == Encoding::Compact) {
    CompactContainment enc(prog, n, lifted.outer, lifted.partner);
    enc.add_trace_objective(prog, opt.dominance_margin);
    out = lp::SimplexBackend(opt.simplex).solve(prog, warm);
    if (out.status == lp::LpStatus::Optimal) {
      step.body = enc.body(out.x);
      step.certificate = enc.certificate(out.x, lifted.outer);
    }
  } else {
    const auto blk = encode_containment(prog, unit_ball(n), lifted.proj, lifted.outer);
    add_diagonal_dominance(prog, blk, opt.dominance_margin);
    prog.set_sense(lp::ObjectiveSense::Maximize);
    for (int i = 0; i < n; ++i) prog.set_cost(blk.matrix_var(i, i), 1.0);
    out = lp::SimplexBackend(opt.simplex).solve(prog, warm);
    if (out.status == lp::LpStatus::Optimal) {
      step.body = blk.body(out.x);
      step.certificate = blk.certificate(out.x);
    }
  }

  auto& diag = step.diagnostics;
  diag.period = t;
  diag.status = out.status;
  diag.iterations = out.iterations;
  diag.rows = prog.num_rows();
  diag.columns = prog.num_variables();
  diag.lp_violation = out.max_violation;
  if (out.status == lp::LpStatus::Infeasible) throw EmptyReachable(b.id, t);
  if (out.status == lp::LpStatus::Unbounded) {
    throw std::logic_error("approx_reachable_step: unbounded containment program (missing comfort or power bounds)");
  }
  diag.trace = step.body.matrix.trace();
  diag.certificate_residual =
      check_certificate(step.certificate, step.body, unit_ball(n), lifted.proj, lifted.outer).worst();
  if (diag.certificate_residual > kCertificateTolerance) {
    std::ostringstream os;
    os << "approx_reachable_step: certificate residual " << diag.certificate_residual << " at period " << t
       << " (program violation " << diag.lp_violation << ")";
    throw std::runtime_error(os.str());
  }
  step.basis = std::move(out.basis);
  diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return step;
}

/// bodies[t] bounds the state at the end of period t; bodies[0] is the set of
/// admissible initial states.
struct ReachableApprox {
  std::string building;
  std::vector<AffineBody> bodies;
  std::vector<StepDiagnostics> diagnostics;  // diagnostics[t - 1] for period t

  int horizon() const { return static_cast<int>(bodies.size()) - 1; }
  double total_seconds() const {
    double s = 0.0;
    for (const auto& d : diagnostics) s += d.seconds;
    return s;
  }
};

inline AffineBody terminal_body(const BuildingModel& b) {
  const auto d = assemble_period_matrices(b, b.horizon);
  return box_body(d.temperature_lower(), d.temperature_upper());
}

inline ReachableApprox backward_sweep(const BuildingModel& b, const ExogenousEnvelope& env,
                                      const ReachOptions& opt = {}) {
  const auto report = validate_building(b);
  if (!report.empty()) throw std::invalid_argument("backward_sweep: invalid building\n" + describe(report));
  const auto env_report = validate_envelope(env, b.horizon);
  if (!env_report.empty()) throw std::invalid_argument("backward_sweep: invalid envelope\n" + describe(env_report));
  ReachableApprox out;
  out.building = b.id;
  out.bodies.resize(static_cast<std::size_t>(b.horizon) + 1);
  out.diagnostics.resize(static_cast<std::size_t>(b.horizon));
  out.bodies[b.horizon] = terminal_body(b);
  lp::BasisStatus basis;
  const auto start = std::chrono::steady_clock::now();
  ReachOptions step_opt = opt;
  for (int t = b.horizon; t >= 1; --t) {
    if (opt.time_budget > 0.0) {
      const double left = opt.time_budget - std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (left <= 0.0) throw lp::SolveTimeLimit("backward_sweep: time budget exhausted");
      step_opt.simplex.time_limit = left;
    }
    const bool warm = opt.warm_start && !basis.empty();
    auto step = approx_reachable_step(b, env, t, out.bodies[t], step_opt, warm ? &basis : nullptr);
    basis = std::move(step.basis);
    out.bodies[t - 1] = std::move(step.body);
    out.diagnostics[t - 1] = step.diagnostics;
  }
  return out;
}

/// Exact one-step backward set by projection; small buildings only.
inline HPolytope exact_reachable_step_fme(const BuildingModel& b, const ExogenousEnvelope& env, int t,
                                          const HPolytope& next_exact) {
  check_period(b, t);
  const int n = b.zone_count();
  if (n > kMaxProjectedDimension) throw std::length_error("exact_reachable_step_fme: more than 3 zones");
  if (next_exact.dimension() != n) throw std::invalid_argument("exact_reachable_step_fme: dimension mismatch");
  if (next_exact.empty) return HPolytope::empty_set(n);
  const auto d = assemble_period_matrices(b, t);
  std::vector<int> keep(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) keep[i] = i;

  std::vector<HPolytope> parts;
  for (const auto& w : exogenous_vertices(env, t)) {
    // Variables [T_prev; T; P].
    const int rows = 2 * n + d.a_ieq1.rows() + next_exact.rows();
    HPolytope aug;
    aug.H = Matrix::Zero(rows, 3 * n);
    aug.h = Vector::Zero(rows);
    const Vector rhs = d.b_eq - d.a_eq4 * w;
    aug.H.block(0, 0, n, n) = d.a_eq1;
    aug.H.block(0, n, n, n) = d.a_eq2;
    aug.H.block(0, 2 * n, n, n) = d.a_eq3;
    aug.h.head(n) = rhs;
    aug.H.middleRows(n, n) = -aug.H.topRows(n);
    aug.h.segment(n, n) = -rhs;
    const int m = static_cast<int>(d.a_ieq1.rows());
    aug.H.block(2 * n, n, m, n) = d.a_ieq1;
    aug.H.block(2 * n, 2 * n, m, n) = d.a_ieq2;
    aug.h.segment(2 * n, m) = d.b_ieq;
    aug.H.block(2 * n + m, n, next_exact.rows(), n) = next_exact.H;
    aug.h.tail(next_exact.rows()) = next_exact.h;
    auto proj = fme_project(aug, keep);
    if (proj.empty) return HPolytope::empty_set(n);
    parts.push_back(std::move(proj));
  }
  HPolytope joint = intersect(parts);
  detail::Rows rows;
  for (int r = 0; r < joint.rows(); ++r) {
    rows.a.push_back(joint.H.row(r).transpose());
    rows.b.push_back(joint.h(r));
  }
  if (!detail::feasible(rows, n) || !detail::normalize(rows)) return HPolytope::empty_set(n);
  detail::remove_redundant(rows, n);
  HPolytope out;
  out.H.resize(static_cast<Eigen::Index>(rows.a.size()), n);
  out.h.resize(static_cast<Eigen::Index>(rows.a.size()));
  for (std::size_t r = 0; r < rows.a.size(); ++r) {
    out.H.row(static_cast<Eigen::Index>(r)) = rows.a[r].transpose();
    out.h(static_cast<Eigen::Index>(r)) = rows.b[r];
  }
  return out;
}

/// Exact sets for every period boundary, terminal comfort box included.
/// An empty entry makes all earlier entries empty.
inline std::vector<HPolytope> exact_backward_sweep(const BuildingModel& b, const ExogenousEnvelope& env) {
  std::vector<HPolytope> sets(static_cast<std::size_t>(b.horizon) + 1);
  const auto d = assemble_period_matrices(b, b.horizon);
  sets[b.horizon] = box(d.temperature_lower(), d.temperature_upper());
  for (int t = b.horizon; t >= 1; --t) sets[t - 1] = exact_reachable_step_fme(b, env, t, sets[t]);
  return sets;
}

struct AuditReport {
  int samples = 0;
  int checks = 0;
  int failures = 0;
  std::vector<Vector> failing_points;
};

/// Samples points of `approx` and checks, for every exogenous vertex, that a
/// feasible (T, P) keeps the next state inside `next_body`.
inline AuditReport audit_inner(const AffineBody& approx, const BuildingModel& b, const ExogenousEnvelope& env, int t,
                               const AffineBody& next_body, int samples, std::uint64_t seed = 1) {
  check_period(b, t);
  const auto d = assemble_period_matrices(b, t);
  const auto verts = exogenous_vertices(env, t);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  AuditReport rep;
  rep.samples = samples;
  const int n = approx.dimension();
  for (int s = 0; s < samples; ++s) {
    Vector z(n);
    for (int i = 0; i < n; ++i) z(i) = unit(rng);
    const Vector x = approx.matrix * z + approx.center;
    bool ok = true;
    for (const auto& w : verts) {
      lp::LinearProgram prog;
      add_period_block(prog, d, x, w, next_body);
      ++rep.checks;
      if (lp::solve(prog).status != lp::LpStatus::Optimal) ok = false;
    }
    if (!ok) {
      ++rep.failures;
      rep.failing_points.push_back(x);
    }
  }
  return rep;
}

}  // namespace hvacflex
