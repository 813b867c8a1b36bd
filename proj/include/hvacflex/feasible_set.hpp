#pragma once

// Per-period feasible set of one building for a known previous state and a
// realized exogenous input, with the next state held inside a body.

#include "hvacflex/lp/linear_program.hpp"
#include "hvacflex/polytope.hpp"
#include "hvacflex/thermal.hpp"

#include <stdexcept>
#include <vector>

namespace hvacflex {

/// Variables T, P (bounded by the comfort band and power limits) and body
/// coordinates z in [-1, 1], tied by the dynamics and T = Γ z + γ.
struct PeriodBlock {
  int n = 0;
  int temperature = 0;
  int power = 0;
  int coordinates = 0;

  Vector temperatures(const std::vector<double>& x) const { return slice(x, temperature); }
  Vector powers(const std::vector<double>& x) const { return slice(x, power); }

 private:
  Vector slice(const std::vector<double>& x, int first) const {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = x[first + i];
    return v;
  }
};

inline PeriodBlock add_period_block(lp::LinearProgram& lp, const PeriodConstraintData& d, const Vector& t_prev,
                                    const Vector2& w, const AffineBody& body) {
  const int n = static_cast<int>(d.a_eq1.rows());
  if (t_prev.size() != n || body.dimension() != n || body.matrix.rows() != n || body.matrix.cols() != n) {
    throw std::invalid_argument("per_period_feasible: dimension mismatch");
  }
  if (!t_prev.allFinite()) throw std::invalid_argument("per_period_feasible: non-finite previous state");
  PeriodBlock blk;
  blk.n = n;
  const Vector t_lo = d.temperature_lower(), t_hi = d.temperature_upper();
  const Vector p_lo = d.power_lower(), p_hi = d.power_upper();
  blk.temperature = lp.add_variables(n);
  blk.power = lp.add_variables(n);
  blk.coordinates = lp.add_variables(n, -1.0, 1.0);
  for (int i = 0; i < n; ++i) {
    lp.set_bounds(blk.temperature + i, t_lo(i), t_hi(i));
    lp.set_bounds(blk.power + i, p_lo(i), p_hi(i));
  }
  const Vector rhs = d.b_eq - d.a_eq1 * t_prev - d.a_eq4 * w;
  for (int i = 0; i < n; ++i) {
    const int r = lp.add_row(lp::RowSense::Equal, rhs(i));
    for (int j = 0; j < n; ++j) {
      lp.add_entry(r, blk.temperature + j, d.a_eq2(i, j));
      lp.add_entry(r, blk.power + j, d.a_eq3(i, j));
    }
  }
  for (int i = 0; i < n; ++i) {
    const int r = lp.add_row(lp::RowSense::Equal, body.center(i));
    lp.add_entry(r, blk.temperature + i, 1.0);
    for (int j = 0; j < n; ++j) lp.add_entry(r, blk.coordinates + j, -body.matrix(i, j));
  }
  return blk;
}

/// Builds the block for building `b` in period t as a standalone program
/// (zero objective).
struct PeriodProgram {
  lp::LinearProgram lp;
  PeriodBlock block;
};

inline PeriodProgram per_period_feasible(const BuildingModel& b, int t, const Vector& t_prev, const Vector2& w,
                                         const AffineBody& body) {
  PeriodProgram out;
  out.block = add_period_block(out.lp, assemble_period_matrices(b, t), t_prev, w, body);
  return out;
}

}  // namespace hvacflex
