#pragma once

// Exact polytope projection by Fourier-Motzkin elimination. Oracle-scale only:
// the row count can grow quadratically per eliminated variable.

#include "hvacflex/lp/simplex.hpp"
#include "hvacflex/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hvacflex {

inline constexpr int kMaxProjectedDimension = 3;
inline constexpr int kMaxEliminated = 12;
inline constexpr double kFmePivotTolerance = 1e-12;
inline constexpr double kRedundancyTolerance = 1e-9;

namespace detail {

struct Rows {
  std::vector<Vector> a;
  std::vector<double> b;
};

inline bool feasible(const Rows& rows, int dim) {
  lp::LinearProgram prog;
  prog.add_variables(dim);
  for (std::size_t r = 0; r < rows.a.size(); ++r) {
    const int row = prog.add_row(lp::RowSense::LessEqual, rows.b[r]);
    for (int j = 0; j < dim; ++j) prog.add_entry(row, j, rows.a[r](j));
  }
  return lp::solve(prog).status != lp::LpStatus::Infeasible;
}

// Scales each row to unit max-norm, drops all-zero rows (or reports emptiness)
// and exact duplicates (keeping the tighter right-hand side).
inline bool normalize(Rows& rows) {
  Rows out;
  for (std::size_t r = 0; r < rows.a.size(); ++r) {
    const double scale = rows.a[r].lpNorm<Eigen::Infinity>();
    if (scale < kFmePivotTolerance) {
      if (rows.b[r] < -kRedundancyTolerance) return false;
      continue;
    }
    Vector a = rows.a[r] / scale;
    const double b = rows.b[r] / scale;
    bool dup = false;
    for (std::size_t k = 0; k < out.a.size(); ++k) {
      if ((out.a[k] - a).lpNorm<Eigen::Infinity>() < 1e-12) {
        out.b[k] = std::min(out.b[k], b);
        dup = true;
        break;
      }
    }
    if (!dup) {
      out.a.push_back(std::move(a));
      out.b.push_back(b);
    }
  }
  rows = std::move(out);
  return true;
}

// One LP per row: the row is redundant when its maximum over the remaining
// rows does not exceed its right-hand side.
inline void remove_redundant(Rows& rows, int dim) {
  std::vector<bool> alive(rows.a.size(), true);
  for (std::size_t r = 0; r < rows.a.size(); ++r) {
    lp::LinearProgram prog;
    prog.add_variables(dim);
    prog.set_sense(lp::ObjectiveSense::Maximize);
    for (int j = 0; j < dim; ++j) prog.set_cost(j, rows.a[r](j));
    for (std::size_t k = 0; k < rows.a.size(); ++k) {
      if (k == r || !alive[k]) continue;
      const int row = prog.add_row(lp::RowSense::LessEqual, rows.b[k]);
      for (int j = 0; j < dim; ++j) prog.add_entry(row, j, rows.a[k](j));
    }
    const auto out = lp::solve(prog);
    if (out.status == lp::LpStatus::Optimal && out.objective <= rows.b[r] + kRedundancyTolerance) alive[r] = false;
  }
  Rows kept;
  for (std::size_t r = 0; r < rows.a.size(); ++r) {
    if (!alive[r]) continue;
    kept.a.push_back(rows.a[r]);
    kept.b.push_back(rows.b[r]);
  }
  rows = std::move(kept);
}

}  // namespace detail

/// Projects `poly` onto the coordinates listed in `keep` (in that order).
inline HPolytope fme_project(const HPolytope& poly, const std::vector<int>& keep) {
  check_finite(poly);
  const int dim = poly.dimension();
  std::vector<bool> kept(static_cast<std::size_t>(dim), false);
  for (int k : keep) {
    if (k < 0 || k >= dim || kept[k]) throw std::invalid_argument("fme_project: invalid keep index");
    kept[k] = true;
  }
  const int out_dim = static_cast<int>(keep.size());
  if (out_dim > kMaxProjectedDimension) throw std::length_error("fme_project: projected dimension above 3");
  std::vector<int> eliminate;
  for (int j = 0; j < dim; ++j)
    if (!kept[j]) eliminate.push_back(j);
  if (static_cast<int>(eliminate.size()) > kMaxEliminated) throw std::length_error("fme_project: more than 12 eliminated variables");
  if (poly.empty) return HPolytope::empty_set(out_dim);

  detail::Rows rows;
  for (int r = 0; r < poly.rows(); ++r) {
    rows.a.push_back(poly.H.row(r).transpose());
    rows.b.push_back(poly.h(r));
  }
  if (!detail::feasible(rows, dim) || !detail::normalize(rows)) return HPolytope::empty_set(out_dim);

  while (!eliminate.empty()) {
    // Cheapest variable first: fewest generated rows.
    std::size_t pick = 0;
    long best = std::numeric_limits<long>::max();
    for (std::size_t e = 0; e < eliminate.size(); ++e) {
      long pos = 0, neg = 0;
      for (const auto& a : rows.a) {
        if (a(eliminate[e]) > kFmePivotTolerance) ++pos;
        if (a(eliminate[e]) < -kFmePivotTolerance) ++neg;
      }
      const long growth = pos * neg - pos - neg;
      if (growth < best) {
        best = growth;
        pick = e;
      }
    }
    const int k = eliminate[pick];
    eliminate.erase(eliminate.begin() + static_cast<long>(pick));

    detail::Rows next;
    std::vector<std::size_t> pos, neg;
    for (std::size_t r = 0; r < rows.a.size(); ++r) {
      const double c = rows.a[r](k);
      if (c > kFmePivotTolerance) {
        pos.push_back(r);
      } else if (c < -kFmePivotTolerance) {
        neg.push_back(r);
      } else {
        Vector a = rows.a[r];
        a(k) = 0.0;
        next.a.push_back(std::move(a));
        next.b.push_back(rows.b[r]);
      }
    }
    for (std::size_t p : pos) {
      for (std::size_t q : neg) {
        const double cp = rows.a[p](k);
        const double cq = -rows.a[q](k);
        Vector a = rows.a[p] / cp + rows.a[q] / cq;
        a(k) = 0.0;
        next.a.push_back(std::move(a));
        next.b.push_back(rows.b[p] / cp + rows.b[q] / cq);
      }
    }
    rows = std::move(next);
    if (!detail::normalize(rows)) return HPolytope::empty_set(out_dim);
    detail::remove_redundant(rows, dim);
  }

  HPolytope out;
  out.H.resize(static_cast<Eigen::Index>(rows.a.size()), out_dim);
  out.h.resize(static_cast<Eigen::Index>(rows.a.size()));
  for (std::size_t r = 0; r < rows.a.size(); ++r) {
    for (int c = 0; c < out_dim; ++c) out.H(static_cast<Eigen::Index>(r), c) = rows.a[r](keep[c]);
    out.h(static_cast<Eigen::Index>(r)) = rows.b[r];
  }
  return out;
}

/// Intersection of H-representations of equal dimension.
inline HPolytope intersect(const std::vector<HPolytope>& parts) {
  if (parts.empty()) throw std::invalid_argument("intersect: no operands");
  const int dim = parts.front().dimension();
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.dimension() != dim) throw std::invalid_argument("intersect: dimension mismatch");
    if (p.empty) return HPolytope::empty_set(dim);
    rows += p.rows();
  }
  HPolytope out;
  out.H.resize(rows, dim);
  out.h.resize(rows);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.H.middleRows(at, p.rows()) = p.H;
    out.h.segment(at, p.rows()) = p.h;
    at += p.rows();
  }
  return out;
}

}  // namespace hvacflex
