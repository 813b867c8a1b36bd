#pragma once

// Linear certificates for  matrix * Ball + center  ⊆  proj * {x : H x <= h}.
//
// A certificate (G, beta, Lambda >= 0) satisfies
//   matrix = proj * G,   -center = proj * beta,
//   Lambda * H_base = H * G,   Lambda * h_base <= h + H * beta,
// which places every lifted point G z - beta (z in the base set) inside the
// outer polytope and maps it onto matrix * z + center.

#include "hvacflex/lp/simplex.hpp"
#include "hvacflex/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace hvacflex {

struct ContainmentCertificate {
  Matrix g_aux;       // N x n
  Vector beta_aux;    // N
  Matrix lambda_aux;  // m_out x m_base, elementwise nonnegative
};

/// Largest residual of each certificate relation; `negative_lambda` is the
/// magnitude of the most negative multiplier.
struct CertificateResidual {
  double matrix = 0.0;
  double center = 0.0;
  double multiplier = 0.0;
  double inequality = 0.0;
  double negative_lambda = 0.0;

  double worst() const { return std::max({matrix, center, multiplier, inequality, negative_lambda}); }
};

inline CertificateResidual check_certificate(const ContainmentCertificate& c, const AffineBody& inner,
                                             const HPolytope& base, const Matrix& proj, const HPolytope& outer) {
  CertificateResidual r;
  r.matrix = (inner.matrix - proj * c.g_aux).lpNorm<Eigen::Infinity>();
  r.center = (inner.center + proj * c.beta_aux).lpNorm<Eigen::Infinity>();
  r.multiplier = (c.lambda_aux * base.H - outer.H * c.g_aux).lpNorm<Eigen::Infinity>();
  const Vector slack = c.lambda_aux * base.h - outer.h - outer.H * c.beta_aux;
  r.inequality = std::max(0.0, slack.size() ? slack.maxCoeff() : 0.0);
  r.negative_lambda = std::max(0.0, c.lambda_aux.size() ? -c.lambda_aux.minCoeff() : 0.0);
  return r;
}

/// Variable layout of an encoded containment block inside a LinearProgram.
/// Matrices are stored row-major starting at the given offsets.
struct ContainmentBlock {
  int n = 0;       // inner dimension
  int lifted = 0;  // N
  int facets = 0;  // outer row count
  int base_rows = 0;
  int matrix = 0;  // Gamma_aff
  int center = 0;  // gamma_aff
  int g_aux = 0;
  int beta_aux = 0;
  int lambda_aux = 0;

  int matrix_var(int i, int j) const { return matrix + i * n + j; }
  int g_var(int l, int j) const { return g_aux + l * n + j; }
  int lambda_var(int k, int c) const { return lambda_aux + k * base_rows + c; }

  AffineBody body(const std::vector<double>& x) const {
    AffineBody b{Matrix(n, n), Vector(n)};
    for (int i = 0; i < n; ++i) {
      b.center(i) = x[center + i];
      for (int j = 0; j < n; ++j) b.matrix(i, j) = x[matrix_var(i, j)];
    }
    return b;
  }

  ContainmentCertificate certificate(const std::vector<double>& x) const {
    ContainmentCertificate c{Matrix(lifted, n), Vector(lifted), Matrix(facets, base_rows)};
    for (int l = 0; l < lifted; ++l) {
      c.beta_aux(l) = x[beta_aux + l];
      for (int j = 0; j < n; ++j) c.g_aux(l, j) = x[g_var(l, j)];
    }
    for (int k = 0; k < facets; ++k)
      for (int col = 0; col < base_rows; ++col) c.lambda_aux(k, col) = x[lambda_var(k, col)];
    return c;
  }
};

/// Appends the containment relations to `lp` over fresh variables
/// (Gamma_aff, gamma_aff, G_aux, beta_aux free; Lambda_aux >= 0).
inline ContainmentBlock encode_containment(lp::LinearProgram& lp, const HPolytope& base, const Matrix& proj,
                                           const HPolytope& outer) {
  const int n = base.dimension();
  const int lifted = outer.dimension();
  if (proj.rows() != n || proj.cols() != lifted || base.H.rows() != base.h.size() ||
      outer.H.rows() != outer.h.size()) {
    throw std::invalid_argument("encode_containment: dimension mismatch");
  }
  ContainmentBlock blk;
  blk.n = n;
  blk.lifted = lifted;
  blk.facets = outer.rows();
  blk.base_rows = base.rows();
  blk.matrix = lp.add_variables(n * n);
  blk.center = lp.add_variables(n);
  blk.g_aux = lp.add_variables(lifted * n);
  blk.beta_aux = lp.add_variables(lifted);
  blk.lambda_aux = lp.add_variables(blk.facets * blk.base_rows, 0.0, lp::kInfinity);

  using lp::RowSense;
  // Gamma_aff = proj * G_aux
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int r = lp.add_row(RowSense::Equal, 0.0);
      lp.add_entry(r, blk.matrix_var(i, j), 1.0);
      for (int l = 0; l < lifted; ++l) lp.add_entry(r, blk.g_var(l, j), -proj(i, l));
    }
  }
  // -gamma_aff = proj * beta_aux
  for (int i = 0; i < n; ++i) {
    const int r = lp.add_row(RowSense::Equal, 0.0);
    lp.add_entry(r, blk.center + i, 1.0);
    for (int l = 0; l < lifted; ++l) lp.add_entry(r, blk.beta_aux + l, proj(i, l));
  }
  // Lambda * H_base = H * G_aux
  for (int k = 0; k < blk.facets; ++k) {
    for (int j = 0; j < n; ++j) {
      const int r = lp.add_row(RowSense::Equal, 0.0);
      for (int c = 0; c < blk.base_rows; ++c) lp.add_entry(r, blk.lambda_var(k, c), base.H(c, j));
      for (int l = 0; l < lifted; ++l) lp.add_entry(r, blk.g_var(l, j), -outer.H(k, l));
    }
  }
  // Lambda * h_base - H * beta_aux <= h
  for (int k = 0; k < blk.facets; ++k) {
    const int r = lp.add_row(RowSense::LessEqual, outer.h(k));
    for (int c = 0; c < blk.base_rows; ++c) lp.add_entry(r, blk.lambda_var(k, c), base.h(c));
    for (int l = 0; l < lifted; ++l) lp.add_entry(r, blk.beta_aux + l, -outer.H(k, l));
  }
  return blk;
}

/// Adds strict diagonal dominance  Gamma_ii - sum_{j != i} |Gamma_ij| >= margin
/// through auxiliary bounds M_ij >= ±Gamma_ij.
inline void add_diagonal_dominance(lp::LinearProgram& lp, const ContainmentBlock& blk, double margin) {
  using lp::RowSense;
  const int n = blk.n;
  const int aux = lp.add_variables(n * n, 0.0, lp::kInfinity);
  for (int i = 0; i < n; ++i) {
    const int dom = lp.add_row(RowSense::GreaterEqual, margin);
    lp.add_entry(dom, blk.matrix_var(i, i), 1.0);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const int m = aux + i * n + j;
      lp.add_entry(dom, m, -1.0);
      lp.add_constraint({{m, 1.0}, {blk.matrix_var(i, j), -1.0}}, RowSense::GreaterEqual, 0.0);
      lp.add_constraint({{m, 1.0}, {blk.matrix_var(i, j), 1.0}}, RowSense::GreaterEqual, 0.0);
    }
  }
}

/// Compact equivalent of the containment relations for the unit-ball base and
/// proj = [I, 0]. Each multiplier row is replaced by its optimal value
/// (positive and negative parts of (H G)_k), so  Lambda_k h_base = ||(H G)_k||_1
/// and the block needs no Lambda variables:
///   * G = G⁺ - G⁻ with G⁺, G⁻ >= 0 and lifted center c = -beta;
///   * rows with a single nonzero bound the 1-norm by |s| * sum_j (G⁺ + G⁻);
///   * denser rows get their own split (H G)_kj = p_kj - q_kj;
///   * a pair of rows with H_k' = -H_k shares the split, and when
///     h_k + h_k' = 0 it collapses to  (H G)_k = 0,  H_k c = h_k.
/// `partner[k]` names the negated twin of row k, or -1.
class CompactContainment {
 public:
  CompactContainment(lp::LinearProgram& lp, int n, const HPolytope& outer, const std::vector<int>& partner)
      : n_(n), lifted_(outer.dimension()) {
    if (n > lifted_ || static_cast<int>(partner.size()) != outer.rows()) {
      throw std::invalid_argument("CompactContainment: dimension mismatch");
    }
    using lp::RowSense;
    gp_ = lp.add_variables(lifted_ * n, 0.0, lp::kInfinity);
    gm_ = lp.add_variables(lifted_ * n, 0.0, lp::kInfinity);
    c_ = lp.add_variables(lifted_);

    std::vector<lp::Term> terms;
    for (int k = 0; k < outer.rows(); ++k) {
      const int twin = partner[k];
      if (twin >= 0 && twin < k) continue;  // handled with its partner
      std::vector<std::pair<int, double>> nz;
      for (int l = 0; l < lifted_; ++l)
        if (outer.H(k, l) != 0.0) nz.emplace_back(l, outer.H(k, l));

      const bool equality = twin >= 0 && std::abs(outer.h(k) + outer.h(twin)) <= 1e-12;
      if (equality) {
        for (int j = 0; j < n; ++j) {
          terms.clear();
          for (auto [l, s] : nz) {
            terms.push_back({gp(l, j), s});
            terms.push_back({gm(l, j), -s});
          }
          lp.add_constraint(terms, RowSense::Equal, 0.0);
        }
        terms.clear();
        for (auto [l, s] : nz) terms.push_back({c_ + l, s});
        lp.add_constraint(terms, RowSense::Equal, outer.h(k));
        continue;
      }

      // Terms of the 1-norm bound shared by the row and its twin.
      std::vector<lp::Term> norm;
      if (nz.size() == 1) {
        const auto [l, s] = nz.front();
        for (int j = 0; j < n; ++j) {
          norm.push_back({gp(l, j), std::abs(s)});
          norm.push_back({gm(l, j), std::abs(s)});
        }
      } else {
        const int p = lp.add_variables(n, 0.0, lp::kInfinity);
        const int q = lp.add_variables(n, 0.0, lp::kInfinity);
        for (int j = 0; j < n; ++j) {
          terms.clear();
          for (auto [l, s] : nz) {
            terms.push_back({gp(l, j), s});
            terms.push_back({gm(l, j), -s});
          }
          terms.push_back({p + j, -1.0});
          terms.push_back({q + j, 1.0});
          lp.add_constraint(terms, RowSense::Equal, 0.0);
          norm.push_back({p + j, 1.0});
          norm.push_back({q + j, 1.0});
        }
      }
      for (int side : {k, twin}) {
        if (side < 0) continue;
        terms = norm;
        const double sign = side == k ? 1.0 : -1.0;
        for (auto [l, s] : nz) terms.push_back({c_ + l, sign * s});
        lp.add_constraint(terms, RowSense::LessEqual, outer.h(side));
      }
    }
  }

  int gp(int l, int j) const { return gp_ + l * n_ + j; }
  int gm(int l, int j) const { return gm_ + l * n_ + j; }

  /// Strict diagonal dominance of the leading n x n block with the trace as
  /// objective (maximized).
  /// The diagonal is positive, so its negative part is fixed at zero; this
  /// also removes the zero-cost ray G⁺_ii = G⁻_ii -> infinity.
  void add_trace_objective(lp::LinearProgram& lp, double margin) const {
    using lp::RowSense;
    lp.set_sense(lp::ObjectiveSense::Maximize);
    std::vector<lp::Term> terms;
    for (int i = 0; i < n_; ++i) {
      lp.set_cost(gp(i, i), 1.0);
      lp.set_bounds(gm(i, i), 0.0, 0.0);
      terms.clear();
      terms.push_back({gp(i, i), 1.0});
      for (int j = 0; j < n_; ++j) {
        if (j == i) continue;
        terms.push_back({gp(i, j), -1.0});
        terms.push_back({gm(i, j), -1.0});
      }
      lp.add_constraint(terms, RowSense::GreaterEqual, margin);
    }
  }

  Matrix lifted_matrix(const std::vector<double>& x) const {
    Matrix g(lifted_, n_);
    for (int l = 0; l < lifted_; ++l)
      for (int j = 0; j < n_; ++j) g(l, j) = x[gp(l, j)] - x[gm(l, j)];
    return g;
  }

  Vector lifted_center(const std::vector<double>& x) const {
    Vector c(lifted_);
    for (int l = 0; l < lifted_; ++l) c(l) = x[c_ + l];
    return c;
  }

  AffineBody body(const std::vector<double>& x) const {
    return {lifted_matrix(x).topRows(n_), lifted_center(x).head(n_)};
  }

  /// Full certificate for the unit-ball base, multipliers set to the positive
  /// and negative parts of H G.
  ContainmentCertificate certificate(const std::vector<double>& x, const HPolytope& outer) const {
    ContainmentCertificate cert;
    cert.g_aux = lifted_matrix(x);
    cert.beta_aux = -lifted_center(x);
    const Matrix hg = outer.H * cert.g_aux;
    cert.lambda_aux.resize(outer.rows(), 2 * n_);
    cert.lambda_aux.leftCols(n_) = hg.cwiseMax(0.0);
    cert.lambda_aux.rightCols(n_) = (-hg).cwiseMax(0.0);
    return cert;
  }

 private:
  int n_;
  int lifted_;
  int gp_ = 0;
  int gm_ = 0;
  int c_ = 0;
};

}  // namespace hvacflex
