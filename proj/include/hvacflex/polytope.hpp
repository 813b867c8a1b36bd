#pragma once

#include "hvacflex/thermal.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hvacflex {

/// {x : H x <= h}. Emptiness is carried by an explicit flag so callers branch
/// on it instead of probing an infeasible H-representation.
struct HPolytope {
  Matrix H;
  Vector h;
  bool empty = false;

  int dimension() const { return static_cast<int>(H.cols()); }
  int rows() const { return static_cast<int>(H.rows()); }

  static HPolytope empty_set(int dim) {
    HPolytope p;
    p.H = Matrix::Zero(0, dim);
    p.h = Vector::Zero(0);
    p.empty = true;
    return p;
  }
};

/// Image of the unit infinity-norm ball under z -> matrix * z + center.
struct AffineBody {
  Matrix matrix;
  Vector center;

  int dimension() const { return static_cast<int>(center.size()); }
};

class SingularBody : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline void check_finite(const HPolytope& p) {
  if (p.H.rows() != p.h.size()) throw std::invalid_argument("HPolytope: row count of H differs from length of h");
  if (!p.H.allFinite() || !p.h.allFinite()) throw std::invalid_argument("HPolytope: non-finite entry");
}

inline HPolytope box(const Vector& lower, const Vector& upper) {
  if (lower.size() != upper.size()) throw std::invalid_argument("box: dimension mismatch");
  const auto n = lower.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lower(i) > upper(i)) throw std::invalid_argument("box: lower bound exceeds upper bound");
  }
  HPolytope p;
  p.H.resize(2 * n, n);
  p.H << Matrix::Identity(n, n), -Matrix::Identity(n, n);
  p.h.resize(2 * n);
  p.h << upper, -lower;
  return p;
}

/// H-representation of the unit infinity-norm ball: H_base = [I; -I], h_base = 1.
inline HPolytope unit_ball(int n) { return box(Vector::Constant(n, -1.0), Vector::Constant(n, 1.0)); }

inline bool contains_point(const HPolytope& p, const Vector& x, double tol) {
  if (x.size() != p.dimension()) throw std::invalid_argument("contains_point: dimension mismatch");
  if (p.empty) return false;
  if (p.rows() == 0) return true;
  return ((p.H * x - p.h).array() <= tol).all();
}

inline Eigen::PartialPivLU<Matrix> checked_lu(const AffineBody& body) {
  Eigen::PartialPivLU<Matrix> lu(body.matrix);
  if (body.dimension() > 0 && !(lu.rcond() > 1e-12)) throw SingularBody("affine body has a singular generator matrix");
  return lu;
}

/// Coordinates z with x = matrix * z + center.
inline Vector body_coordinates(const AffineBody& body, const Vector& x) {
  if (x.size() != body.dimension()) throw std::invalid_argument("body_membership: dimension mismatch");
  return checked_lu(body).solve(x - body.center);
}

inline bool body_membership(const AffineBody& body, const Vector& x, double tol) {
  return body_coordinates(body, x).lpNorm<Eigen::Infinity>() <= 1.0 + tol;
}

inline constexpr int kMaxVertexDimension = 12;

inline std::vector<Vector> body_vertices(const AffineBody& body) {
  const int n = body.dimension();
  if (n > kMaxVertexDimension) throw std::length_error("body_vertices: dimension above 12");
  std::vector<Vector> out;
  out.reserve(std::size_t{1} << n);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    Vector z(n);
    for (int i = 0; i < n; ++i) z(i) = (mask >> i) & 1u ? 1.0 : -1.0;
    out.push_back(body.matrix * z + body.center);
  }
  return out;
}

/// H-representation {x : |matrix^{-1}(x - center)| <= 1}.
inline HPolytope body_hrep(const AffineBody& body) {
  const int n = body.dimension();
  const Matrix inv = checked_lu(body).inverse();
  HPolytope p;
  p.H.resize(2 * n, n);
  p.H << inv, -inv;
  p.h.resize(2 * n);
  const Vector shift = inv * body.center;
  p.h << Vector::Ones(n) + shift, Vector::Ones(n) - shift;
  return p;
}

inline AffineBody box_body(const Vector& lower, const Vector& upper) {
  AffineBody b;
  b.matrix = (0.5 * (upper - lower)).asDiagonal();
  b.center = 0.5 * (upper + lower);
  return b;
}

}  // namespace hvacflex
