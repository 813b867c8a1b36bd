#include "hvacflex/fme.hpp"
#include "hvacflex/lp/simplex.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hvacflex;
using Vector3 = Eigen::Vector3d;

TEST(Polytope, BoxRows) {
  const auto p = box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
  EXPECT_EQ(p.rows(), 4);
  EXPECT_TRUE(p.h.isApproxToConstant(1.0));
  const auto q = box(Vector::Zero(1), Vector::Ones(1));
  EXPECT_TRUE(contains_point(q, Vector::Constant(1, 1.0), 0.0));
  EXPECT_FALSE(contains_point(q, Vector::Constant(1, -1e-3), 1e-7));
}

TEST(Polytope, DegenerateBoxHoldsOnlyItsPoint) {
  const Vector c = Vector2(1.0, 2.0);
  const auto p = box(c, c);
  EXPECT_TRUE(contains_point(p, c, 0.0));
  EXPECT_FALSE(contains_point(p, Vector2(1.0, 2.001), 1e-7));
}

TEST(Polytope, MembershipTolerance) {
  const auto p = unit_ball(2);
  EXPECT_TRUE(contains_point(p, Vector2(0, 0), 1e-7));
  EXPECT_FALSE(contains_point(p, Vector2(2, 0), 1e-7));
  EXPECT_TRUE(contains_point(p, Vector2(1 + 1e-9, 0), 1e-7));
}

TEST(Polytope, BodyMembership) {
  AffineBody unit{Matrix::Identity(2, 2), Vector::Zero(2)};
  EXPECT_TRUE(body_membership(unit, Vector2(0.5, -0.5), 1e-7));
  AffineBody b{Vector2(2, 1).asDiagonal(), Vector2(10, 0)};
  EXPECT_TRUE(body_membership(b, Vector2(12, 0), 1e-7));
  EXPECT_FALSE(body_membership(b, Vector2(12.1, 0), 1e-7));
}

TEST(Polytope, BodyVertices) {
  AffineBody b1{Matrix::Identity(1, 1), Vector::Zero(1)};
  const auto v1 = body_vertices(b1);
  ASSERT_EQ(v1.size(), 2u);
  EXPECT_DOUBLE_EQ(std::min(v1[0](0), v1[1](0)), -1.0);
  EXPECT_DOUBLE_EQ(std::max(v1[0](0), v1[1](0)), 1.0);

  AffineBody b2{Vector2(2, 3).asDiagonal(), Vector2(1, 1)};
  const auto v2 = body_vertices(b2);
  ASSERT_EQ(v2.size(), 4u);
  for (const auto& v : v2) {
    EXPECT_DOUBLE_EQ(std::abs(v(0) - 1.0), 2.0);
    EXPECT_DOUBLE_EQ(std::abs(v(1) - 1.0), 3.0);
  }
}

TEST(Polytope, BodyHrepMatchesMembership) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int k = 0; k < 20; ++k) {
    const int n = 1 + k % 3;
    AffineBody b{Matrix::Identity(n, n) * 2.0, Vector::Zero(n)};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) b.matrix(i, j) += 0.3 * g(rng);
    const auto p = body_hrep(b);
    for (int s = 0; s < 50; ++s) {
      Vector x(n);
      for (int i = 0; i < n; ++i) x(i) = 3.0 * g(rng);
      EXPECT_EQ(contains_point(p, x, 1e-9), body_membership(b, x, 1e-9));
    }
  }
}

TEST(Fme, TriangleOntoAxis) {
  HPolytope p;
  p.H = Matrix(3, 2);
  p.H << 1, 1, -1, 0, 0, -1;
  p.h = Vector3(1, 0, 0);
  const auto q = fme_project(p, {0});
  ASSERT_FALSE(q.empty);
  EXPECT_TRUE(contains_point(q, Vector::Constant(1, 0.0), 1e-12));
  EXPECT_TRUE(contains_point(q, Vector::Constant(1, 1.0), 1e-12));
  EXPECT_FALSE(contains_point(q, Vector::Constant(1, 1.01), 1e-9));
  EXPECT_FALSE(contains_point(q, Vector::Constant(1, -0.01), 1e-9));
}

TEST(Fme, BoxOntoSubset) {
  const auto p = box(Vector3(0, 1, 2), Vector3(1, 3, 5));
  const auto q = fme_project(p, {0, 2});
  for (double x : {0.0, 1.0})
    for (double z : {2.0, 5.0}) EXPECT_TRUE(contains_point(q, Vector2(x, z), 1e-12));
  EXPECT_FALSE(contains_point(q, Vector2(1.1, 3), 1e-9));
  EXPECT_FALSE(contains_point(q, Vector2(0.5, 5.1), 1e-9));
}

TEST(Fme, EmptyInputStaysEmpty) {
  HPolytope p;
  p.H = Matrix(2, 2);
  p.H << 1, 0, -1, 0;
  p.h = Vector2(0, -1);
  EXPECT_TRUE(fme_project(p, {1}).empty);
}

namespace {

// Support value of `p` in direction d, by linear programming.
double support(const HPolytope& p, const Vector& d) {
  lp::LinearProgram prog;
  const int x = prog.add_variables(p.dimension());
  for (int r = 0; r < p.rows(); ++r) {
    const int row = prog.add_row(lp::RowSense::LessEqual, p.h(r));
    for (int c = 0; c < p.dimension(); ++c) {
      if (p.H(r, c) != 0.0) prog.add_entry(row, x + c, p.H(r, c));
    }
  }
  for (int c = 0; c < d.size(); ++c) prog.set_cost(x + c, d(c));
  prog.set_sense(lp::ObjectiveSense::Maximize);
  const auto out = lp::solve(prog);
  EXPECT_EQ(out.status, lp::LpStatus::Optimal);
  return out.objective;
}

}  // namespace

// The projection's support function equals the original's on directions in
// the kept coordinates.
TEST(Fme, RandomProjectionsMatchSupportFunctions) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (int k = 0; k < 50; ++k) {
    HPolytope p;
    const int cuts = 6;
    p.H = Matrix::Zero(6 + cuts, 3);
    p.h = Vector::Zero(6 + cuts);
    for (int l = 0; l < 3; ++l) {
      p.H(2 * l, l) = 1.0;
      p.H(2 * l + 1, l) = -1.0;
      p.h(2 * l) = p.h(2 * l + 1) = 1.0 + std::abs(g(rng));
    }
    for (int c = 0; c < cuts; ++c) {
      for (int l = 0; l < 3; ++l) p.H(6 + c, l) = g(rng);
      p.h(6 + c) = 0.5 + std::abs(g(rng));
    }
    const auto q = fme_project(p, {0, 1});
    ASSERT_FALSE(q.empty);
    for (int s = 0; s < 8; ++s) {
      const double a = 2.0 * M_PI * s / 8.0;
      const Vector d2 = Vector2(std::cos(a), std::sin(a));
      const Vector d3 = Vector3(d2(0), d2(1), 0.0);
      EXPECT_NEAR(support(q, d2), support(p, d3), 1e-6);
    }
  }
}

TEST(Fme, IntersectCombinesRows) {
  const auto a = box(Vector::Constant(1, 0.0), Vector::Constant(1, 2.0));
  const auto b = box(Vector::Constant(1, 1.0), Vector::Constant(1, 3.0));
  const auto c = intersect({a, b});
  EXPECT_TRUE(contains_point(c, Vector::Constant(1, 1.5), 1e-12));
  EXPECT_FALSE(contains_point(c, Vector::Constant(1, 0.5), 1e-9));
  EXPECT_FALSE(contains_point(c, Vector::Constant(1, 2.5), 1e-9));
  const auto d = box(Vector::Constant(1, 5.0), Vector::Constant(1, 6.0));
  const auto e = intersect({a, d});
  for (double x = 0.0; x <= 6.0; x += 0.25) EXPECT_FALSE(contains_point(e, Vector::Constant(1, x), 1e-9));
}
