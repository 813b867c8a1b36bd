#include "hvacflex/containment.hpp"
#include "hvacflex/fme.hpp"
#include "hvacflex/reachability.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hvacflex;

namespace {

// Box rows in negated pairs plus random cuts, strictly satisfied at 0.
struct Outer {
  HPolytope poly;
  std::vector<int> partner;
};

Outer random_outer(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int cuts = 3;
  Outer o;
  o.poly.H = Matrix::Zero(2 * dim + cuts, dim);
  o.poly.h = Vector::Zero(2 * dim + cuts);
  o.partner.assign(static_cast<std::size_t>(2 * dim + cuts), -1);
  for (int l = 0; l < dim; ++l) {
    o.poly.H(2 * l, l) = 1.0;
    o.poly.H(2 * l + 1, l) = -1.0;
    o.poly.h(2 * l) = 0.5 + u(rng);
    o.poly.h(2 * l + 1) = 0.5 + u(rng);
    o.partner[2 * l] = 2 * l + 1;
    o.partner[2 * l + 1] = 2 * l;
  }
  for (int c = 0; c < cuts; ++c) {
    for (int l = 0; l < dim; ++l) o.poly.H(2 * dim + c, l) = g(rng);
    o.poly.h(2 * dim + c) = 0.3 + u(rng);
  }
  return o;
}

Matrix projector(int n, int dim) {
  Matrix p = Matrix::Zero(n, dim);
  p.leftCols(n).setIdentity();
  return p;
}

struct Solved {
  AffineBody body;
  ContainmentCertificate certificate;
  double trace = 0.0;
};

Solved solve_literal(const Outer& o, int n) {
  lp::LinearProgram prog;
  const auto blk = encode_containment(prog, unit_ball(n), projector(n, o.poly.dimension()), o.poly);
  add_diagonal_dominance(prog, blk, kDominanceMargin);
  prog.set_sense(lp::ObjectiveSense::Maximize);
  for (int i = 0; i < n; ++i) prog.set_cost(blk.matrix_var(i, i), 1.0);
  const auto out = lp::solve(prog);
  EXPECT_EQ(out.status, lp::LpStatus::Optimal);
  Solved s{blk.body(out.x), blk.certificate(out.x), 0.0};
  s.trace = s.body.matrix.trace();
  return s;
}

Solved solve_compact(const Outer& o, int n) {
  lp::LinearProgram prog;
  CompactContainment enc(prog, n, o.poly, o.partner);
  enc.add_trace_objective(prog, kDominanceMargin);
  const auto out = lp::solve(prog);
  EXPECT_EQ(out.status, lp::LpStatus::Optimal);
  Solved s{enc.body(out.x), enc.certificate(out.x, o.poly), 0.0};
  s.trace = s.body.matrix.trace();
  return s;
}

}  // namespace

TEST(Containment, IdentityCertificateForUnitBox) {
  // Inner and outer are both the unit box in R^2: Gamma = I, Lambda = I.
  const auto ball = unit_ball(2);
  ContainmentCertificate c;
  c.g_aux = Matrix::Identity(2, 2);
  c.beta_aux = Vector::Zero(2);
  c.lambda_aux = Matrix::Identity(4, 4);
  AffineBody inner{Matrix::Identity(2, 2), Vector::Zero(2)};
  EXPECT_LE(check_certificate(c, inner, ball, Matrix::Identity(2, 2), ball).worst(), 1e-12);

  // Half-size inner box: the same certificate scaled by 0.5 holds with slack.
  c.g_aux *= 0.5;
  c.lambda_aux *= 0.5;
  inner.matrix *= 0.5;
  EXPECT_LE(check_certificate(c, inner, ball, Matrix::Identity(2, 2), ball).worst(), 1e-12);
}

TEST(Containment, EncodingsAgreeAndBodiesStayInsideProjection) {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 30; ++k) {
    const int n = 1 + k % 3;
    const int dim = n + 1 + k % 3;
    const auto o = random_outer(rng, dim);
    const auto lit = solve_literal(o, n);
    const auto com = solve_compact(o, n);
    EXPECT_NEAR(lit.trace, com.trace, 1e-6 * std::max(1.0, lit.trace));
    std::vector<int> keep;
    for (int i = 0; i < n; ++i) keep.push_back(i);
    const auto proj = fme_project(o.poly, keep);
    for (const auto* s : {&lit, &com}) {
      for (const auto& v : body_vertices(s->body)) EXPECT_LE((proj.H * v - proj.h).maxCoeff(), 1e-7);
      EXPECT_LE(check_certificate(s->certificate, s->body, unit_ball(n), projector(n, dim), o.poly).worst(), 1e-7);
    }
  }
}

TEST(Containment, DiagonalDominanceHolds) {
  std::mt19937_64 rng(29);
  for (int k = 0; k < 10; ++k) {
    const auto o = random_outer(rng, 4);
    for (const auto& s : {solve_literal(o, 2), solve_compact(o, 2)}) {
      for (int i = 0; i < 2; ++i) {
        const double off = s.body.matrix.row(i).cwiseAbs().sum() - std::abs(s.body.matrix(i, i));
        EXPECT_GE(s.body.matrix(i, i) - off, kDominanceMargin - 1e-9);
      }
    }
  }
}

TEST(Containment, ScaledBodiesBreakContainment) {
  std::mt19937_64 rng(31);
  const auto o = random_outer(rng, 3);
  const auto s = solve_compact(o, 2);
  const auto proj = fme_project(o.poly, {0, 1});
  AffineBody big = s.body;
  big.matrix *= 1.2;
  double excess = 0.0;
  for (const auto& v : body_vertices(big)) excess = std::max(excess, (proj.H * v - proj.h).maxCoeff());
  EXPECT_GT(excess, 1e-4);  // the optimum touches the boundary
}
