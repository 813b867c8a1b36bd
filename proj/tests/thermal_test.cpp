#include "hvacflex/fleet.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace hvacflex;

TEST(Thermal, SingleZoneMatrices) {
  const auto d = assemble_period_matrices(fixture::one_zone(), 1);
  EXPECT_DOUBLE_EQ(d.a_eq1(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(d.a_eq2(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(d.a_eq3(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(d.a_eq4(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(d.a_eq4(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(d.b_eq(0), 0.0);
  EXPECT_DOUBLE_EQ(d.temperature_lower()(0), 19.0);
  EXPECT_DOUBLE_EQ(d.temperature_upper()(0), 21.0);
  EXPECT_DOUBLE_EQ(d.power_upper()(0), 10.0);
}

TEST(Thermal, ZoneWithoutHvacHasZeroColumn) {
  auto b = fixture::one_zone();
  b.zones[0].hvac = false;
  b.zones[0].p_max = 0.0;
  EXPECT_TRUE(assemble_period_matrices(b, 1).a_eq3.isZero());
}

TEST(Thermal, SymmetricCoupling) {
  auto b = fixture::one_zone();
  b.zones.push_back(b.zones[0]);
  b.coupling.connect(0, 1, 2.0);
  const auto d = assemble_period_matrices(b, 1);
  EXPECT_DOUBLE_EQ(d.a_eq2(0, 1), -0.5);
  EXPECT_DOUBLE_EQ(d.a_eq2(1, 0), -0.5);
  EXPECT_DOUBLE_EQ(d.a_eq2(0, 0), 2.5);
}

TEST(Thermal, SimulateStepExamples) {
  const auto b = fixture::one_zone();
  EXPECT_NEAR(simulate_step(b, 1, Vector::Constant(1, 20.0), Vector::Constant(1, 10.0), Vector2(30, 0))(0), 20.0,
              1e-12);
  EXPECT_NEAR(simulate_step(b, 1, Vector::Constant(1, 20.0), Vector::Zero(1), Vector2(20, 0))(0), 20.0, 1e-12);
}

TEST(Thermal, MatricesAgreeWithHeatBalanceOnRandomBuildings) {
  std::mt19937_64 rng(11);
  FleetConfig cfg;
  for (int k = 0; k < 20; ++k) {
    const auto b = sample_building(cfg, 1 + k % 6, rng, "r");
    const int t = 1 + k % b.horizon;
    const Vector2 w(25.0 + k, 0.1 * k);
    const auto d = assemble_period_matrices(b, t);
    for (int i = 0; i < b.zone_count(); ++i) {
      const auto row = oracle::balance_row(b, i, w);
      for (int j = 0; j < b.zone_count(); ++j) {
        EXPECT_NEAR(d.a_eq1(i, j), row.prev[j], 1e-12);
        EXPECT_NEAR(d.a_eq2(i, j), row.next[j], 1e-12);
        EXPECT_NEAR(d.a_eq3(i, j), row.power[j], 1e-12);
      }
      EXPECT_NEAR(d.b_eq(i) - d.a_eq4.row(i).dot(w), row.rhs, 1e-12);
    }
  }
}

TEST(Thermal, SimulateStepResidualIsTiny) {
  std::mt19937_64 rng(5);
  FleetConfig cfg;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 30; ++k) {
    const auto b = sample_building(cfg, 1 + k % 12, rng, "r");
    const int n = b.zone_count();
    Vector prev(n), p(n);
    for (int i = 0; i < n; ++i) {
      prev(i) = 20.0 + 8.0 * u(rng);
      p(i) = b.zones[i].p_max * u(rng);
    }
    const Vector2 w(25.0 + 10.0 * u(rng), u(rng));
    const Vector next = simulate_step(b, 1, prev, p, w);
    EXPECT_LE(dynamics_residual(assemble_period_matrices(b, 1), prev, next, p, w), 1e-9);
  }
}

TEST(Thermal, ExogenousVertices) {
  ExogenousEnvelope env;
  env.lower = {Vector2(28, 0.4), Vector2(30, 0.5), Vector2(30, 0.2)};
  env.upper = {Vector2(32, 0.6), Vector2(30, 0.5), Vector2(30, 0.6)};
  const auto v = exogenous_vertices(env, 1);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v[0], Vector2(28, 0.4));
  EXPECT_EQ(v[1], Vector2(28, 0.6));
  EXPECT_EQ(v[2], Vector2(32, 0.4));
  EXPECT_EQ(v[3], Vector2(32, 0.6));
  EXPECT_EQ(exogenous_vertices(env, 2).size(), 1u);
  EXPECT_EQ(exogenous_vertices(env, 3).size(), 2u);
}

TEST(Thermal, ValidationReports) {
  auto b = fixture::one_zone();
  b.zones.push_back(b.zones[0]);
  b.coupling.connect(0, 1, 1.5);
  EXPECT_TRUE(validate_building(b).empty());

  auto bad = b;
  bad.zones[1].capacitance = 0.0;
  const auto r = validate_building(bad);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].zone, 1);
  EXPECT_NE(r[0].message.find("capacitance"), std::string::npos);

  auto asym = b;
  asym.coupling.set_directed(0, 1, 3.0);
  const auto ra = validate_building(asym);
  ASSERT_FALSE(ra.empty());
  EXPECT_NE(describe(ra).find("(0, 1)"), std::string::npos);
}

TEST(Thermal, PeriodOutOfRangeThrows) {
  EXPECT_THROW(assemble_period_matrices(fixture::one_zone(2), 3), std::out_of_range);
  EXPECT_THROW(assemble_period_matrices(fixture::one_zone(2), 0), std::out_of_range);
}

TEST(Thermal, TimeVaryingBands) {
  auto b = fixture::one_zone(2);
  b.zones[0].setpoint = {20.0, 22.0};
  b.zones[0].tolerance = {1.0, 0.5};
  const auto d = assemble_period_matrices(b, 2);
  EXPECT_DOUBLE_EQ(d.temperature_lower()(0), 21.5);
  EXPECT_DOUBLE_EQ(d.temperature_upper()(0), 22.5);
}
