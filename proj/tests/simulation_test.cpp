#include "hvacflex/io.hpp"
#include "hvacflex/simulation.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace hvacflex;

namespace {

struct SmallFleet {
  Fleet fleet;
  std::vector<ReachableApprox> reach;
};

SmallFleet small_fleet(std::uint64_t seed, int buildings = 3) {
  FleetConfig cfg;
  cfg.buildings = buildings;
  cfg.zones_min = 2;
  cfg.zones_max = 5;
  cfg.seed = seed;
  SmallFleet s;
  s.fleet = sample_fleet(cfg);
  for (int k = 0; k < s.fleet.size(); ++k) s.reach.push_back(backward_sweep(s.fleet.buildings[k], s.fleet.envelopes[k]));
  return s;
}

SimulationTrace trace_with(const std::vector<std::pair<double, double>>& intervals, int first_infeasible = 0) {
  SimulationTrace tr;
  int t = 1;
  for (auto [lo, hi] : intervals) {
    PeriodRecord rec;
    rec.period = t++;
    rec.lo = lo;
    rec.hi = hi;
    tr.periods.push_back(rec);
  }
  tr.first_infeasible = first_infeasible;
  return tr;
}

}  // namespace

TEST(Policy, ParseAndDraw) {
  std::mt19937_64 rng(1);
  FleetInterval f;
  f.lo = 2.0;
  f.hi = 6.0;
  EXPECT_DOUBLE_EQ(SignalPolicy::parse("constant:0").draw(f, 1, rng), 2.0);
  EXPECT_DOUBLE_EQ(SignalPolicy::parse("constant:1").draw(f, 1, rng), 6.0);
  EXPECT_DOUBLE_EQ(SignalPolicy::parse("extremes").draw(f, 1, rng), 2.0);
  EXPECT_DOUBLE_EQ(SignalPolicy::parse("extremes").draw(f, 2, rng), 6.0);
  EXPECT_THROW(SignalPolicy::parse("constant:1.5"), std::invalid_argument);
  EXPECT_THROW(SignalPolicy::parse("sometimes"), std::invalid_argument);

  std::mt19937_64 a(9), b(9);
  const auto u = SignalPolicy::uniform();
  for (int t = 1; t <= 10; ++t) {
    const double x = u.draw(f, t, a);
    EXPECT_EQ(x, u.draw(f, t, b));
    EXPECT_GE(x, 2.0);
    EXPECT_LE(x, 6.0);
  }
}

TEST(Metrics, Examples) {
  const auto tr = trace_with({{0, 2}, {0, 2}, {0, 2}});
  const auto m = compute_metrics({tr}, {}, 1.0);
  EXPECT_DOUBLE_EQ(m.area, 6.0);
  EXPECT_TRUE(std::isnan(m.ratio));

  std::vector<std::vector<FleetInterval>> hind(3, std::vector<FleetInterval>(1));
  for (auto& p : hind) p[0] = {0.0, 2.0};
  EXPECT_DOUBLE_EQ(compute_metrics({tr}, {hind}, 1.0).ratio, 1.0);

  const auto bad = trace_with({{0, 1}}, 1);
  const auto ok = trace_with({{0, 1}});
  EXPECT_DOUBLE_EQ(compute_metrics({ok, bad, ok, ok}, {}, 1.0).infeasible_ratio, 0.25);
  EXPECT_THROW(compute_metrics({}, {}, 1.0), std::invalid_argument);
}

TEST(Fleet, SamplingRespectsRangesAndSeeds) {
  FleetConfig cfg;
  cfg.buildings = 100;
  const auto f = sample_fleet(cfg);
  ASSERT_EQ(f.size(), 100);
  for (const auto& b : f.buildings) {
    EXPECT_GE(b.zone_count(), 4);
    EXPECT_LE(b.zone_count(), 12);
    EXPECT_TRUE(validate_building(b).empty());
  }
  const auto g = sample_fleet(cfg);
  for (int k = 0; k < f.size(); ++k) EXPECT_EQ(io::to_json(f.buildings[k]).dump(), io::to_json(g.buildings[k]).dump());

  FleetConfig one;
  one.buildings = 1;
  one.zones_min = one.zones_max = 1;
  const auto s = sample_fleet(one);
  ASSERT_EQ(s.size(), 1);
  EXPECT_EQ(s.buildings[0].zone_count(), 1);
}

TEST(Fleet, InvalidRangesAreRejected) {
  FleetConfig cfg;
  cfg.zones_min = 5;
  cfg.zones_max = 3;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  FleetConfig neg;
  neg.ranges.capacitance = {-1.0, 1.0};
  EXPECT_THROW(neg.validate(), std::invalid_argument);
}

TEST(Scenario, DrawsStayInsideEnvelopesAndBodies) {
  const auto s = small_fleet(3);
  for (int i = 0; i < 20; ++i) {
    auto rng = scenario_rng(3, i);
    const auto sc = sample_scenario(s.fleet, s.reach, rng);
    for (int k = 0; k < s.fleet.size(); ++k) {
      EXPECT_TRUE(body_membership(s.reach[k].bodies[0], sc.t0[k], 1e-9));
      for (int t = 1; t <= s.fleet.buildings[k].horizon; ++t) EXPECT_TRUE(s.fleet.envelopes[k].contains(t, sc.w[k][t - 1]));
    }
  }
}

TEST(Scenario, ZeroWidthEnvelopeReproducesForecast) {
  FleetConfig cfg;
  cfg.buildings = 2;
  cfg.zones_min = cfg.zones_max = 2;
  cfg.outdoor_halfwidth = cfg.solar_halfwidth = 0.0;
  const auto f = sample_fleet(cfg);
  std::vector<ReachableApprox> reach;
  for (int k = 0; k < f.size(); ++k) reach.push_back(backward_sweep(f.buildings[k], f.envelopes[k]));
  auto rng = scenario_rng(1, 0);
  const auto sc = sample_scenario(f, reach, rng);
  const auto out = default_outdoor(cfg.horizon, cfg.dt);
  for (int t = 0; t < cfg.horizon; ++t) EXPECT_DOUBLE_EQ(sc.w[0][t](0), out[t]);
}

// Every policy keeps the causal runs feasible.
TEST(Realtime, CausalRunsNeverViolate) {
  const auto s = small_fleet(5);
  for (const auto* name : {"uniform", "extremes", "constant:0", "constant:1", "constant:0.3"}) {
    BatchOptions bo;
    bo.scenarios = 15;
    bo.seed = 5;
    bo.policy = SignalPolicy::parse(name);
    const auto res = run_batch(s.fleet, s.reach, bo);
    EXPECT_EQ(res.causal.violations, 0) << name;
    EXPECT_EQ(res.causal.empty_intervals, 0) << name;
    EXPECT_EQ(res.causal.infeasible_scenarios, 0) << name;
    EXPECT_LE(res.causal.max_tracking_error, 1e-6) << name;
    EXPECT_LE(res.hindsight_excess, 1e-7) << name;
    // Hindsight contains the causal interval at the same state.
    for (const auto& run : res.runs) {
      for (std::size_t p = 0; p < run.hindsight.size(); ++p) {
        for (std::size_t k = 0; k < run.hindsight[p].size(); ++k) {
          EXPECT_LE(run.hindsight[p][k].lo, run.causal.periods[p].buildings[k].lo + 1e-7);
          EXPECT_GE(run.hindsight[p][k].hi, run.causal.periods[p].buildings[k].hi - 1e-7);
        }
      }
    }
  }
}

TEST(Realtime, BatchesDoNotDependOnWorkerCount) {
  const auto s = small_fleet(8, 2);
  BatchOptions bo;
  bo.scenarios = 8;
  bo.seed = 8;
  const auto a = run_batch(s.fleet, s.reach, bo);
  bo.jobs = 3;
  const auto b = run_batch(s.fleet, s.reach, bo);
  for (int i = 0; i < bo.scenarios; ++i) {
    for (std::size_t p = 0; p < a.runs[i].causal.periods.size(); ++p) {
      EXPECT_EQ(a.runs[i].causal.periods[p].signal, b.runs[i].causal.periods[p].signal);
      EXPECT_EQ(a.runs[i].causal.periods[p].achieved, b.runs[i].causal.periods[p].achieved);
    }
  }
  EXPECT_EQ(io::to_json(a.causal).dump(), io::to_json(b.causal).dump());
}

TEST(Realtime, SingleBuildingFleetIntervalIsTheBuildingInterval) {
  const auto s = small_fleet(2, 1);
  auto rng = scenario_rng(2, 0);
  const auto sc = sample_scenario(s.fleet, s.reach, rng);
  const auto tr = run_realtime(s.fleet, s.reach, sc, SignalPolicy::uniform(), rng);
  for (const auto& rec : tr.periods) {
    EXPECT_EQ(rec.lo, rec.buildings[0].lo);
    EXPECT_EQ(rec.hi, rec.buildings[0].hi);
  }
}

TEST(Realtime, LowerEndpointPolicyFollowsLowerWitnesses) {
  const auto b = fixture::one_zone(3);
  Fleet f;
  f.buildings.push_back(b);
  f.envelopes.push_back(fixture::constant_envelope(3, Vector2(30, 0), Vector2(30, 0)));
  const std::vector<ReachableApprox> reach{backward_sweep(b, f.envelopes[0])};
  Scenario sc;
  sc.w.push_back({Vector2(30, 0), Vector2(30, 0), Vector2(30, 0)});
  sc.t0.push_back(Vector::Constant(1, 20.0));
  const auto tr = run_realtime(f, reach, sc, SignalPolicy::constant(0.0), std::mt19937_64(1));
  EXPECT_EQ(tr.violations, 0);
  Vector x = sc.t0[0];
  for (int t = 1; t <= 3; ++t) {
    const auto iv = building_interval(b, t, x, Vector2(30, 0), reach[0].bodies[t]);
    EXPECT_NEAR(tr.periods[t - 1].buildings[0].power.sum(), iv.lo, 1e-9);
    x = simulate_step(b, t, x, iv.witness_lo.power, Vector2(30, 0));
  }
}

TEST(Hindsight, TerminalPeriodMatchesComfortBox) {
  const auto b = fixture::one_zone(2);
  const std::vector<Vector2> w{Vector2(30, 0), Vector2(31, 0)};
  const auto h = hindsight_building_interval(b, w, 2, Vector::Constant(1, 20.5));
  const auto c = building_interval(b, 2, Vector::Constant(1, 20.5), w[1], terminal_body(b));
  EXPECT_NEAR(h.lo, c.lo, 1e-9);
  EXPECT_NEAR(h.hi, c.hi, 1e-9);
}

// Two periods, one zone: brute force over (P1, P2) at 1e-3 resolution.
TEST(Hindsight, MatchesPowerGrid) {
  auto b = fixture::one_zone(2);
  b.zones[0].p_max = 9.6;
  const std::vector<Vector2> w{Vector2(30, 0), Vector2(31, 0)};
  const double prev = 20.0;
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i <= 9600; ++i) {
    const double p1 = i * 1e-3;
    const double t1 = (prev + w[0](0) - p1) / 2.0;
    if (t1 < 19.0 || t1 > 21.0) continue;
    for (int j = 0; j <= 9600; ++j) {
      const double t2 = (t1 + w[1](0) - j * 1e-3) / 2.0;
      if (t2 >= 19.0 - 1e-12 && t2 <= 21.0 + 1e-12) {
        lo = std::min(lo, p1);
        hi = std::max(hi, p1);
        break;
      }
    }
  }
  const auto h = hindsight_building_interval(b, w, 1, Vector::Constant(1, prev));
  EXPECT_NEAR(h.lo, lo, 1e-3);
  EXPECT_NEAR(h.hi, hi, 1e-3);
  EXPECT_NEAR(h.lo, 8.8, 1e-7);
  EXPECT_NEAR(h.hi, 9.6, 1e-7);

  // The causal interval with a point envelope on the realized inputs agrees.
  const auto r = backward_sweep(b, fixture::constant_envelope(2, Vector2(31, 0), Vector2(31, 0)));
  const auto c = building_interval(b, 1, Vector::Constant(1, prev), w[0], r.bodies[1]);
  EXPECT_NEAR(c.lo, 8.8, 1e-6);
  EXPECT_NEAR(c.hi, 9.6, 1e-6);
}

TEST(Hindsight, StateOutsideEveryTrajectoryThrows) {
  const auto b = fixture::one_zone(2);
  const std::vector<Vector2> w{Vector2(30, 0), Vector2(31, 0)};
  EXPECT_THROW(hindsight_building_interval(b, w, 1, Vector::Constant(1, 45.0)), InfeasibleHindsight);
}
