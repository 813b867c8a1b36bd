// Acceptance run: one PASS/FAIL line per criterion. Criteria 1-9 are run
// twice into separate directories; criterion 10 compares the written files.

#include "hvacflex/commands.hpp"
#include "hvacflex/fme.hpp"

#include "CLI11.hpp"
#include "oracles.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

using namespace hvacflex;
namespace fs = std::filesystem;
using cli::seconds_since;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << v;
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  io::write_atomic(path, text);
}

struct Context {
  fs::path dir;
  std::uint64_t seed = 1;
  int jobs = 1;
  lp::SimplexOptions simplex = cli::simplex_options(kDefaultTolerance);
};

// 1. Toy example ------------------------------------------------------------

Outcome toy(const Context& cx) {
  const auto start = Clock::now();
  const auto run = cli::run_toy_all(kDefaultTolerance);
  const double secs = seconds_since(start);
  fs::create_directories(cx.dir / "c1");
  cli::write_toy(cx.dir / "c1", run.result, run.causal, run.myopic);
  std::string failed;
  for (const auto& c : run.result.checks) {
    if (!c.passed) failed += " [" + c.name + "]";
  }
  const bool ok = run.result.passed() && secs < 5.0;
  return {ok, "checks " + std::string(failed.empty() ? "all pass" : "failed:" + failed) + ", " + fmt(secs) +
                  " s (limit 5 s)"};
}

// 2. and 6. Default fleet ---------------------------------------------------

struct FleetRun {
  Fleet fleet;
  std::vector<ReachableApprox> reach;
  BatchResult batch;
  double seconds = 0.0;
  std::string error;
};

FleetRun fleet_run(const Context& cx) {
  FleetRun fr;
  const auto start = Clock::now();
  FleetConfig cfg;
  cfg.seed = cx.seed;
  fr.fleet = sample_fleet(cfg);
  ReachOptions ro;
  ro.simplex = cx.simplex;
  try {
    for (int k = 0; k < fr.fleet.size(); ++k) {
      fr.reach.push_back(backward_sweep(fr.fleet.buildings[k], fr.fleet.envelopes[k], ro));
    }
  } catch (const EmptyReachable& e) {
    fr.error = e.what();
    fr.seconds = seconds_since(start);
    return fr;
  }
  BatchOptions bo;
  bo.scenarios = 500;
  bo.seed = cx.seed;
  bo.jobs = cx.jobs;
  bo.realtime.simplex = cx.simplex;
  fr.batch = run_batch(fr.fleet, fr.reach, bo);
  fr.seconds = seconds_since(start);

  const fs::path out = cx.dir / "c2";
  fs::create_directories(out / "sweeps");
  for (int k = 0; k < fr.fleet.size(); ++k) {
    io::write_json(io::sweep_path(out, fr.fleet.buildings[k].id),
                   io::to_json(fr.reach[k], fr.fleet.buildings[k], fr.fleet.envelopes[k]));
  }
  cli::write_batch(out, fr.fleet, fr.batch, bo);
  return fr;
}

Outcome fleet_safety(const FleetRun& fr) {
  if (!fr.error.empty()) return {false, "offline sweep failed: " + fr.error};
  const auto& m = fr.batch.causal;
  const bool ok = m.violations == 0 && m.empty_intervals == 0 && m.max_tracking_error <= 1e-6 && fr.seconds < 600.0;
  int zmin = 1 << 20, zmax = 0;
  for (const auto& b : fr.fleet.buildings) {
    zmin = std::min(zmin, b.zone_count());
    zmax = std::max(zmax, b.zone_count());
  }
  return {ok, std::to_string(m.scenarios) + " scenarios, " + std::to_string(fr.fleet.size()) + " buildings (" +
                  std::to_string(zmin) + "-" + std::to_string(zmax) + " zones): " + std::to_string(m.violations) +
                  " violations, " + std::to_string(m.empty_intervals) + " empty intervals, max tracking error " +
                  fmt(m.max_tracking_error) + " kW (limit 1e-6), " + fmt(fr.seconds) + " s (limit 600 s)"};
}

Outcome hindsight_dominance(const Context& cx, const FleetRun& fr) {
  if (!fr.error.empty()) return {false, "no fleet run: " + fr.error};
  std::ostringstream os;
  os << io::csv_header("hindsight_excess") << "scenario,hindsight_excess_kw\n";
  for (std::size_t s = 0; s < fr.batch.runs.size(); ++s) os << s << ',' << io::num(fr.batch.runs[s].hindsight_excess) << '\n';
  write_text(cx.dir / "c6" / "hindsight_excess.csv", os.str());
  const double worst = fr.batch.hindsight_excess;
  return {worst <= 1e-7, "largest causal endpoint outside hindsight " + fmt(worst) + " kW (limit 1e-7) over " +
                             std::to_string(fr.batch.runs.size()) + " scenarios"};
}

// 3. Single-zone exactness --------------------------------------------------

Outcome single_zone(const Context& cx) {
  auto rng = scenario_rng(cx.seed, 3);
  ReachOptions ro;
  ro.simplex = cx.simplex;
  double worst = 0.0;
  int mismatched = 0, empty = 0;
  std::ostringstream os;
  os << io::csv_header("single_zone") << "instance,boundary,oracle_lo_c,oracle_hi_c,swept_lo_c,swept_hi_c\n";
  for (int k = 0; k < 50; ++k) {
    const auto [b, env] = oracle::random_single_zone(rng, 8);
    const auto sets = oracle::interval_sets_1d(b, env);
    const bool oracle_empty = !sets[0].has_value();
    std::optional<ReachableApprox> sweep;
    try {
      sweep = backward_sweep(b, env, ro);
    } catch (const EmptyReachable&) {
    }
    if (oracle_empty || !sweep) {
      ++empty;
      if (oracle_empty != !sweep) ++mismatched;
      os << k << ",all," << (oracle_empty ? "empty" : "nonempty") << ",," << (sweep ? "nonempty" : "empty") << ",\n";
      continue;
    }
    for (int t = 0; t <= b.horizon; ++t) {
      const double c = sweep->bodies[t].center(0), r = std::abs(sweep->bodies[t].matrix(0, 0));
      const double err = std::max(std::abs(c - r - sets[t]->first), std::abs(c + r - sets[t]->second));
      worst = std::max(worst, err);
      if (err > 1e-6) ++mismatched;
      os << k << ',' << t << ',' << io::num(sets[t]->first) << ',' << io::num(sets[t]->second) << ','
         << io::num(c - r) << ',' << io::num(c + r) << '\n';
    }
  }
  write_text(cx.dir / "c3" / "single_zone.csv", os.str());
  return {mismatched == 0, "50 buildings (" + std::to_string(empty) + " with empty sets), largest endpoint gap " +
                               fmt(worst) + " C (limit 1e-6), " + std::to_string(mismatched) + " mismatches"};
}

// 4. Containment soundness --------------------------------------------------

struct RandomOuter {
  HPolytope outer;
  std::vector<int> partner;
};

/// Box rows in negated pairs plus random cuts, all strictly satisfied at 0.
RandomOuter random_outer(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss;
  const int cuts = 2 + static_cast<int>(uni(rng) * 2 * dim);
  RandomOuter r;
  r.outer.H = Matrix::Zero(2 * dim + cuts, dim);
  r.outer.h = Vector::Zero(2 * dim + cuts);
  r.partner.assign(static_cast<std::size_t>(2 * dim + cuts), -1);
  for (int l = 0; l < dim; ++l) {
    r.outer.H(2 * l, l) = 1.0;
    r.outer.H(2 * l + 1, l) = -1.0;
    r.outer.h(2 * l) = 0.5 + 1.5 * uni(rng);
    r.outer.h(2 * l + 1) = 0.5 + 1.5 * uni(rng);
    r.partner[2 * l] = 2 * l + 1;
    r.partner[2 * l + 1] = 2 * l;
  }
  for (int c = 0; c < cuts; ++c) {
    for (int l = 0; l < dim; ++l) r.outer.H(2 * dim + c, l) = gauss(rng);
    r.outer.h(2 * dim + c) = 0.3 + uni(rng);
  }
  return r;
}

Outcome containment(const Context& cx) {
  auto rng = scenario_rng(cx.seed, 4);
  double worst = 0.0;
  int failures = 0, solved = 0;
  std::ostringstream os;
  os << io::csv_header("containment") << "instance,encoding,inner_dim,lifted_dim,trace,largest_excess\n";
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + k % 3;
    const int dim = n + 1 + static_cast<int>(rng() % 4);
    const auto r = random_outer(rng, dim);
    std::vector<int> keep(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) keep[i] = i;
    const HPolytope projected = fme_project(r.outer, keep);
    const bool compact = k % 2 == 0;

    lp::LinearProgram prog;
    AffineBody body;
    lp::LpOutcome out;
    if (compact) {
      CompactContainment enc(prog, n, r.outer, r.partner);
      enc.add_trace_objective(prog, kDominanceMargin);
      out = lp::SimplexBackend(cx.simplex).solve(prog, nullptr);
      if (out.status == lp::LpStatus::Optimal) body = enc.body(out.x);
    } else {
      Matrix proj = Matrix::Zero(n, dim);
      proj.leftCols(n).setIdentity();
      const auto blk = encode_containment(prog, unit_ball(n), proj, r.outer);
      add_diagonal_dominance(prog, blk, kDominanceMargin);
      prog.set_sense(lp::ObjectiveSense::Maximize);
      for (int i = 0; i < n; ++i) prog.set_cost(blk.matrix_var(i, i), 1.0);
      out = lp::SimplexBackend(cx.simplex).solve(prog, nullptr);
      if (out.status == lp::LpStatus::Optimal) body = blk.body(out.x);
    }
    if (out.status != lp::LpStatus::Optimal) {
      ++failures;
      os << k << ',' << (compact ? "compact" : "literal") << ',' << n << ',' << dim << ",,not solved\n";
      continue;
    }
    ++solved;
    double excess = 0.0;
    for (const auto& v : body_vertices(body)) excess = std::max(excess, (projected.H * v - projected.h).maxCoeff());
    worst = std::max(worst, excess);
    if (excess > 1e-7) ++failures;
    os << k << ',' << (compact ? "compact" : "literal") << ',' << n << ',' << dim << ',' << io::num(body.matrix.trace())
       << ',' << io::num(excess) << '\n';
  }
  write_text(cx.dir / "c4" / "containment.csv", os.str());
  return {failures == 0, std::to_string(solved) + "/100 programs solved, largest vertex excess over the projection " +
                             fmt(worst) + " (limit 1e-7)"};
}

// 5. Fleet interval against the joint program --------------------------------

Outcome fleet_sum(const Context& cx) {
  auto rng = scenario_rng(cx.seed, 5);
  FleetConfig cfg;
  cfg.zones_min = 1;
  cfg.zones_max = 4;
  cfg.horizon = 4;
  const auto env = make_envelope(cfg);
  ReachOptions ro;
  ro.simplex = cx.simplex;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double worst = 0.0;
  int bad = 0;
  std::ostringstream os;
  os << io::csv_header("fleet_sum") << "instance,period,sum_lo_kw,sum_hi_kw,joint_lo_kw,joint_hi_kw\n";
  for (int k = 0; k < 20; ++k) {
    std::vector<BuildingModel> bs;
    std::vector<ReachableApprox> reach;
    while (static_cast<int>(bs.size()) < 5) {
      const int zones = 1 + static_cast<int>(rng() % 4);
      auto b = sample_building(cfg, zones, rng, "b" + std::to_string(bs.size()));
      try {
        reach.push_back(backward_sweep(b, env, ro));
        bs.push_back(std::move(b));
      } catch (const EmptyReachable&) {
      }
    }
    const int t = 1 + static_cast<int>(rng() % cfg.horizon);
    std::vector<Vector> t_prev;
    std::vector<Vector2> w;
    std::vector<AffineBody> bodies;
    std::vector<FlexInterval> ivs;
    for (std::size_t j = 0; j < bs.size(); ++j) {
      const auto& prev = reach[j].bodies[t - 1];
      Vector z(prev.dimension());
      for (int i = 0; i < z.size(); ++i) z(i) = 2.0 * uni(rng) - 1.0;
      t_prev.push_back(prev.matrix * z + prev.center);
      const auto& lo = env.lower[t - 1];
      const auto& hi = env.upper[t - 1];
      w.emplace_back(lo(0) + uni(rng) * (hi(0) - lo(0)), lo(1) + uni(rng) * (hi(1) - lo(1)));
      bodies.push_back(reach[j].bodies[t]);
      ivs.push_back(building_interval(bs[j], t, t_prev.back(), w.back(), bodies.back(), cx.simplex));
    }
    const auto sum = fleet_interval(ivs);
    const auto joint = oracle::joint_fleet_interval(bs, t, t_prev, w, bodies, cx.simplex);
    if (!joint) {
      ++bad;
      os << k << ',' << t << ',' << io::num(sum.lo) << ',' << io::num(sum.hi) << ",infeasible,\n";
      continue;
    }
    const double err = std::max(std::abs(sum.lo - joint->first), std::abs(sum.hi - joint->second));
    worst = std::max(worst, err);
    if (err > 1e-6) ++bad;
    os << k << ',' << t << ',' << io::num(sum.lo) << ',' << io::num(sum.hi) << ',' << io::num(joint->first) << ','
       << io::num(joint->second) << '\n';
  }
  write_text(cx.dir / "c5" / "fleet_sum.csv", os.str());
  return {bad == 0, "20 five-building instances, largest endpoint gap " + fmt(worst) + " kW (limit 1e-6)"};
}

// 7. Stressed toy instance --------------------------------------------------

Outcome stressed(const Context& cx) {
  const auto run = cli::run_toy_all(kDefaultTolerance);
  std::ostringstream os;
  os << io::csv_header("stressed_trace") << io::kBuildingColumns;
  const auto s = toy_stress(run.result);
  io::append_building_rows(os, 0, run.causal, s.fleet, nullptr);
  io::append_building_rows(os, 0, run.myopic, s.fleet, nullptr);
  write_text(cx.dir / "c7" / "stressed_trace.csv", os.str());
  const int myopic_bad = run.myopic.violations + run.myopic.empty_intervals;
  const int causal_bad = run.causal.violations + run.causal.empty_intervals;
  return {myopic_bad >= 1 && causal_bad == 0,
          "myopic: " + std::to_string(myopic_bad) + " infeasible building-periods (first at period " +
              std::to_string(run.myopic.first_infeasible) + "), causal: " + std::to_string(causal_bad)};
}

// 8. Envelope monotonicity --------------------------------------------------

Outcome monotone(const Context& cx) {
  auto rng = scenario_rng(cx.seed, 8);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  ReachOptions ro;
  ro.simplex = cx.simplex;
  double worst_set = 0.0, worst_interval = 0.0;
  int bad = 0;
  std::ostringstream os;
  os << io::csv_header("monotonicity")
     << "instance,zones,set_excess_c,narrow_lo_kw,narrow_hi_kw,wide_lo_kw,wide_hi_kw,interval_excess_kw\n";
  for (int k = 0; k < 20; ++k) {
    FleetConfig cfg;
    cfg.horizon = 4;
    cfg.ranges.p_max = {6.0, 10.0};
    const int zones = 1 + k % 2;
    const auto b = sample_building(cfg, zones, rng, "m" + std::to_string(k));
    ExogenousEnvelope narrow, wide;
    for (int t = 0; t < cfg.horizon; ++t) {
      const double t_out = 28.0 + 6.0 * uni(rng), hw = 0.3 + 0.7 * uni(rng);
      const double q = 0.2 + 0.4 * uni(rng), qw = 0.02 + 0.06 * uni(rng);
      narrow.lower.emplace_back(t_out - hw, q - qw);
      narrow.upper.emplace_back(t_out + hw, q + qw);
      wide.lower.emplace_back(t_out - 2 * hw, q - 2 * qw);
      wide.upper.emplace_back(t_out + 2 * hw, q + 2 * qw);
    }
    const auto exact_n = exact_backward_sweep(b, narrow);
    const auto exact_w = exact_backward_sweep(b, wide);
    double set_excess = 0.0;
    for (int t = 0; t <= b.horizon; ++t) {
      if (exact_w[t].empty) continue;
      if (exact_n[t].empty) {
        set_excess = std::numeric_limits<double>::infinity();
        break;
      }
      std::vector<Vector> samples;
      if (zones == 1) {
        const auto& p = exact_w[t];
        double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
        for (int r = 0; r < p.rows(); ++r) {
          if (p.H(r, 0) > 0) hi = std::min(hi, p.h(r) / p.H(r, 0));
          if (p.H(r, 0) < 0) lo = std::max(lo, p.h(r) / p.H(r, 0));
        }
        samples = {Vector::Constant(1, lo), Vector::Constant(1, hi)};
      } else {
        samples = oracle::boundary_samples(polygon_vertices(exact_w[t]));
      }
      for (const auto& x : samples) {
        set_excess = std::max(set_excess, std::max(0.0, (exact_n[t].H * x - exact_n[t].h).maxCoeff()));
      }
    }

    // Causal interval in period 1 from a state and input admissible for both.
    std::optional<ReachableApprox> rn, rw;
    try {
      rn = backward_sweep(b, narrow, ro);
    } catch (const EmptyReachable&) {
    }
    try {
      rw = backward_sweep(b, wide, ro);
    } catch (const EmptyReachable&) {
    }
    double interval_excess = 0.0;
    std::string cols = ",,,,";
    if (rw) {
      const Vector t0 = rw->bodies[0].center;
      const Vector2 w = (wide.lower[0] + wide.upper[0]) / 2.0;
      const auto iw = building_interval(b, 1, t0, w, rw->bodies[1], cx.simplex);
      std::optional<FlexInterval> in;
      if (rn) {
        try {
          in = building_interval(b, 1, t0, w, rn->bodies[1], cx.simplex);
        } catch (const InfeasiblePeriod&) {
        }
      }
      if (!in) {
        interval_excess = std::numeric_limits<double>::infinity();
        cols = ",," + io::num(iw.lo) + ',' + io::num(iw.hi);
      } else {
        interval_excess = std::max({0.0, in->lo - iw.lo, iw.hi - in->hi});
        cols = io::num(in->lo) + ',' + io::num(in->hi) + ',' + io::num(iw.lo) + ',' + io::num(iw.hi);
      }
    }
    worst_set = std::max(worst_set, set_excess);
    worst_interval = std::max(worst_interval, interval_excess);
    if (set_excess > 1e-6 || interval_excess > 1e-6) ++bad;
    os << k << ',' << zones << ',' << io::num(set_excess) << ',' << cols << ',' << io::num(interval_excess) << '\n';
  }
  write_text(cx.dir / "c8" / "monotonicity.csv", os.str());
  return {bad == 0, "20 instances, largest exact-set growth " + fmt(worst_set) + " C, largest interval growth " +
                        fmt(worst_interval) + " kW (limit 1e-6)"};
}

// 9. Scalability --------------------------------------------------------------

struct ScaleRun {
  cli::TimedSweep sweep;
  double online_mean = 0.0;
  int online_periods = 0;
};

/// `steps` < 0: run with the 60 s budget; otherwise exactly that many steps
/// without a budget.
ScaleRun scalability_run(const Context& cx, int steps) {
  FleetConfig cfg;
  const auto b = cli::bench_building(24, cx.seed, cfg);
  const auto env = make_envelope(cfg);
  ScaleRun r;
  if (steps < 0) {
    r.sweep = cli::timed_sweep(b, env, 60.0, cx.simplex);
  } else {
    r.sweep.bodies.resize(static_cast<std::size_t>(b.horizon) + 1);
    r.sweep.bodies[b.horizon] = terminal_body(b);
    r.sweep.completed_from = b.horizon;
    ReachOptions ro;
    ro.simplex = cx.simplex;
    lp::BasisStatus basis;
    for (int t = b.horizon; t > b.horizon - steps; --t) {
      auto step = approx_reachable_step(b, env, t, r.sweep.bodies[t], ro, basis.empty() ? nullptr : &basis);
      basis = std::move(step.basis);
      r.sweep.iterations += step.diagnostics.iterations;
      r.sweep.bodies[t - 1] = std::move(step.body);
      r.sweep.completed_from = t - 1;
    }
    r.sweep.status = r.sweep.completed_from == 0 ? "ok" : "partial";
  }
  r.online_mean = cli::online_mean_seconds(b, env, r.sweep.bodies, r.sweep.completed_from + 1, r.online_periods,
                                           cx.simplex);
  io::Json bodies = io::Json::array();
  for (int t = r.sweep.completed_from; t <= b.horizon; ++t) {
    bodies.push_back({{"boundary", t},
                      {"matrix", io::to_json(r.sweep.bodies[t].matrix)},
                      {"center", io::to_json(r.sweep.bodies[t].center)}});
  }
  fs::create_directories(cx.dir / "c9");
  io::write_json(cx.dir / "c9" / "bodies.json",
                 {{"schema_version", io::kSchemaVersion}, {"kind", "scalability_bodies"}, {"bodies", bodies}});
  return r;
}

Outcome scalability(const ScaleRun& r, int horizon) {
  const bool done = r.sweep.status == "ok";
  const bool ok = done && r.sweep.seconds < 60.0 && r.online_periods > 0 && r.online_mean < 1.0;
  return {ok, "24 zones, 24 periods: sweep " + r.sweep.status + " after " + fmt(r.sweep.seconds) + " s with " +
                  std::to_string(horizon - r.sweep.completed_from) + "/" + std::to_string(horizon) +
                  " periods done (limit 60 s), online mean " + fmt(r.online_mean) + " s over " +
                  std::to_string(r.online_periods) + " periods (limit 1 s)"};
}

// 10. Determinism -------------------------------------------------------------

Outcome identical(const fs::path& a, const fs::path& b) {
  int files = 0;
  std::vector<std::string> differing;
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  std::vector<fs::path> rel;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), a));
  }
  for (const auto& e : fs::recursive_directory_iterator(b)) {
    if (e.is_regular_file() && !fs::exists(a / fs::relative(e.path(), b))) differing.push_back(fs::relative(e.path(), b));
  }
  std::sort(rel.begin(), rel.end());
  for (const auto& r : rel) {
    ++files;
    if (!fs::exists(b / r) || slurp(a / r) != slurp(b / r)) differing.push_back(r.string());
  }
  std::string detail = std::to_string(files) + " files compared, " + std::to_string(differing.size()) + " differ";
  for (std::size_t i = 0; i < differing.size() && i < 5; ++i) detail += (i ? ", " : ": ") + differing[i];
  return {differing.empty() && files > 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string out = "acceptance_out";
  Context cx;
  app.add_option("--out", out, "Directory for the two runs")->capture_default_str();
  app.add_option("--seed", cx.seed, "Seed")->capture_default_str();
  app.add_option("--jobs", cx.jobs, "Scenario workers")->check(CLI::PositiveNumber)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const char* names[] = {"",
                         "toy containment and strict subset",
                         "fleet safety over 500 scenarios",
                         "single-zone sweep matches interval arithmetic",
                         "containment bodies inside the projection",
                         "fleet interval equals the joint program",
                         "causal intervals inside hindsight",
                         "myopic baseline fails on the stressed instance",
                         "wider envelope never enlarges sets or intervals",
                         "24-zone sweep and online solve times",
                         "identical outputs across runs"};
  std::vector<Outcome> results(11);
  auto report = [&](int c) {
    std::cout << (results[c].passed ? "PASS" : "FAIL") << "  criterion " << c << ": " << names[c] << " - "
              << results[c].detail << std::endl;
  };

  try {
    fs::remove_all(out);
    int steps = 0, horizon = 24;
    for (int round = 1; round <= 2; ++round) {
      Context rc = cx;
      rc.dir = fs::path(out) / ("run" + std::to_string(round));
      fs::create_directories(rc.dir);
      if (round == 2) std::cout << "second run for criterion 10" << std::endl;
      std::vector<Outcome> r(10);
      r[1] = toy(rc);
      const auto fr = fleet_run(rc);
      r[2] = fleet_safety(fr);
      r[3] = single_zone(rc);
      r[4] = containment(rc);
      r[5] = fleet_sum(rc);
      r[6] = hindsight_dominance(rc, fr);
      r[7] = stressed(rc);
      r[8] = monotone(rc);
      const auto sr = scalability_run(rc, round == 1 ? -1 : steps);
      r[9] = scalability(sr, horizon);
      if (round == 1) {
        steps = horizon - sr.sweep.completed_from;
        for (int c = 1; c <= 9; ++c) {
          results[c] = r[c];
          report(c);
        }
      }
    }
    results[10] = identical(fs::path(out) / "run1", fs::path(out) / "run2");
    report(10);
  } catch (const std::exception& e) {
    std::cout << "FAIL  acceptance run aborted: " << e.what() << std::endl;
    return 1;
  }
  int passed = 0;
  for (int c = 1; c <= 10; ++c) passed += results[c].passed ? 1 : 0;
  std::cout << passed << "/10 criteria passed" << std::endl;
  return passed == 10 ? 0 : 1;
}
