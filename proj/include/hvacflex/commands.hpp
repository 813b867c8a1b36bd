#pragma once

// Subcommands behind the hvacflex executable. Each returns a process exit
// code: 0 success, 2 input error, 3 infeasibility, 4 internal assertion.

#include "hvacflex/io.hpp"
#include "hvacflex/log.hpp"
#include "hvacflex/parallel.hpp"
#include "hvacflex/toy.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace hvacflex::cli {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kInputError = 2, kInfeasible = 3, kInternal = 4 };

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  int jobs = 1;
  double tolerance = kDefaultTolerance;
  std::vector<std::string> arguments;  // echoed into the manifest
};

inline lp::SimplexOptions simplex_options(double tolerance) {
  lp::SimplexOptions o;
  o.dual_tolerance = tolerance;
  o.primal_tolerance = std::min(o.primal_tolerance, tolerance);
  return o;
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Maps exceptions escaping a command body onto exit codes.
template <typename Body>
int guarded(const char* command, Body&& body) {
  try {
    return body();
  } catch (const io::ConfigError& e) {
    log::error(command, ": ", e.what());
    return kInputError;
  } catch (const EmptyReachable& e) {
    log::error(command, ": ", e.what());
    return kInfeasible;
  } catch (const std::exception& e) {
    log::error(command, ": ", e.what());
    return kInternal;
  }
}

inline io::RunConfig load_config(const CommonOptions& o) {
  if (o.config.empty()) throw io::ConfigError("--config is required");
  auto rc = io::load_run_config(o.config);
  if (o.seed) rc.seed = *o.seed;
  return rc;
}

// ---------------------------------------------------------------------------

inline int cmd_offline(const CommonOptions& o) {
  return guarded("offline", [&] {
    const auto start = std::chrono::steady_clock::now();
    const auto rc = load_config(o);
    const Fleet fleet = rc.fleet();
    ReachOptions ro;
    ro.simplex = simplex_options(o.tolerance);

    const int nb = fleet.size();
    std::vector<std::optional<ReachableApprox>> sweeps(static_cast<std::size_t>(nb));
    std::vector<std::string> failures(static_cast<std::size_t>(nb));
    const WorkerPool pool(o.jobs);
    pool.for_each(nb, [&](int k) {
      try {
        sweeps[k] = backward_sweep(fleet.buildings[k], fleet.envelopes[k], ro);
        log::info("offline: ", fleet.buildings[k].id, " (", fleet.buildings[k].zone_count(), " zones) swept in ",
                  sweeps[k]->total_seconds(), " s");
      } catch (const EmptyReachable& e) {
        failures[k] = e.what();
      }
    });

    io::RunManifest m;
    m.command = "offline";
    m.config = o.config;
    m.seed = rc.seed;
    m.out_dir = o.out;
    m.arguments = o.arguments;
    int failed = 0;
    for (int k = 0; k < nb; ++k) {
      const auto& b = fleet.buildings[k];
      if (!sweeps[k]) {
        ++failed;
        log::error("offline: ", failures[k]);
        continue;
      }
      const auto path = io::sweep_path(o.out, b.id);
      io::write_json(path, io::to_json(*sweeps[k], b, fleet.envelopes[k]));
      m.files.push_back(fs::relative(path, o.out).string());
      m.timings[b.id] = sweeps[k]->total_seconds();
    }
    m.timings["total"] = seconds_since(start);
    io::write_manifest(o.out, m);
    return failed ? kInfeasible : kOk;
  });
}

// ---------------------------------------------------------------------------

struct SimulateOptions {
  std::optional<int> scenarios;
  std::optional<std::string> policy;
};

inline std::vector<ReachableApprox> load_sweeps(const Fleet& fleet, const std::string& out) {
  std::vector<ReachableApprox> reach;
  for (int k = 0; k < fleet.size(); ++k) {
    const auto path = io::sweep_path(out, fleet.buildings[k].id);
    if (!fs::exists(path)) {
      throw io::ConfigError("missing sweep file '" + path.string() + "'; run 'hvacflex offline' with the same config first");
    }
    reach.push_back(io::sweep_from(io::read_json(path), fleet.buildings[k], fleet.envelopes[k], path.string()));
  }
  return reach;
}

/// Batch outputs without timings, so repeated runs give identical files.
inline std::vector<std::string> write_batch(const fs::path& out, const Fleet& fleet, const BatchResult& res,
                                            const BatchOptions& bo) {
  std::ostringstream bcsv, fcsv;
  bcsv << io::csv_header("building_trace") << io::kBuildingColumns;
  fcsv << io::csv_header("fleet_trace") << io::kFleetColumns;
  for (std::size_t s = 0; s < res.runs.size(); ++s) {
    const auto& run = res.runs[s];
    const auto* hind = bo.hindsight ? &run.hindsight : nullptr;
    io::append_building_rows(bcsv, static_cast<int>(s), run.causal, fleet, hind);
    io::append_fleet_rows(fcsv, static_cast<int>(s), run.causal, hind);
    if (bo.myopic) {
      io::append_building_rows(bcsv, static_cast<int>(s), run.myopic, fleet, hind);
      io::append_fleet_rows(fcsv, static_cast<int>(s), run.myopic, hind);
    }
  }
  io::write_atomic(out / "trace_buildings.csv", bcsv.str());
  io::write_atomic(out / "trace_fleet.csv", fcsv.str());
  io::Json metrics = {{"schema_version", io::kSchemaVersion},
                      {"kind", "metrics"},
                      {"scenarios", bo.scenarios},
                      {"seed", bo.seed},
                      {"policy", bo.policy.name()},
                      {"causal", io::to_json(res.causal)},
                      {"hindsight_excess_kw", res.hindsight_excess}};
  if (bo.myopic) metrics["myopic"] = io::to_json(res.myopic);
  io::write_json(out / "metrics.json", metrics);
  return {"trace_buildings.csv", "trace_fleet.csv", "metrics.json"};
}

inline int cmd_simulate(const CommonOptions& o, const SimulateOptions& so) {
  return guarded("simulate", [&] {
    const auto start = std::chrono::steady_clock::now();
    const auto rc = load_config(o);
    const Fleet fleet = rc.fleet();
    const auto reach = load_sweeps(fleet, o.out);

    BatchOptions bo;
    bo.scenarios = so.scenarios.value_or(rc.scenarios);
    if (bo.scenarios < 1) throw io::ConfigError("--scenarios must be at least 1");
    try {
      bo.policy = SignalPolicy::parse(so.policy.value_or(rc.policy));
    } catch (const std::invalid_argument& e) {
      throw io::ConfigError(e.what());
    }
    bo.seed = rc.seed;
    bo.jobs = o.jobs;
    bo.realtime.simplex = simplex_options(o.tolerance);
    bo.realtime.signal_tolerance = o.tolerance;
    const auto res = run_batch(fleet, reach, bo);
    const double batch_s = seconds_since(start);

    io::RunManifest m;
    m.command = "simulate";
    m.config = o.config;
    m.seed = rc.seed;
    m.out_dir = o.out;
    m.arguments = o.arguments;
    m.files = write_batch(o.out, fleet, res, bo);
    m.timings["batch"] = batch_s;
    m.timings["total"] = seconds_since(start);
    io::write_manifest(o.out, m);

    log::info("simulate: ", bo.scenarios, " scenarios, causal infeasible ratio ", res.causal.infeasible_ratio,
              ", myopic infeasible ratio ", res.myopic.infeasible_ratio, ", flexibility ratio ", res.causal.ratio);
    if (res.causal.violations > 0 || res.causal.empty_intervals > 0) {
      log::error("simulate: causal runs left the feasible region (", res.causal.violations, " violations, ",
                 res.causal.empty_intervals, " empty intervals)");
      return kInternal;
    }
    return kOk;
  });
}

// ---------------------------------------------------------------------------

inline io::Json toy_report(const ToyResult& r, const SimulationTrace& causal, const SimulationTrace& myopic,
                           const Vector& stressed) {
  io::Json checks = io::Json::array();
  for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return {{"schema_version", io::kSchemaVersion},
          {"kind", "toy_report"},
          {"checks", checks},
          {"passed", r.passed()},
          {"stressed_state_period_3", io::to_json(stressed)},
          {"causal_first_infeasible_period", causal.first_infeasible},
          {"myopic_first_infeasible_period", myopic.first_infeasible}};
}

/// Polygon files for periods 1..4 and the report. Returns the written files.
inline std::vector<std::string> write_toy(const fs::path& out, const ToyResult& r, const SimulationTrace& causal,
                                          const SimulationTrace& myopic) {
  std::vector<std::string> files;
  for (int t = 1; t <= r.building.horizon; ++t) {
    std::ostringstream os;
    os << io::csv_header("toy_polygons") << "set,vertex,temp_a_c,temp_b_c\n";
    auto emit = [&](const char* name, const std::vector<Vector>& pts) {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        os << name << ',' << i << ',' << io::num(pts[i](0)) << ',' << io::num(pts[i](1)) << '\n';
      }
    };
    emit("exact", polygon_vertices(r.exact[t]));
    emit("approx", polygon_vertices(body_hrep(r.approx.bodies[t])));
    emit("comfort", polygon_vertices(r.comfort[t]));
    const std::string name = "toy_period_" + std::to_string(t) + ".csv";
    io::write_atomic(out / name, os.str());
    files.push_back(name);
  }
  io::write_json(out / "toy_report.json", toy_report(r, causal, myopic, toy_stressed_state(r)));
  files.push_back("toy_report.json");
  return files;
}

struct ToyRun {
  ToyResult result;
  SimulationTrace causal;
  SimulationTrace myopic;
};

inline ToyRun run_toy_all(double tolerance) {
  ReachOptions ro;
  ro.simplex = simplex_options(tolerance);
  ToyRun run;
  run.result = run_toy(tolerance, ro);
  const auto s = toy_stress(run.result);
  RealtimeOptions opt;
  opt.simplex = ro.simplex;
  opt.signal_tolerance = tolerance;
  opt.method = Method::Causal;
  run.causal = run_realtime(s.fleet, s.reach, s.scenario, s.policy, std::mt19937_64(1), opt);
  opt.method = Method::Myopic;
  run.myopic = run_realtime(s.fleet, s.reach, s.scenario, s.policy, std::mt19937_64(1), opt);
  return run;
}

inline int cmd_toy(const CommonOptions& o) {
  return guarded("toy", [&] {
    const auto start = std::chrono::steady_clock::now();
    const auto run = run_toy_all(o.tolerance);
    io::RunManifest m;
    m.command = "toy";
    m.out_dir = o.out;
    m.arguments = o.arguments;
    m.files = write_toy(o.out, run.result, run.causal, run.myopic);
    m.timings["total"] = seconds_since(start);
    io::write_manifest(o.out, m);
    for (const auto& c : run.result.checks) {
      log::info("toy: ", c.passed ? "pass" : "FAIL", " - ", c.name, c.detail.empty() ? "" : " (" + c.detail + ")");
    }
    return run.result.passed() ? kOk : kInternal;
  });
}

// ---------------------------------------------------------------------------

struct BenchRow {
  int zones = 0;
  std::string status;  // ok, timeout, empty
  double offline_s = 0.0;
  int periods_timed = 0;
  double online_mean_s = 0.0;
  long iterations = 0;
};

/// One random building with `zones` zones, drawn from the default ranges.
inline BuildingModel bench_building(int zones, std::uint64_t seed, FleetConfig cfg = {}) {
  auto rng = scenario_rng(seed, static_cast<std::uint64_t>(zones));
  return sample_building(cfg, zones, rng, "bench" + std::to_string(zones));
}

/// Mean time of one interval computation (both endpoints) per period, at the
/// center of the previous body and the midpoint of the envelope.
inline double online_mean_seconds(const BuildingModel& b, const ExogenousEnvelope& env,
                                  const std::vector<AffineBody>& bodies, int first_period, int& timed,
                                  const lp::SimplexOptions& opt) {
  double total = 0.0;
  timed = 0;
  for (int t = std::max(1, first_period); t <= b.horizon; ++t) {
    const Vector2 w = (env.lower[t - 1] + env.upper[t - 1]) / 2.0;
    const auto start = std::chrono::steady_clock::now();
    building_interval(b, t, bodies[t - 1].center, w, bodies[t], opt);
    total += seconds_since(start);
    ++timed;
  }
  return timed ? total / timed : 0.0;
}

/// Backward sweep with a wall-clock budget; bodies that were not reached stay
/// empty and `completed_from` is the earliest boundary reached.
struct TimedSweep {
  std::string status = "ok";
  double seconds = 0.0;
  long iterations = 0;
  std::vector<AffineBody> bodies;  // [0..N]
  int completed_from = 0;
};

inline TimedSweep timed_sweep(const BuildingModel& b, const ExogenousEnvelope& env, double budget,
                              const lp::SimplexOptions& simplex) {
  TimedSweep s;
  s.bodies.resize(static_cast<std::size_t>(b.horizon) + 1);
  s.bodies[b.horizon] = terminal_body(b);
  s.completed_from = b.horizon;
  ReachOptions ro;
  ro.simplex = simplex;
  lp::BasisStatus basis;
  const auto start = std::chrono::steady_clock::now();
  try {
    for (int t = b.horizon; t >= 1; --t) {
      if (budget > 0.0) {
        const double left = budget - seconds_since(start);
        if (left <= 0.0) throw lp::SolveTimeLimit("budget exhausted");
        ro.simplex.time_limit = left;
      }
      auto step = approx_reachable_step(b, env, t, s.bodies[t], ro, basis.empty() ? nullptr : &basis);
      basis = std::move(step.basis);
      s.iterations += step.diagnostics.iterations;
      s.bodies[t - 1] = std::move(step.body);
      s.completed_from = t - 1;
    }
  } catch (const lp::SolveTimeLimit&) {
    s.status = "timeout";
  } catch (const EmptyReachable&) {
    s.status = "empty";
  }
  s.seconds = seconds_since(start);
  return s;
}

inline BenchRow bench_one(int zones, std::uint64_t seed, double budget, const lp::SimplexOptions& simplex) {
  FleetConfig cfg;
  const auto b = bench_building(zones, seed, cfg);
  const auto env = make_envelope(cfg);
  BenchRow row;
  row.zones = zones;
  const auto sweep = timed_sweep(b, env, budget, simplex);
  row.status = sweep.status;
  row.offline_s = sweep.seconds;
  row.iterations = sweep.iterations;
  // Periods whose previous body is known.
  row.online_mean_s = online_mean_seconds(b, env, sweep.bodies, sweep.completed_from + 1, row.periods_timed, simplex);
  return row;
}

struct BenchOptions {
  std::vector<int> zones{4, 8, 12, 24};
  double budget_s = 600.0;  // per sweep
};

inline int cmd_bench(const CommonOptions& o, BenchOptions bench) {
  return guarded("bench", [&] {
    const auto start = std::chrono::steady_clock::now();
    std::uint64_t seed = o.seed.value_or(1);
    if (!o.config.empty()) {
      const auto j = io::read_json(o.config);
      io::check_schema(j, o.config);
      const auto bj = io::field_or<io::Json>(j, "bench", io::Json::object(), o.config);
      if (bench.zones.empty() || bj.contains("zones")) bench.zones = io::field<std::vector<int>>(bj, "zones", o.config);
      bench.budget_s = io::field_or<double>(bj, "time_budget_s", bench.budget_s, o.config);
      if (!o.seed) seed = io::field_or<std::uint64_t>(j, "seed", seed, o.config);
    }
    if (bench.zones.empty()) bench.zones = BenchOptions{}.zones;
    for (int z : bench.zones) {
      if (z < 1) throw io::ConfigError("zone counts must be positive");
    }
    std::ostringstream os;
    os << io::csv_header("bench")
       << "zones,status,offline_s,simplex_iterations,periods_timed,online_mean_s\n";
    for (int z : bench.zones) {
      const auto row = bench_one(z, seed, bench.budget_s, simplex_options(o.tolerance));
      log::info("bench: ", z, " zones ", row.status, " offline ", row.offline_s, " s, online mean ", row.online_mean_s,
                " s over ", row.periods_timed, " periods");
      os << row.zones << ',' << row.status << ',' << io::num(row.offline_s) << ',' << row.iterations << ','
         << row.periods_timed << ',' << io::num(row.online_mean_s) << '\n';
    }
    io::write_atomic(fs::path(o.out) / "bench.csv", os.str());
    io::RunManifest m;
    m.command = "bench";
    m.config = o.config;
    m.seed = seed;
    m.out_dir = o.out;
    m.arguments = o.arguments;
    m.files = {"bench.csv"};
    m.timings["total"] = seconds_since(start);
    io::write_manifest(o.out, m);
    return kOk;
  });
}

}  // namespace hvacflex::cli
