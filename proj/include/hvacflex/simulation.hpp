#pragma once

// Forward real-time loop over a fleet, the hindsight and myopic comparators,
// and batch metrics.

#include "hvacflex/aggregation.hpp"
#include "hvacflex/fleet.hpp"
#include "hvacflex/parallel.hpp"
#include "hvacflex/reachability.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hvacflex {

inline constexpr double kViolationTolerance = 1e-6;

enum class PolicyKind { UniformLambda, ExtremesAlternating, ConstantFraction };

/// Regulation signal drawn inside the fleet interval.
struct SignalPolicy {
  PolicyKind kind = PolicyKind::UniformLambda;
  double fraction = 0.5;  // ConstantFraction only

  static SignalPolicy uniform() { return {PolicyKind::UniformLambda, 0.0}; }
  static SignalPolicy extremes() { return {PolicyKind::ExtremesAlternating, 0.0}; }
  static SignalPolicy constant(double f) {
    if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("constant-fraction policy needs f in [0, 1]");
    return {PolicyKind::ConstantFraction, f};
  }

  /// "uniform", "extremes", or "constant:<f>".
  static SignalPolicy parse(const std::string& s) {
    if (s == "uniform") return uniform();
    if (s == "extremes") return extremes();
    const std::string prefix = "constant:";
    if (s.rfind(prefix, 0) == 0) {
      std::size_t used = 0;
      const std::string num = s.substr(prefix.size());
      double f = 0.0;
      try {
        f = std::stod(num, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != num.size()) throw std::invalid_argument("bad policy fraction in '" + s + "'");
      return constant(f);
    }
    throw std::invalid_argument("unknown signal policy '" + s + "' (uniform, extremes, constant:<f>)");
  }

  std::string name() const {
    switch (kind) {
      case PolicyKind::UniformLambda: return "uniform";
      case PolicyKind::ExtremesAlternating: return "extremes";
      case PolicyKind::ConstantFraction: {
        char buf[32];
        const auto end = std::to_chars(buf, buf + sizeof buf, fraction).ptr;
        return "constant:" + std::string(buf, end);
      }
    }
    return "?";
  }

  /// Odd periods take the lower endpoint under ExtremesAlternating.
  double draw(const FleetInterval& iv, int t, std::mt19937_64& rng) const {
    double f = fraction;
    if (kind == PolicyKind::UniformLambda) f = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (kind == PolicyKind::ExtremesAlternating) f = t % 2 == 1 ? 0.0 : 1.0;
    if (f == 0.0) return iv.lo;
    if (f == 1.0) return iv.hi;
    return iv.lo + f * (iv.hi - iv.lo);
  }
};

enum class Method { Causal, Myopic };

inline std::string to_string(Method m) { return m == Method::Causal ? "causal" : "myopic"; }

struct BuildingStep {
  double lo = 0.0;
  double hi = 0.0;
  bool empty_interval = false;  // no dispatch met the period's constraints
  Vector power;
  Vector temperature;           // state after the period
  double violation = 0.0;       // comfort or power limit excess of the realized state
};

struct PeriodRecord {
  int period = 0;
  double lo = 0.0;  // fleet interval over buildings with a nonempty interval
  double hi = 0.0;
  double signal = 0.0;
  double lambda = 0.0;
  double achieved = 0.0;
  double tracking_error = 0.0;
  std::vector<BuildingStep> buildings;
  bool feasible = true;
};

struct SimulationTrace {
  Method method = Method::Causal;
  std::vector<PeriodRecord> periods;
  int violations = 0;        // building-periods with a limit violation
  int empty_intervals = 0;   // building-periods without a feasible dispatch
  int first_infeasible = 0;  // first infeasible period, 0 when none
  double max_tracking_error = 0.0;

  bool feasible() const { return first_infeasible == 0; }
};

struct RealtimeOptions {
  Method method = Method::Causal;
  double violation_tolerance = kViolationTolerance;
  double signal_tolerance = kDefaultTolerance;
  lp::SimplexOptions simplex{};
  const WorkerPool* pool = nullptr;  // building-level parallelism within a period
};

/// Dispatch minimizing the total comfort-band excess; used once a building
/// has no feasible dispatch, so the run can continue and be recorded.
inline Dispatch recovery_dispatch(const BuildingModel& b, int t, const Vector& t_prev, const Vector2& w,
                                  const lp::SimplexOptions& opt = {}) {
  const auto d = assemble_period_matrices(b, t);
  const int n = b.zone_count();
  lp::LinearProgram prog;
  const int temp = prog.add_variables(n);
  const int power = prog.add_variables(n);
  const int slack = prog.add_variables(n, 0.0, lp::kInfinity);
  const Vector p_lo = d.power_lower(), p_hi = d.power_upper();
  const Vector t_lo = d.temperature_lower(), t_hi = d.temperature_upper();
  for (int i = 0; i < n; ++i) {
    prog.set_bounds(power + i, p_lo(i), p_hi(i));
    prog.set_cost(slack + i, 1.0);
  }
  const Vector rhs = d.b_eq - d.a_eq1 * t_prev - d.a_eq4 * w;
  for (int i = 0; i < n; ++i) {
    const int r = prog.add_row(lp::RowSense::Equal, rhs(i));
    for (int j = 0; j < n; ++j) {
      prog.add_entry(r, temp + j, d.a_eq2(i, j));
      prog.add_entry(r, power + j, d.a_eq3(i, j));
    }
    prog.add_constraint({{temp + i, 1.0}, {slack + i, -1.0}}, lp::RowSense::LessEqual, t_hi(i));
    prog.add_constraint({{temp + i, 1.0}, {slack + i, 1.0}}, lp::RowSense::GreaterEqual, t_lo(i));
  }
  const auto out = lp::SimplexBackend(opt).solve(prog);
  if (out.status != lp::LpStatus::Optimal) throw std::logic_error("recovery_dispatch: relaxed program not solvable");
  Dispatch dsp{Vector(n), Vector(n)};
  for (int i = 0; i < n; ++i) {
    dsp.temperature(i) = out.x[temp + i];
    dsp.power(i) = out.x[power + i];
  }
  return dsp;
}

/// Runs periods 1..N forward. Violations and empty intervals are recorded and
/// the run continues.
inline SimulationTrace run_realtime(const Fleet& fleet, const std::vector<ReachableApprox>& reach,
                                    const Scenario& scenario, const SignalPolicy& policy, std::mt19937_64 policy_rng,
                                    const RealtimeOptions& opt = {}) {
  const int nb = fleet.size();
  if (nb == 0) throw std::invalid_argument("run_realtime: empty fleet");
  if (static_cast<int>(scenario.t0.size()) != nb || static_cast<int>(scenario.w.size()) != nb) {
    throw std::invalid_argument("run_realtime: scenario does not match fleet");
  }
  if (opt.method == Method::Causal && static_cast<int>(reach.size()) != nb) {
    throw std::invalid_argument("run_realtime: missing reachable sets");
  }
  const int horizon = fleet.buildings.front().horizon;
  for (const auto& b : fleet.buildings) {
    if (b.horizon != horizon) throw std::invalid_argument("run_realtime: buildings disagree on horizon");
  }
  const WorkerPool serial(1);
  const WorkerPool& pool = opt.pool ? *opt.pool : serial;

  SimulationTrace trace;
  trace.method = opt.method;
  std::vector<Vector> state = scenario.t0;
  std::vector<FlexInterval> intervals(static_cast<std::size_t>(nb));
  std::vector<char> empty(static_cast<std::size_t>(nb));
  for (int t = 1; t <= horizon; ++t) {
    pool.for_each(nb, [&](int k) {
      const auto& b = fleet.buildings[k];
      const Vector2& w = scenario.w[k][t - 1];
      empty[k] = 0;
      try {
        intervals[k] = opt.method == Method::Causal
                           ? building_interval(b, t, state[k], w, reach[k].bodies[t], opt.simplex)
                           : myopic_interval(b, t, state[k], w, opt.simplex);
      } catch (const InfeasiblePeriod&) {
        empty[k] = 1;
      }
    });

    PeriodRecord rec;
    rec.period = t;
    rec.buildings.resize(static_cast<std::size_t>(nb));
    std::vector<FlexInterval> live;
    std::vector<int> live_index;
    for (int k = 0; k < nb; ++k) {
      if (empty[k]) continue;
      live.push_back(intervals[k]);
      live_index.push_back(k);
    }
    std::vector<Dispatch> commands(static_cast<std::size_t>(nb));
    if (!live.empty()) {
      const auto agg = fleet_interval(live);
      rec.lo = agg.lo;
      rec.hi = agg.hi;
      rec.signal = policy.draw(agg, t, policy_rng);
      const auto dis = disaggregate(rec.signal, live, opt.signal_tolerance);
      rec.lambda = dis.lambda;
      rec.achieved = dis.achieved;
      rec.tracking_error = std::abs(dis.achieved - rec.signal);
      for (std::size_t i = 0; i < live.size(); ++i) commands[live_index[i]] = dis.commands[i];
    }
    pool.for_each(nb, [&](int k) {
      if (empty[k]) commands[k] = recovery_dispatch(fleet.buildings[k], t, state[k], scenario.w[k][t - 1], opt.simplex);
    });

    for (int k = 0; k < nb; ++k) {
      const auto& b = fleet.buildings[k];
      auto& step = rec.buildings[k];
      step.empty_interval = empty[k] != 0;
      if (!step.empty_interval) {
        step.lo = intervals[k].lo;
        step.hi = intervals[k].hi;
      }
      step.power = commands[k].power;
      step.temperature = simulate_step(b, t, state[k], step.power, scenario.w[k][t - 1]);
      step.violation = limit_violation(assemble_period_matrices(b, t), step.temperature, step.power);
      const bool violated = step.violation > opt.violation_tolerance;
      if (violated) ++trace.violations;
      if (step.empty_interval) ++trace.empty_intervals;
      if (violated || step.empty_interval) rec.feasible = false;
      state[k] = step.temperature;
    }
    if (rec.tracking_error > opt.violation_tolerance) rec.feasible = false;
    trace.max_tracking_error = std::max(trace.max_tracking_error, rec.tracking_error);
    if (!rec.feasible && trace.first_infeasible == 0) trace.first_infeasible = t;
    trace.periods.push_back(std::move(rec));
  }
  return trace;
}

class InfeasibleHindsight : public std::runtime_error {
 public:
  InfeasibleHindsight(const std::string& building, int period)
      : std::runtime_error("building '" + building + "': no feasible remaining-horizon trajectory from the state at period " +
                           std::to_string(period)) {}
};

/// Min and max of the building's period-t power over full trajectories of the
/// remaining horizon at the realized inputs, starting from t_prev.
inline FleetInterval hindsight_building_interval(const BuildingModel& b, const std::vector<Vector2>& w, int t,
                                                 const Vector& t_prev, const lp::SimplexOptions& opt = {}) {
  check_period(b, t);
  const int n = b.zone_count();
  lp::LinearProgram prog;
  int prev_temp = -1;
  int first_power = -1;
  for (int s = t; s <= b.horizon; ++s) {
    const auto d = assemble_period_matrices(b, s);
    const int temp = prog.add_variables(n);
    const int power = prog.add_variables(n);
    if (s == t) first_power = power;
    const Vector t_lo = d.temperature_lower(), t_hi = d.temperature_upper();
    const Vector p_lo = d.power_lower(), p_hi = d.power_upper();
    for (int i = 0; i < n; ++i) {
      prog.set_bounds(temp + i, t_lo(i), t_hi(i));
      prog.set_bounds(power + i, p_lo(i), p_hi(i));
    }
    Vector rhs = d.b_eq - d.a_eq4 * w.at(static_cast<std::size_t>(s - 1));
    if (s == t) rhs -= d.a_eq1 * t_prev;
    for (int i = 0; i < n; ++i) {
      const int r = prog.add_row(lp::RowSense::Equal, rhs(i));
      for (int j = 0; j < n; ++j) {
        if (s > t) prog.add_entry(r, prev_temp + j, d.a_eq1(i, j));
        prog.add_entry(r, temp + j, d.a_eq2(i, j));
        prog.add_entry(r, power + j, d.a_eq3(i, j));
      }
    }
    prev_temp = temp;
  }
  for (int i = 0; i < n; ++i) prog.set_cost(first_power + i, 1.0);
  const lp::SimplexBackend solver(opt);
  prog.set_sense(lp::ObjectiveSense::Minimize);
  const auto lo = solver.solve(prog);
  if (lo.status != lp::LpStatus::Optimal) throw InfeasibleHindsight(b.id, t);
  prog.set_sense(lp::ObjectiveSense::Maximize);
  const auto hi = solver.solve(prog, &lo.basis);
  if (hi.status != lp::LpStatus::Optimal) throw InfeasibleHindsight(b.id, t);
  return {lo.objective, std::max(lo.objective, hi.objective)};
}

/// Per-building hindsight intervals at the states a trace passed through:
/// result[t - 1][k].
inline std::vector<std::vector<FleetInterval>> hindsight_series(const Fleet& fleet, const Scenario& scenario,
                                                                const SimulationTrace& trace,
                                                                const lp::SimplexOptions& opt = {}) {
  const int nb = fleet.size();
  std::vector<std::vector<FleetInterval>> out;
  for (std::size_t p = 0; p < trace.periods.size(); ++p) {
    const int t = trace.periods[p].period;
    std::vector<FleetInterval> row(static_cast<std::size_t>(nb));
    for (int k = 0; k < nb; ++k) {
      const Vector& prev = p == 0 ? scenario.t0[k] : trace.periods[p - 1].buildings[k].temperature;
      row[k] = hindsight_building_interval(fleet.buildings[k], scenario.w[k], t, prev, opt);
    }
    out.push_back(std::move(row));
  }
  return out;
}

struct Metrics {
  int scenarios = 0;
  int infeasible_scenarios = 0;
  int violations = 0;       // building-periods, summed over the batch
  int empty_intervals = 0;  // building-periods, summed over the batch
  double infeasible_ratio = 0.0;
  double area = 0.0;            // kW·h, mean over the batch
  double hindsight_area = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();  // area / hindsight_area
  std::vector<double> mean_lo;  // per period
  std::vector<double> mean_hi;
  double max_tracking_error = 0.0;
};

/// `hindsight` may be empty; otherwise one series per trace.
inline Metrics compute_metrics(const std::vector<SimulationTrace>& traces,
                               const std::vector<std::vector<std::vector<FleetInterval>>>& hindsight, double dt) {
  if (traces.empty()) throw std::invalid_argument("compute_metrics: empty batch");
  if (!hindsight.empty() && hindsight.size() != traces.size()) {
    throw std::invalid_argument("compute_metrics: hindsight series do not match traces");
  }
  Metrics m;
  m.scenarios = static_cast<int>(traces.size());
  const std::size_t periods = traces.front().periods.size();
  m.mean_lo.assign(periods, 0.0);
  m.mean_hi.assign(periods, 0.0);
  double area = 0.0, hind = 0.0;
  for (std::size_t s = 0; s < traces.size(); ++s) {
    const auto& tr = traces[s];
    if (!tr.feasible()) ++m.infeasible_scenarios;
    m.violations += tr.violations;
    m.empty_intervals += tr.empty_intervals;
    m.max_tracking_error = std::max(m.max_tracking_error, tr.max_tracking_error);
    for (std::size_t p = 0; p < tr.periods.size() && p < periods; ++p) {
      const auto& rec = tr.periods[p];
      area += (rec.hi - rec.lo) * dt;
      m.mean_lo[p] += rec.lo;
      m.mean_hi[p] += rec.hi;
      if (!hindsight.empty()) {
        for (const auto& iv : hindsight[s][p]) hind += (iv.hi - iv.lo) * dt;
      }
    }
  }
  const double count = static_cast<double>(traces.size());
  for (std::size_t p = 0; p < periods; ++p) {
    m.mean_lo[p] /= count;
    m.mean_hi[p] /= count;
  }
  m.area = area / count;
  m.infeasible_ratio = m.infeasible_scenarios / count;
  if (!hindsight.empty()) {
    m.hindsight_area = hind / count;
    m.ratio = hind > 0.0 ? area / hind : std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

struct BatchOptions {
  int scenarios = 500;
  std::uint64_t seed = 1;
  SignalPolicy policy{};
  bool hindsight = true;
  bool myopic = true;
  RealtimeOptions realtime{};  // method and pool are set per run
  int jobs = 1;                // scenario-level workers
};

struct ScenarioRun {
  Scenario scenario;
  SimulationTrace causal;
  SimulationTrace myopic;
  std::vector<std::vector<FleetInterval>> hindsight;  // at the causal states, [t - 1][k]
  double hindsight_excess = 0.0;  // largest amount a causal endpoint lies outside hindsight
};

struct BatchResult {
  std::vector<ScenarioRun> runs;
  Metrics causal;
  Metrics myopic;
  double hindsight_excess = 0.0;
};

/// Monte Carlo batch. Scenario i draws from its own stream, so results do not
/// depend on the number of workers.
inline BatchResult run_batch(const Fleet& fleet, const std::vector<ReachableApprox>& reach, const BatchOptions& opt) {
  if (opt.scenarios < 1) throw std::invalid_argument("run_batch: need at least one scenario");
  BatchResult out;
  out.runs.resize(static_cast<std::size_t>(opt.scenarios));
  const WorkerPool pool(opt.jobs);
  pool.for_each(opt.scenarios, [&](int i) {
    auto rng = scenario_rng(opt.seed, static_cast<std::uint64_t>(i));
    auto& run = out.runs[i];
    run.scenario = sample_scenario(fleet, reach, rng);
    RealtimeOptions ro = opt.realtime;
    ro.pool = nullptr;
    ro.method = Method::Causal;
    run.causal = run_realtime(fleet, reach, run.scenario, opt.policy, rng, ro);
    if (opt.myopic) {
      ro.method = Method::Myopic;
      run.myopic = run_realtime(fleet, reach, run.scenario, opt.policy, rng, ro);
    }
    if (opt.hindsight) {
      run.hindsight = hindsight_series(fleet, run.scenario, run.causal, ro.simplex);
      for (std::size_t p = 0; p < run.hindsight.size(); ++p) {
        for (std::size_t k = 0; k < run.hindsight[p].size(); ++k) {
          const auto& c = run.causal.periods[p].buildings[k];
          if (c.empty_interval) continue;
          const auto& h = run.hindsight[p][k];
          run.hindsight_excess = std::max({run.hindsight_excess, h.lo - c.lo, c.hi - h.hi});
        }
      }
    }
  });
  std::vector<SimulationTrace> causal, myopic;
  std::vector<std::vector<std::vector<FleetInterval>>> hind;
  for (const auto& r : out.runs) {
    causal.push_back(r.causal);
    if (opt.myopic) myopic.push_back(r.myopic);
    if (opt.hindsight) hind.push_back(r.hindsight);
    out.hindsight_excess = std::max(out.hindsight_excess, r.hindsight_excess);
  }
  const double dt = fleet.buildings.front().dt;
  out.causal = compute_metrics(causal, hind, dt);
  if (opt.myopic) out.myopic = compute_metrics(myopic, hind, dt);
  return out;
}

}  // namespace hvacflex
