#pragma once

// Online stage for one period: per-building power intervals, their fleet sum,
// and the shared-factor dispatch back to zones.

#include "hvacflex/feasible_set.hpp"
#include "hvacflex/lp/simplex.hpp"
#include "hvacflex/polytope.hpp"
#include "hvacflex/thermal.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hvacflex {

inline constexpr double kDefaultTolerance = 1e-7;
inline constexpr double kLambdaDenominator = 1e-9;  // narrower fleets dispatch the lower witnesses

struct Dispatch {
  Vector temperature;
  Vector power;
};

struct FlexInterval {
  double lo = 0.0;
  double hi = 0.0;
  Dispatch witness_lo;
  Dispatch witness_hi;
  std::string building;
  int period = 0;

  double width() const { return hi - lo; }
};

class InfeasiblePeriod : public std::runtime_error {
 public:
  InfeasiblePeriod(std::string building, int period)
      : std::runtime_error(message(building, period)), building_(std::move(building)), period_(period) {}

  const std::string& building() const { return building_; }
  int period() const { return period_; }

 private:
  static std::string message(const std::string& building, int period) {
    std::ostringstream os;
    os << "building '" << building << "': no feasible dispatch in period " << period;
    return os.str();
  }
  std::string building_;
  int period_;
};

class SignalOutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Min and max of the building's total power over the per-period block, as two
/// independent programs. Throws InfeasiblePeriod when the block is empty.
inline FlexInterval building_interval(const BuildingModel& b, int t, const Vector& t_prev, const Vector2& w,
                                      const AffineBody& body, const lp::SimplexOptions& opt = {}) {
  auto prog = per_period_feasible(b, t, t_prev, w, body);
  const int n = prog.block.n;
  for (int i = 0; i < n; ++i) prog.lp.set_cost(prog.block.power + i, 1.0);
  const lp::SimplexBackend solver(opt);

  FlexInterval out;
  out.building = b.id;
  out.period = t;
  prog.lp.set_sense(lp::ObjectiveSense::Minimize);
  const auto lo = solver.solve(prog.lp);
  if (lo.status != lp::LpStatus::Optimal) throw InfeasiblePeriod(b.id, t);
  prog.lp.set_sense(lp::ObjectiveSense::Maximize);
  const auto hi = solver.solve(prog.lp, &lo.basis);
  if (hi.status != lp::LpStatus::Optimal) throw InfeasiblePeriod(b.id, t);

  out.witness_lo = {prog.block.temperatures(lo.x), prog.block.powers(lo.x)};
  out.witness_hi = {prog.block.temperatures(hi.x), prog.block.powers(hi.x)};
  out.lo = out.witness_lo.power.sum();
  out.hi = out.witness_hi.power.sum();
  if (out.hi < out.lo) {
    // Both endpoints are the same point up to round-off.
    out.hi = out.lo;
    out.witness_hi = out.witness_lo;
  }
  return out;
}

/// Interval with only the current comfort band guarding the next state.
inline FlexInterval myopic_interval(const BuildingModel& b, int t, const Vector& t_prev, const Vector2& w,
                                    const lp::SimplexOptions& opt = {}) {
  const auto d = assemble_period_matrices(b, t);
  return building_interval(b, t, t_prev, w, box_body(d.temperature_lower(), d.temperature_upper()), opt);
}

struct FleetInterval {
  double lo = 0.0;
  double hi = 0.0;
};

inline FleetInterval fleet_interval(const std::vector<FlexInterval>& intervals) {
  if (intervals.empty()) throw std::invalid_argument("fleet_interval: no buildings");
  FleetInterval out;
  for (const auto& iv : intervals) {
    if (iv.period != intervals.front().period) throw std::invalid_argument("fleet_interval: mixed periods");
    out.lo += iv.lo;
    out.hi += iv.hi;
  }
  return out;
}

struct DisaggregationResult {
  double lambda = 0.0;
  std::vector<Dispatch> commands;  // one per building, in input order
  double achieved = 0.0;           // kW
};

/// One shared factor for every building: each dispatch is the same convex
/// combination of its two witnesses.
inline DisaggregationResult disaggregate(double p_reg, const std::vector<FlexInterval>& intervals,
                                         double tolerance = kDefaultTolerance) {
  const auto agg = fleet_interval(intervals);
  if (p_reg < agg.lo - tolerance || p_reg > agg.hi + tolerance) {
    std::ostringstream os;
    os << "disaggregate: signal " << p_reg << " kW outside [" << agg.lo << ", " << agg.hi << "]";
    throw SignalOutOfRange(os.str());
  }
  DisaggregationResult out;
  const double width = agg.hi - agg.lo;
  out.lambda = width > kLambdaDenominator ? std::clamp((p_reg - agg.lo) / width, 0.0, 1.0) : 0.0;
  const double l = out.lambda;
  out.commands.reserve(intervals.size());
  for (const auto& iv : intervals) {
    Dispatch c;
    c.temperature = (1.0 - l) * iv.witness_lo.temperature + l * iv.witness_hi.temperature;
    c.power = (1.0 - l) * iv.witness_lo.power + l * iv.witness_hi.power;
    out.achieved += c.power.sum();
    out.commands.push_back(std::move(c));
  }
  return out;
}

}  // namespace hvacflex
