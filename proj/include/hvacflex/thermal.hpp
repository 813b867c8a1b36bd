#pragma once

// Multi-zone RC thermal model and its per-period constraint matrices.
//
// Units: kW, kWh/°C, °C/kW, hours. The model is written for cooling: a
// positive HVAC power removes heat. Heating is expressed with negative power
// limits.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hvacflex {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vector2 = Eigen::Vector2d;

struct ZoneParams {
  double capacitance = 1.0;  // kWh/°C
  double r_out = 1.0;        // °C/kW
  double eta_rad = 0.0;      // kW per kW/m²
  double eta_ac = 1.0;       // kW of heat removed per kW of electric power
  bool ambient = true;       // exchanges heat with outdoor air
  bool solar = false;        // receives solar gains
  bool hvac = true;          // served by an HVAC unit
  double p_min = 0.0;        // kW
  double p_max = 0.0;        // kW
  std::vector<double> setpoint;   // °C, one per period
  std::vector<double> tolerance;  // °C, one per period
};

/// Zone thermal coupling. Stores both (i, j) and (j, i) so that symmetry can be
/// checked; `connect` keeps them consistent.
class Coupling {
 public:
  void connect(int i, int j, double r_in) {
    resistance_[{i, j}] = r_in;
    resistance_[{j, i}] = r_in;
  }
  /// Sets a single direction. Only meant for loading raw data that may be
  /// asymmetric; validate_building reports the mismatch.
  void set_directed(int i, int j, double r_in) { resistance_[{i, j}] = r_in; }

  const std::map<std::pair<int, int>, double>& entries() const { return resistance_; }
  bool empty() const { return resistance_.empty(); }

 private:
  std::map<std::pair<int, int>, double> resistance_;
};

struct BuildingModel {
  std::string id;
  std::vector<ZoneParams> zones;
  Coupling coupling;
  int horizon = 24;  // periods
  double dt = 1.0;   // hours

  int zone_count() const { return static_cast<int>(zones.size()); }
};

/// Per-period box of exogenous inputs W = [outdoor temperature °C; solar kW/m²].
struct ExogenousEnvelope {
  std::vector<Vector2> lower;
  std::vector<Vector2> upper;

  int periods() const { return static_cast<int>(lower.size()); }
  bool contains(int t, const Vector2& w, double tol = 1e-9) const {
    const auto& lo = lower.at(static_cast<std::size_t>(t - 1));
    const auto& hi = upper.at(static_cast<std::size_t>(t - 1));
    return (w.array() >= lo.array() - tol).all() && (w.array() <= hi.array() + tol).all();
  }
};

/// A_eq1 T_prev + A_eq2 T + A_eq3 P + A_eq4 W = b_eq  and
/// A_ieq1 T + A_ieq2 P <= b_ieq, with the inequality rows ordered as
/// [T <= T_set+β; -T <= -(T_set-β); P <= P_max; -P <= -P_min].
struct PeriodConstraintData {
  Matrix a_eq1, a_eq2, a_eq3, a_eq4;
  Vector b_eq;
  Matrix a_ieq1, a_ieq2;
  Vector b_ieq;

  Vector temperature_lower() const {
    const auto n = a_eq1.rows();
    return -b_ieq.segment(n, n);
  }
  Vector temperature_upper() const { return b_ieq.head(a_eq1.rows()); }
  Vector power_lower() const {
    const auto n = a_eq1.rows();
    return -b_ieq.segment(3 * n, n);
  }
  Vector power_upper() const {
    const auto n = a_eq1.rows();
    return b_ieq.segment(2 * n, n);
  }
};

inline void check_period(const BuildingModel& b, int t) {
  if (t < 1 || t > b.horizon) {
    std::ostringstream os;
    os << "period " << t << " outside 1.." << b.horizon << " for building '" << b.id << "'";
    throw std::out_of_range(os.str());
  }
}

inline PeriodConstraintData assemble_period_matrices(const BuildingModel& b, int t) {
  check_period(b, t);
  const int n = b.zone_count();
  PeriodConstraintData d;
  d.a_eq1 = Matrix::Zero(n, n);
  d.a_eq2 = Matrix::Zero(n, n);
  d.a_eq3 = Matrix::Zero(n, n);
  d.a_eq4 = Matrix::Zero(n, 2);
  d.b_eq = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    const auto& z = b.zones[i];
    const double c = z.capacitance / b.dt;
    d.a_eq1(i, i) = -c;
    d.a_eq2(i, i) = c;
    if (z.ambient) {
      d.a_eq2(i, i) += 1.0 / z.r_out;
      d.a_eq4(i, 0) = -1.0 / z.r_out;
    }
    if (z.solar) d.a_eq4(i, 1) = -z.eta_rad;
    if (z.hvac) d.a_eq3(i, i) = z.eta_ac;
  }
  for (const auto& [ij, r] : b.coupling.entries()) {
    const auto [i, j] = ij;
    d.a_eq2(i, i) += 1.0 / r;
    d.a_eq2(i, j) -= 1.0 / r;
  }

  d.a_ieq1 = Matrix::Zero(4 * n, n);
  d.a_ieq2 = Matrix::Zero(4 * n, n);
  d.b_ieq = Vector::Zero(4 * n);
  for (int i = 0; i < n; ++i) {
    const auto& z = b.zones[i];
    const double set = z.setpoint.at(static_cast<std::size_t>(t - 1));
    const double tol = z.tolerance.at(static_cast<std::size_t>(t - 1));
    d.a_ieq1(i, i) = 1.0;
    d.b_ieq(i) = set + tol;
    d.a_ieq1(n + i, i) = -1.0;
    d.b_ieq(n + i) = -(set - tol);
    d.a_ieq2(2 * n + i, i) = 1.0;
    d.b_ieq(2 * n + i) = z.p_max;
    d.a_ieq2(3 * n + i, i) = -1.0;
    d.b_ieq(3 * n + i) = -z.p_min;
  }
  return d;
}

/// Advances zone temperatures one period by solving the implicit update.
inline Vector simulate_step(const BuildingModel& b, int t, const Vector& t_prev, const Vector& power, const Vector2& w) {
  const int n = b.zone_count();
  if (t_prev.size() != n || power.size() != n) throw std::invalid_argument("simulate_step: dimension mismatch");
  const auto d = assemble_period_matrices(b, t);
  const Vector rhs = d.b_eq - d.a_eq1 * t_prev - d.a_eq3 * power - d.a_eq4 * w;
  return d.a_eq2.partialPivLu().solve(rhs);
}

/// Infinity-norm residual of the dynamics at (t_prev, t_next, power, w).
inline double dynamics_residual(const PeriodConstraintData& d, const Vector& t_prev, const Vector& t_next,
                                const Vector& power, const Vector2& w) {
  return (d.a_eq1 * t_prev + d.a_eq2 * t_next + d.a_eq3 * power + d.a_eq4 * w - d.b_eq).lpNorm<Eigen::Infinity>();
}

/// Largest violation of the comfort band and power limits.
inline double limit_violation(const PeriodConstraintData& d, const Vector& t_next, const Vector& power) {
  const Vector slack = d.a_ieq1 * t_next + d.a_ieq2 * power - d.b_ieq;
  return std::max(0.0, slack.maxCoeff());
}

/// Distinct corners of the period-t box, ordered by outdoor temperature then
/// radiation.
inline std::vector<Vector2> exogenous_vertices(const ExogenousEnvelope& env, int t) {
  const auto& lo = env.lower.at(static_cast<std::size_t>(t - 1));
  const auto& hi = env.upper.at(static_cast<std::size_t>(t - 1));
  std::vector<double> temps{lo(0)};
  if (hi(0) != lo(0)) temps.push_back(hi(0));
  std::vector<double> rads{lo(1)};
  if (hi(1) != lo(1)) rads.push_back(hi(1));
  std::vector<Vector2> out;
  for (double a : temps)
    for (double q : rads) out.emplace_back(a, q);
  return out;
}

struct ValidationIssue {
  int zone = -1;    // -1 when not zone-specific
  int period = -1;  // 1-based, -1 when not period-specific
  std::string message;
};

using ValidationReport = std::vector<ValidationIssue>;

inline ValidationReport validate_building(const BuildingModel& b) {
  ValidationReport report;
  auto issue = [&](int zone, int period, std::string msg) { report.push_back({zone, period, std::move(msg)}); };
  if (b.zones.empty()) issue(-1, -1, "building has no zones");
  if (b.horizon < 1) issue(-1, -1, "horizon must be at least 1");
  if (!(b.dt > 0.0)) issue(-1, -1, "dt must be positive");
  const int n = b.zone_count();
  for (int i = 0; i < n; ++i) {
    const auto& z = b.zones[i];
    if (!(z.capacitance > 0.0)) issue(i, -1, "capacitance must be positive");
    if (z.ambient && !(z.r_out > 0.0)) issue(i, -1, "ambient resistance must be positive");
    if (z.solar && !(z.eta_rad >= 0.0)) issue(i, -1, "solar efficiency must be nonnegative");
    if (z.hvac && !(z.eta_ac > 0.0)) issue(i, -1, "HVAC efficiency must be positive");
    if (!(z.p_min <= z.p_max)) issue(i, -1, "power limits crossed (p_min > p_max)");
    if (!z.hvac && (z.p_min != 0.0 || z.p_max != 0.0)) issue(i, -1, "zone without HVAC must have zero power limits");
    if (static_cast<int>(z.setpoint.size()) != b.horizon) issue(i, -1, "setpoint profile length differs from horizon");
    if (static_cast<int>(z.tolerance.size()) != b.horizon) issue(i, -1, "tolerance profile length differs from horizon");
    for (std::size_t t = 0; t < z.tolerance.size(); ++t) {
      if (!(z.tolerance[t] >= 0.0)) issue(i, static_cast<int>(t) + 1, "comfort tolerance must be nonnegative");
    }
  }
  for (const auto& [ij, r] : b.coupling.entries()) {
    const auto [i, j] = ij;
    std::ostringstream pair;
    pair << "(" << i << ", " << j << ")";
    if (i < 0 || i >= n || j < 0 || j >= n) {
      issue(-1, -1, "coupling " + pair.str() + " references a zone out of range");
      continue;
    }
    if (i == j) issue(i, -1, "self-coupling entry " + pair.str());
    if (!(r > 0.0)) issue(i, -1, "coupling resistance " + pair.str() + " must be positive");
    const auto back = b.coupling.entries().find({j, i});
    if (back == b.coupling.entries().end() || back->second != r) {
      issue(i, -1, "asymmetric coupling " + pair.str());
    }
  }
  return report;
}

inline ValidationReport validate_envelope(const ExogenousEnvelope& env, int horizon) {
  ValidationReport report;
  if (env.periods() != horizon || env.upper.size() != env.lower.size()) {
    report.push_back({-1, -1, "envelope length differs from horizon"});
    return report;
  }
  for (int t = 0; t < horizon; ++t) {
    if (!(env.lower[t].array() <= env.upper[t].array()).all()) {
      report.push_back({-1, t + 1, "envelope lower bound exceeds upper bound"});
    }
  }
  return report;
}

inline std::string describe(const ValidationReport& report) {
  std::ostringstream os;
  for (const auto& i : report) {
    if (i.zone >= 0) os << "zone " << i.zone << ": ";
    if (i.period >= 0) os << "period " << i.period << ": ";
    os << i.message << "\n";
  }
  return os.str();
}

}  // namespace hvacflex
