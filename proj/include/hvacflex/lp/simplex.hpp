#pragma once

#include "hvacflex/lp/basis.hpp"
#include "hvacflex/lp/linear_program.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hvacflex::lp {

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline std::string_view to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

/// Per-variable basis status over structurals then row logicals. Only a hint
/// for the next solve of a program with the same shape.
enum class BasisCode : signed char { Basic, AtLower, AtUpper, Free };
using BasisStatus = std::vector<BasisCode>;

struct LpOutcome {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;  // primal solution; populated when Optimal
  double objective = std::numeric_limits<double>::quiet_NaN();
  double max_violation = 0.0;
  int iterations = 0;
  BasisStatus basis;  // final basis when Optimal
};

enum class SimplexAlgorithm { Dual, Primal };

struct SimplexOptions {
  SimplexAlgorithm algorithm = SimplexAlgorithm::Dual;
  double primal_tolerance = 1e-9;
  double dual_tolerance = 1e-7;
  double pivot_tolerance = 1e-7;   // preferred minimum |pivot|
  double perturbation = 1e-6;      // relative bound (primal) or cost (dual) perturbation
  int refactor_interval = 100;
  int degenerate_limit = 50;       // consecutive degenerate primal pivots before Bland's rule
  int dense_row_limit = 40;        // programs with more rows use the sparse basis
  long max_iterations = 0;         // 0: automatic
  double time_limit = 0.0;         // wall-clock seconds, 0: none
};

class SolveTimeLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solver seam. The built-in simplex is the only backend shipped; others can
/// be plugged in behind the same contract.
class LpBackend {
 public:
  virtual ~LpBackend() = default;
  virtual LpOutcome solve(const LinearProgram& lp, const BasisStatus* start) const = 0;
  LpOutcome solve(const LinearProgram& lp) const { return solve(lp, nullptr); }
  virtual std::string_view name() const = 0;
};

namespace detail {

enum class VarState : unsigned char { Basic, AtLower, AtUpper, Free, Fixed };

inline double hash_unit(std::uint64_t k) {
  k += 0x9e3779b97f4a7c15ULL;
  k = (k ^ (k >> 30)) * 0xbf58476d1ce4e5b9ULL;
  k = (k ^ (k >> 27)) * 0x94d049bb133111ebULL;
  k ^= k >> 31;
  return static_cast<double>(k >> 11) * 0x1.0p-53;
}

/// [A | I] x = b with bounds on structurals and logicals, costs in minimize
/// form. Logical r carries the row sense: a_r'x + s_r = b_r.
struct StandardForm {
  int n = 0;
  int m = 0;
  int total = 0;
  ColumnMatrix cols;
  std::vector<int> row_start, row_index;  // structural part, row-wise
  std::vector<double> row_value;
  std::vector<double> lower, upper, cost, rhs;

  explicit StandardForm(const LinearProgram& lp) {
    n = lp.num_variables();
    m = lp.num_rows();
    total = n + m;
    cols.rows = m;
    std::vector<std::vector<std::pair<int, double>>> bycol(static_cast<std::size_t>(n));
    for (const auto& e : lp.entries()) bycol[e.col].emplace_back(e.row, e.value);
    std::vector<int> count(static_cast<std::size_t>(m) + 1, 0);
    for (int j = 0; j < n; ++j) {
      auto& c = bycol[j];
      std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      for (std::size_t k = 0; k < c.size();) {
        const int row = c[k].first;
        double v = 0.0;
        while (k < c.size() && c[k].first == row) v += c[k++].second;
        if (v != 0.0) {
          cols.push_entry(row, v);
          ++count[row + 1];
        }
      }
      cols.push_column();
    }
    row_start.assign(count.begin(), count.end());
    for (int r = 0; r < m; ++r) row_start[r + 1] += row_start[r];
    row_index.resize(cols.index.size());
    row_value.resize(cols.index.size());
    std::vector<int> fill(row_start.begin(), row_start.end() - 1);
    for (int j = 0; j < n; ++j) {
      for (int p = cols.start[j]; p < cols.start[j + 1]; ++p) {
        const int at = fill[cols.index[p]]++;
        row_index[at] = j;
        row_value[at] = cols.value[p];
      }
    }
    lower = lp.lower();
    upper = lp.upper();
    const double sign = lp.sense() == ObjectiveSense::Maximize ? -1.0 : 1.0;
    cost.resize(static_cast<std::size_t>(total), 0.0);
    for (int j = 0; j < n; ++j) cost[j] = sign * lp.cost()[j];
    for (int r = 0; r < m; ++r) {
      cols.push_entry(r, 1.0);
      cols.push_column();
      switch (lp.row_senses()[r]) {
        case RowSense::LessEqual: lower.push_back(0.0); upper.push_back(kInfinity); break;
        case RowSense::GreaterEqual: lower.push_back(-kInfinity); upper.push_back(0.0); break;
        case RowSense::Equal: lower.push_back(0.0); upper.push_back(0.0); break;
      }
    }
    rhs = lp.rhs();
  }
};

/// Basis bookkeeping and factorization shared by the primal and dual loops.
template <typename Basis>
class SimplexState {
 public:
  SimplexState(const StandardForm& sf, const SimplexOptions& opt) : sf_(sf), opt_(opt) {
    lower_ = sf.lower;
    upper_ = sf.upper;
    cost_ = sf.cost;
    b_ = sf.rhs;
    x_.assign(static_cast<std::size_t>(sf.total), 0.0);
    d_.assign(static_cast<std::size_t>(sf.total), 0.0);
    state_.assign(static_cast<std::size_t>(sf.total), VarState::Free);
    basis_.resize(static_cast<std::size_t>(sf.m));
  }

  void place_nonbasic(int j) {
    const double l = lower_[j];
    const double u = upper_[j];
    if (l == u) {
      state_[j] = VarState::Fixed;
      x_[j] = l;
    } else if (std::isfinite(l)) {
      state_[j] = VarState::AtLower;
      x_[j] = l;
    } else if (std::isfinite(u)) {
      state_[j] = VarState::AtUpper;
      x_[j] = u;
    } else {
      state_[j] = VarState::Free;
      x_[j] = 0.0;
    }
  }

  // Re-reads a nonbasic value from its state after bounds changed.
  void snap_nonbasic(int j) {
    switch (state_[j]) {
      case VarState::AtLower:
        if (std::isfinite(lower_[j])) x_[j] = lower_[j];
        else place_nonbasic(j);
        break;
      case VarState::AtUpper:
        if (std::isfinite(upper_[j])) x_[j] = upper_[j];
        else place_nonbasic(j);
        break;
      case VarState::Fixed:
        if (lower_[j] == upper_[j]) x_[j] = lower_[j];
        else place_nonbasic(j);
        break;
      default: place_nonbasic(j);
    }
  }

  // All-logical basis; always nonsingular.
  void slack_basis() {
    for (int j = 0; j < sf_.n; ++j) place_nonbasic(j);
    for (int r = 0; r < sf_.m; ++r) {
      basis_[r] = sf_.n + r;
      state_[sf_.n + r] = VarState::Basic;
    }
    if (!factor_.factor(sf_.cols, basis_)) throw std::runtime_error("simplex: logical basis failed to factor");
    compute_basics();
  }

  // Installs a caller-supplied basis; false (and a logical basis) when it
  // does not fit or does not factor cleanly.
  bool install(const BasisStatus& status) {
    if (static_cast<int>(status.size()) != sf_.total) return false;
    int k = 0;
    for (int j = 0; j < sf_.total; ++j) {
      switch (status[j]) {
        case BasisCode::Basic:
          if (k == sf_.m) {
            slack_basis();
            return false;
          }
          basis_[k++] = j;
          state_[j] = VarState::Basic;
          break;
        case BasisCode::AtLower:
          state_[j] = VarState::AtLower;
          snap_nonbasic(j);
          break;
        case BasisCode::AtUpper:
          state_[j] = VarState::AtUpper;
          snap_nonbasic(j);
          break;
        case BasisCode::Free: place_nonbasic(j); break;
      }
    }
    if (k != sf_.m || !factor_repaired() || !factorization_sound()) {
      slack_basis();
      return false;
    }
    compute_basics();
    return true;
  }

  // Factors the basis; columns the LU cannot pivot are swapped for the
  // logicals of the unpivoted rows, which always restores full rank.
  bool factor_repaired() {
    Deficiency deficient;
    for (int attempt = 0; attempt < 3; ++attempt) {
      if (factor_.factor(sf_.cols, basis_, &deficient)) return true;
      if (deficient.empty()) return false;
      for (auto [pos, row] : deficient) {
        const int out = basis_[pos];
        const int in = sf_.n + row;
        if (state_[in] == VarState::Basic) return false;
        basis_[pos] = in;
        state_[in] = VarState::Basic;
        place_nonbasic(out);
      }
      ++repairs_;
    }
    return false;
  }

  BasisStatus status() const {
    BasisStatus out(static_cast<std::size_t>(sf_.total));
    for (int j = 0; j < sf_.total; ++j) {
      switch (state_[j]) {
        case VarState::Basic: out[j] = BasisCode::Basic; break;
        case VarState::AtUpper: out[j] = BasisCode::AtUpper; break;
        case VarState::Free: out[j] = BasisCode::Free; break;
        default: out[j] = BasisCode::AtLower;
      }
    }
    return out;
  }

  void compute_basics() {
    std::vector<double> rhs = b_;
    for (int j = 0; j < sf_.total; ++j) {
      if (state_[j] == VarState::Basic || x_[j] == 0.0) continue;
      for (int p = sf_.cols.start[j]; p < sf_.cols.start[j + 1]; ++p) rhs[sf_.cols.index[p]] -= sf_.cols.value[p] * x_[j];
    }
    factor_.ftran(rhs);
    for (int r = 0; r < sf_.m; ++r) x_[basis_[r]] = rhs[r];
  }

  void compute_reduced_costs() {
    std::vector<double> y(static_cast<std::size_t>(sf_.m));
    for (int r = 0; r < sf_.m; ++r) y[r] = cost_[basis_[r]];
    factor_.btran(y);
    for (int j = 0; j < sf_.total; ++j) {
      if (state_[j] == VarState::Basic) {
        d_[j] = 0.0;
        continue;
      }
      double s = cost_[j];
      for (int p = sf_.cols.start[j]; p < sf_.cols.start[j + 1]; ++p) s -= y[sf_.cols.index[p]] * sf_.cols.value[p];
      d_[j] = s;
    }
  }

  // Residual of B v = 1 for v from the fresh factorization.
  bool factorization_sound() const {
    std::vector<double> v(static_cast<std::size_t>(sf_.m), 1.0);
    factor_.ftran(v);
    std::vector<double> back(static_cast<std::size_t>(sf_.m), 0.0);
    double scale = 1.0;
    for (int k = 0; k < sf_.m; ++k) {
      if (!std::isfinite(v[k])) return false;
      scale = std::max(scale, std::abs(v[k]));
      const int j = basis_[k];
      for (int p = sf_.cols.start[j]; p < sf_.cols.start[j + 1]; ++p) back[sf_.cols.index[p]] += sf_.cols.value[p] * v[k];
    }
    if (scale > 1e14) return false;  // numerically singular
    for (double r : back) {
      if (!(std::abs(r - 1.0) <= 1e-9 * scale)) return false;
    }
    return true;
  }

  // Fresh factorization and basic values. An unsound basis falls back to the
  // last sound one with a stricter pivot floor, or to the logical basis.
  void refactor() {
    if (factor_repaired() && factorization_sound()) {
      good_basis_ = basis_;
      good_state_ = state_;
      compute_basics();
      return;
    }
    if (++repairs_ > 200) throw std::runtime_error("simplex: repeated singular bases");
    restored_ = true;
    pivot_floor_ = std::min(1e-3, 10.0 * pivot_tolerance());
    if (!good_basis_.empty() && good_basis_ != basis_) {
      basis_ = good_basis_;
      state_ = good_state_;
      for (int j = 0; j < sf_.total; ++j) {
        if (state_[j] != VarState::Basic) snap_nonbasic(j);
      }
      if (factor_.factor(sf_.cols, basis_) && factorization_sound()) {
        compute_basics();
        return;
      }
    }
    good_basis_.clear();
    slack_basis();
  }

  double pivot_tolerance() const { return std::max(opt_.pivot_tolerance, pivot_floor_); }

  void tick() {
    if (++iterations_ > max_iterations()) throw std::runtime_error("simplex: iteration limit exceeded");
    if (opt_.time_limit > 0.0 && iterations_ % 64 == 0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count() > opt_.time_limit) {
      throw SolveTimeLimit("simplex: time limit exceeded");
    }
  }

  long max_iterations() const { return opt_.max_iterations > 0 ? opt_.max_iterations : 200L * sf_.total + 10000L; }

  // Largest bound violation over the basic variables, against the true bounds.
  double primal_infeasibility() const {
    double worst = 0.0;
    for (int r = 0; r < sf_.m; ++r) {
      const int j = basis_[r];
      worst = std::max({worst, sf_.lower[j] - x_[j], x_[j] - sf_.upper[j]});
    }
    return worst;
  }

  std::vector<double> structural_solution() const {
    std::vector<double> x(x_.begin(), x_.begin() + sf_.n);
    for (int j = 0; j < sf_.n; ++j) {
      if (state_[j] == VarState::AtLower || state_[j] == VarState::Fixed) x[j] = lower_[j];
      if (state_[j] == VarState::AtUpper) x[j] = upper_[j];
    }
    return x;
  }

  const StandardForm& sf_;
  SimplexOptions opt_;
  std::vector<double> lower_, upper_, cost_, b_, x_, d_;
  std::vector<VarState> state_;
  std::vector<int> basis_;
  Basis factor_;
  int repairs_ = 0;
  std::vector<int> good_basis_;  // last basis that factored soundly
  std::vector<VarState> good_state_;
  double pivot_floor_ = 0.0;
  bool restored_ = false;  // set by refactor when the basis was replaced
  long iterations_ = 0;
  std::chrono::steady_clock::time_point started_ = std::chrono::steady_clock::now();
};

/// Bounded-variable revised primal simplex.
///
/// Phase 1 minimizes the sum of bound violations of the basic variables, so
/// it can restart from any basis. Degenerate stalls are broken by widening the
/// bounds of basic variables by tiny deterministic amounts; the original
/// bounds are restored at the end and any residual infeasibility is cleaned up
/// by another pass. Bland's rule is the last resort.
template <typename Basis>
class PrimalSimplex {
 public:
  explicit PrimalSimplex(SimplexState<Basis>& s) : s_(s), m_(s.sf_.m), total_(s.sf_.total) {
    weight_.assign(static_cast<std::size_t>(total_), 1.0);
    widened_.assign(static_cast<std::size_t>(total_), 0);
    allow_perturbation_ = s.opt_.perturbation > 0.0;
  }

  LpStatus run() {
    while (true) {
      if (!phase_one()) return LpStatus::Infeasible;
      const Result r = phase_two();
      if (r == Result::LostFeasibility) continue;
      if (perturbed_) {
        // Re-solve on the original bounds from the current basis.
        restore_bounds();
        continue;
      }
      return r == Result::Unbounded ? LpStatus::Unbounded : LpStatus::Optimal;
    }
  }

 private:
  enum class Result { Optimal, Unbounded, LostFeasibility };

  // Sign of the bound violation of basic variable j: -1 below, +1 above.
  int violation(int j) const {
    if (s_.x_[j] < s_.lower_[j] - s_.opt_.primal_tolerance) return -1;
    if (s_.x_[j] > s_.upper_[j] + s_.opt_.primal_tolerance) return 1;
    return 0;
  }

  double total_violation() const {
    double sum = 0.0;
    for (int r = 0; r < m_; ++r) {
      const int j = s_.basis_[r];
      const int v = violation(j);
      if (v < 0) sum += s_.lower_[j] - s_.x_[j];
      if (v > 0) sum += s_.x_[j] - s_.upper_[j];
    }
    return sum;
  }

  bool phase_one_costs() {
    std::fill(s_.cost_.begin(), s_.cost_.end(), 0.0);
    bool any = false;
    for (int r = 0; r < m_; ++r) {
      const int j = s_.basis_[r];
      const int v = violation(j);
      s_.cost_[j] = v;
      any = any || v != 0;
    }
    return any;
  }

  // Direction in which nonbasic j would move to improve, or 0.
  int improving_direction(int j) const {
    const double d = s_.d_[j];
    const double tol = s_.opt_.dual_tolerance;
    switch (s_.state_[j]) {
      case VarState::AtLower: return d < -tol ? 1 : 0;
      case VarState::AtUpper: return d > tol ? -1 : 0;
      case VarState::Free:
        if (d < -tol) return 1;
        if (d > tol) return -1;
        return 0;
      default: return 0;
    }
  }

  int choose_entering() const {
    int best = -1;
    double best_score = 0.0;
    for (int j = 0; j < total_; ++j) {
      if (improving_direction(j) == 0) continue;
      if (bland_) return j;
      const double score = s_.d_[j] * s_.d_[j] / weight_[j];
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  void widen(int j) {
    if (widened_[j] || !allow_perturbation_) return;
    widened_[j] = 1;
    const double u = hash_unit(static_cast<std::uint64_t>(j));
    const double eps = s_.opt_.perturbation;
    if (std::isfinite(s_.lower_[j])) s_.lower_[j] -= eps * (1.0 + std::abs(s_.lower_[j])) * (1.0 + u);
    if (std::isfinite(s_.upper_[j])) s_.upper_[j] += eps * (1.0 + std::abs(s_.upper_[j])) * (1.0 + u);
  }

  void perturb_basis() {
    if (!allow_perturbation_) return;
    perturbed_ = true;
    for (int r = 0; r < m_; ++r) widen(s_.basis_[r]);
  }

  void restore_bounds() {
    s_.lower_ = s_.sf_.lower;
    s_.upper_ = s_.sf_.upper;
    std::fill(widened_.begin(), widened_.end(), 0);
    perturbed_ = false;
    allow_perturbation_ = false;
    for (int j = 0; j < total_; ++j) {
      if (s_.state_[j] != VarState::Basic) s_.snap_nonbasic(j);
    }
    s_.refactor();
  }

  struct Ratio {
    int leave = -1;  // basis position, -1 for a bound flip
    double theta = 0.0;
    bool to_upper = false;
  };

  // Harris two-pass ratio test. Basic i moves by -dir * theta * alpha_i.
  // In phase 1 an infeasible basic blocks at the bound it violates and never
  // on the far side; in phase 2 every basic blocks at its bounds.
  bool ratio_test(int q, int dir, const std::vector<double>& alpha, bool phase1, Ratio& out) const {
    const double tol = bland_ ? 0.0 : s_.opt_.primal_tolerance;
    const double tiny = 1e-9;
    auto limit = [&](int i, double slack_tol, double& ratio, bool& to_upper) -> bool {
      const double delta = -dir * alpha[i];
      if (std::abs(delta) <= tiny) return false;
      const int j = s_.basis_[i];
      const double x = s_.x_[j], l = s_.lower_[j], u = s_.upper_[j];
      const int v = phase1 ? violation(j) : 0;
      if (v == 0) {
        // A basic slightly outside its bound counts as sitting on it.
        if (delta < 0 && std::isfinite(l)) {
          ratio = (std::max(x - l, 0.0) + slack_tol) / -delta;
          to_upper = false;
          return true;
        }
        if (delta > 0 && std::isfinite(u)) {
          ratio = (std::max(u - x, 0.0) + slack_tol) / delta;
          to_upper = true;
          return true;
        }
        return false;
      }
      if (v < 0 && delta > 0) {
        ratio = (l - x + slack_tol) / delta;
        to_upper = false;
        return true;
      }
      if (v > 0 && delta < 0) {
        ratio = (x - u + slack_tol) / -delta;
        to_upper = true;
        return true;
      }
      return false;
    };

    double relaxed = kInfinity;
    for (int i = 0; i < m_; ++i) {
      double ratio;
      bool up;
      if (limit(i, tol, ratio, up)) relaxed = std::min(relaxed, ratio);
    }
    const double range = s_.upper_[q] - s_.lower_[q];
    if (std::isfinite(range) && range <= relaxed) {
      out.leave = -1;
      out.theta = range;
      return true;
    }
    if (!std::isfinite(relaxed)) return false;

    int leave = -1;
    double theta = kInfinity;
    double best = -1.0;
    bool to_upper = false;
    for (int i = 0; i < m_; ++i) {
      double ratio;
      bool up;
      if (!limit(i, 0.0, ratio, up) || ratio > relaxed) continue;
      const double mag = std::abs(alpha[i]);
      bool take;
      if (bland_) {
        take = leave < 0 || ratio < theta || (ratio == theta && s_.basis_[i] < s_.basis_[leave]);
      } else {
        // Largest pivot, preferring those above the pivot tolerance.
        const double score = mag >= s_.pivot_tolerance() ? mag + 1.0 : mag;
        take = score > best;
        if (take) best = score;
      }
      if (take) {
        leave = i;
        theta = ratio;
        to_upper = up;
      }
    }
    out.leave = leave;
    out.theta = std::max(theta, 0.0);
    out.to_upper = to_upper;
    return leave >= 0;
  }

  // Drives the basic variables into their bounds. False when the violation
  // cannot be removed.
  bool phase_one() {
    if (!phase_one_costs()) return true;
    bland_ = false;
    std::fill(weight_.begin(), weight_.end(), 1.0);
    iterate(true);
    return total_violation() <= 0.0;
  }

  Result phase_two() {
    s_.cost_ = s_.sf_.cost;
    bland_ = false;
    std::fill(weight_.begin(), weight_.end(), 1.0);
    s_.compute_reduced_costs();
    return iterate(false);
  }

  // Fresh factorization; in phase 1 the costs follow the new violations.
  // False when the phase has nothing left to do, with the reason in r.
  bool refresh(bool phase1, Result& r) {
    s_.refactor();
    if (phase1 && !phase_one_costs()) {
      r = Result::Optimal;
      return false;
    }
    if (!phase1 && total_violation() > 0.0) {
      r = Result::LostFeasibility;
      return false;
    }
    s_.compute_reduced_costs();
    return true;
  }

  Result iterate(bool phase1) {
    std::vector<double> alpha(static_cast<std::size_t>(m_));
    std::vector<double> rho(static_cast<std::size_t>(m_));
    int degenerate_run = 0;
    bool verified = false;
    Result done = Result::Optimal;
    if (phase1) s_.compute_reduced_costs();
    while (true) {
      s_.tick();
      if (s_.factor_.updates() >= s_.opt_.refactor_interval && !refresh(phase1, done)) return done;
      const int q = choose_entering();
      if (q < 0) {
        if (verified || s_.factor_.updates() == 0) return Result::Optimal;
        // Confirm on a fresh factorization before stopping.
        if (!refresh(phase1, done)) return done;
        verified = true;
        continue;
      }
      verified = false;
      const int dir = improving_direction(q);

      std::fill(alpha.begin(), alpha.end(), 0.0);
      for (int p = s_.sf_.cols.start[q]; p < s_.sf_.cols.start[q + 1]; ++p) alpha[s_.sf_.cols.index[p]] = s_.sf_.cols.value[p];
      s_.factor_.ftran(alpha);

      Ratio rt;
      if (!ratio_test(q, dir, alpha, phase1, rt)) {
        if (phase1) {
          // Cannot happen with a consistent factorization: the entering
          // direction improves a bounded objective.
          if (!refresh(phase1, done)) return done;
          continue;
        }
        return Result::Unbounded;
      }

      if (rt.leave >= 0 && std::abs(alpha[rt.leave]) < s_.pivot_tolerance()) {
        // Unreliable pivot: refresh the factorization, then skip the column.
        if (s_.factor_.updates() > 0) {
          if (!refresh(phase1, done)) return done;
        } else {
          s_.d_[q] = 0.0;
        }
        continue;
      }

      if (rt.theta <= 1e-12) {
        ++degenerate_run;
        if (!perturbed_ && allow_perturbation_ && degenerate_run >= 5) {
          perturb_basis();
          degenerate_run = 0;
          continue;  // the widened bounds change the ratio test
        }
        if (degenerate_run >= s_.opt_.degenerate_limit) bland_ = true;
      } else {
        degenerate_run = 0;
        bland_ = false;
      }

      s_.x_[q] += dir * rt.theta;
      for (int i = 0; i < m_; ++i) {
        if (alpha[i] != 0.0) s_.x_[s_.basis_[i]] -= dir * rt.theta * alpha[i];
      }

      if (rt.leave < 0) {
        s_.state_[q] = dir > 0 ? VarState::AtUpper : VarState::AtLower;
        s_.x_[q] = dir > 0 ? s_.upper_[q] : s_.lower_[q];
        if (phase1 && !refresh_phase_one()) return Result::Optimal;
        continue;
      }

      // Pivot row for Devex weights and reduced-cost updates.
      std::fill(rho.begin(), rho.end(), 0.0);
      rho[rt.leave] = 1.0;
      s_.factor_.btran(rho);
      const double pivot = alpha[rt.leave];
      const double dq = s_.d_[q];
      const double wq = weight_[q];
      for (int j = 0; j < total_; ++j) {
        if (s_.state_[j] == VarState::Basic || s_.state_[j] == VarState::Fixed || j == q) continue;
        double sum = 0.0;
        for (int p = s_.sf_.cols.start[j]; p < s_.sf_.cols.start[j + 1]; ++p) sum += rho[s_.sf_.cols.index[p]] * s_.sf_.cols.value[p];
        if (sum == 0.0) continue;
        const double ratio = sum / pivot;
        s_.d_[j] -= dq * ratio;
        weight_[j] = std::max(weight_[j], ratio * ratio * wq);
      }

      const int p = s_.basis_[rt.leave];
      s_.x_[p] = rt.to_upper ? s_.upper_[p] : s_.lower_[p];
      s_.state_[p] = s_.lower_[p] == s_.upper_[p] ? VarState::Fixed : (rt.to_upper ? VarState::AtUpper : VarState::AtLower);
      s_.d_[p] = -dq / pivot;
      weight_[p] = std::max(wq / (pivot * pivot), 1.0);
      s_.d_[q] = 0.0;
      s_.basis_[rt.leave] = q;
      s_.state_[q] = VarState::Basic;
      s_.factor_.update(rt.leave, alpha);
      if (perturbed_) widen(q);
      if (phase1 && !refresh_phase_one()) return Result::Optimal;
    }
  }

  // Phase-1 costs depend on which basics are out of bounds; recompute them
  // and the reduced costs. False once every basic is within bounds.
  bool refresh_phase_one() {
    if (!phase_one_costs()) return false;
    s_.compute_reduced_costs();
    return true;
  }

  SimplexState<Basis>& s_;
  int m_;
  int total_;
  bool bland_ = false;
  bool perturbed_ = false;
  bool allow_perturbation_ = true;
  std::vector<double> weight_;
  std::vector<char> widened_;
};

/// Bounded-variable revised dual simplex with dual steepest-edge pricing and
/// the bound-flipping ratio test.
///
/// Costs are perturbed by tiny deterministic amounts against dual
/// degeneracy. A dual-feasible start comes from the auxiliary problem that
/// boxes every unbounded variable into [-1, 1] and drops the right-hand side.
/// After optimality the true costs are restored and any remaining dual
/// infeasibility is handed to the primal simplex.
template <typename Basis>
class DualSimplex {
 public:
  explicit DualSimplex(SimplexState<Basis>& s) : s_(s), n_(s.sf_.n), m_(s.sf_.m), total_(s.sf_.total) {
    weight_.assign(static_cast<std::size_t>(m_), 1.0);
    row_alpha_.assign(static_cast<std::size_t>(total_), 0.0);
    mark_.assign(static_cast<std::size_t>(total_), 0);
  }

  enum class Outcome { Optimal, Infeasible, NeedPrimal };

  Outcome run() {
    perturb_costs();
    s_.compute_reduced_costs();
    if (!dual_feasible_after_flips()) {
      if (!phase_one()) return Outcome::NeedPrimal;
    }
    const Outcome out = phase_two();
    if (out != Outcome::Optimal) return out;
    // True costs: the basis stays primal feasible, only the reduced costs move.
    s_.cost_ = s_.sf_.cost;
    s_.compute_reduced_costs();
    for (int j = 0; j < total_; ++j) {
      if (s_.state_[j] != VarState::Basic && wrong_sign(j, s_.opt_.dual_tolerance)) return Outcome::NeedPrimal;
    }
    return Outcome::Optimal;
  }

 private:
  bool boxed(int j) const { return std::isfinite(s_.lower_[j]) && std::isfinite(s_.upper_[j]); }

  void perturb_costs() {
    const double eps = s_.opt_.perturbation;
    if (eps <= 0.0) return;
    for (int j = 0; j < n_; ++j) {
      const double l = s_.sf_.lower[j], u = s_.sf_.upper[j];
      if (l == u) continue;
      const double c = s_.sf_.cost[j];
      const double amount = eps * (1.0 + std::abs(c)) * (1.0 + hash_unit(static_cast<std::uint64_t>(j)));
      double dir;
      if (std::isfinite(l) && !std::isfinite(u)) dir = 1.0;
      else if (!std::isfinite(l) && std::isfinite(u)) dir = -1.0;
      else if (std::isfinite(l)) dir = c >= 0.0 ? 1.0 : -1.0;
      else continue;  // free
      s_.cost_[j] = c + dir * amount;
    }
  }

  // Reduced cost of nonbasic j on the wrong side of its bound beyond tol.
  bool wrong_sign(int j, double tol) const {
    const double d = s_.d_[j];
    switch (s_.state_[j]) {
      case VarState::AtLower: return d < -tol;
      case VarState::AtUpper: return d > tol;
      case VarState::Free: return std::abs(d) > tol;
      default: return false;
    }
  }

  void flip(int j) {
    if (s_.state_[j] == VarState::AtLower) {
      s_.state_[j] = VarState::AtUpper;
      s_.x_[j] = s_.upper_[j];
    } else {
      s_.state_[j] = VarState::AtLower;
      s_.x_[j] = s_.lower_[j];
    }
  }

  // Moves boxed nonbasics to the bound their reduced cost asks for. True when
  // no unboxed nonbasic is left dual infeasible.
  bool dual_feasible_after_flips() {
    bool moved = false;
    bool ok = true;
    for (int j = 0; j < total_; ++j) {
      if (s_.state_[j] == VarState::Basic || s_.state_[j] == VarState::Fixed) continue;
      if (!wrong_sign(j, s_.opt_.dual_tolerance)) continue;
      if (boxed(j)) {
        flip(j);
        moved = true;
      } else {
        ok = false;
      }
    }
    if (moved) s_.compute_basics();
    return ok;
  }

  // Removes dual infeasibilities left by round-off: boxed variables flip,
  // others absorb a cost shift.
  void repair_dual() {
    bool moved = false;
    for (int j = 0; j < total_; ++j) {
      if (s_.state_[j] == VarState::Basic || s_.state_[j] == VarState::Fixed) continue;
      if (!wrong_sign(j, s_.opt_.dual_tolerance)) continue;
      if (boxed(j)) {
        flip(j);
        moved = true;
      } else {
        s_.cost_[j] -= s_.d_[j];
        s_.d_[j] = 0.0;
      }
    }
    if (moved) s_.compute_basics();
  }

  // Auxiliary problem with right-hand side zero: free variables in [-1, 1],
  // one-sided ones in [0, 1] or [-1, 0], boxed ones fixed at zero. Every
  // variable is boxed there, so the dual simplex runs without a phase 1; a
  // zero optimum leaves a basis that is dual feasible for the real problem.
  bool phase_one() {
    for (int j = 0; j < total_; ++j) {
      const double l = s_.sf_.lower[j], u = s_.sf_.upper[j];
      if (std::isfinite(l) && std::isfinite(u)) {
        s_.lower_[j] = 0.0;
        s_.upper_[j] = 0.0;
      } else if (std::isfinite(l)) {
        s_.lower_[j] = 0.0;
        s_.upper_[j] = 1.0;
      } else if (std::isfinite(u)) {
        s_.lower_[j] = -1.0;
        s_.upper_[j] = 0.0;
      } else {
        s_.lower_[j] = -1.0;
        s_.upper_[j] = 1.0;
      }
    }
    std::fill(s_.b_.begin(), s_.b_.end(), 0.0);
    for (int j = 0; j < total_; ++j) {
      if (s_.state_[j] == VarState::Basic) continue;
      if (s_.lower_[j] == s_.upper_[j]) s_.state_[j] = VarState::Fixed;
      else s_.state_[j] = s_.d_[j] >= 0.0 ? VarState::AtLower : VarState::AtUpper;
      s_.x_[j] = s_.state_[j] == VarState::AtUpper ? s_.upper_[j] : s_.lower_[j];
    }
    s_.compute_basics();
    const Outcome aux = phase_two();

    s_.lower_ = s_.sf_.lower;
    s_.upper_ = s_.sf_.upper;
    s_.b_ = s_.sf_.rhs;
    for (int j = 0; j < total_; ++j) {
      if (s_.state_[j] == VarState::Basic) continue;
      const double l = s_.lower_[j], u = s_.upper_[j];
      if (l == u) {
        s_.state_[j] = VarState::Fixed;
      } else if (!std::isfinite(l) && !std::isfinite(u)) {
        s_.state_[j] = VarState::Free;
      } else if (std::isfinite(l) && std::isfinite(u)) {
        s_.state_[j] = s_.d_[j] >= 0.0 ? VarState::AtLower : VarState::AtUpper;
      } else {
        s_.state_[j] = std::isfinite(l) ? VarState::AtLower : VarState::AtUpper;
      }
      s_.x_[j] = s_.state_[j] == VarState::AtUpper ? u : s_.state_[j] == VarState::Free ? 0.0 : l;
    }
    s_.refactor();
    s_.compute_reduced_costs();
    if (aux != Outcome::Optimal) return false;
    for (int j = 0; j < total_; ++j) {
      if (s_.state_[j] != VarState::Basic && wrong_sign(j, 1e-7)) return false;
    }
    std::fill(weight_.begin(), weight_.end(), 1.0);
    return true;
  }

  // Leaving row by dual steepest edge, or -1 when primal feasible.
  int choose_row() const {
    const double tol = s_.opt_.primal_tolerance;
    int best = -1;
    double best_score = 0.0;
    for (int r = 0; r < m_; ++r) {
      const int j = s_.basis_[r];
      double infeas;
      if (s_.x_[j] < s_.lower_[j] - tol) infeas = s_.lower_[j] - s_.x_[j];
      else if (s_.x_[j] > s_.upper_[j] + tol) infeas = s_.x_[j] - s_.upper_[j];
      else continue;
      const double score = infeas * infeas / weight_[r];
      if (score > best_score) {
        best_score = score;
        best = r;
      }
    }
    return best;
  }

  // alpha_r = rho' [A | I], nonzero pattern in row_nz_.
  void pivot_row(const std::vector<double>& rho) {
    for (int j : row_nz_) {
      row_alpha_[j] = 0.0;
      mark_[j] = 0;
    }
    row_nz_.clear();
    const auto& sf = s_.sf_;
    for (int i = 0; i < m_; ++i) {
      const double ri = rho[i];
      if (ri == 0.0) continue;
      for (int p = sf.row_start[i]; p < sf.row_start[i + 1]; ++p) {
        const int j = sf.row_index[p];
        if (!mark_[j]) {
          mark_[j] = 1;
          row_nz_.push_back(j);
        }
        row_alpha_[j] += ri * sf.row_value[p];
      }
      const int logical = n_ + i;
      mark_[logical] = 1;
      row_nz_.push_back(logical);
      row_alpha_[logical] = ri;
    }
  }

  struct Candidate {
    int j;
    double abar;   // the reduced cost moves as d_j - t * abar
    double ratio;  // exact breakpoint d_j / abar
    double relaxed;
  };

  // Bound-flipping ratio test with Harris tolerances. Returns the entering
  // column, or -1 when the dual is unbounded; fills flips_.
  int ratio_test(int s, double slope) {
    const double tol = s_.opt_.dual_tolerance;
    const double tiny = s_.pivot_tolerance();
    cands_.clear();
    flips_.clear();
    for (int j : row_nz_) {
      const VarState st = s_.state_[j];
      if (st == VarState::Basic || st == VarState::Fixed) continue;
      const double abar = -s * row_alpha_[j];
      if (std::abs(abar) <= tiny) continue;
      if (st == VarState::AtLower && abar < 0) continue;
      if (st == VarState::AtUpper && abar > 0) continue;
      const double d = s_.d_[j];
      cands_.push_back({j, abar, d / abar, abar > 0 ? (d + tol) / abar : (d - tol) / abar});
    }
    std::sort(cands_.begin(), cands_.end(), [](const Candidate& x, const Candidate& y) {
      return x.ratio < y.ratio || (x.ratio == y.ratio && x.j < y.j);
    });
    // Harris bound of the candidates not yet passed.
    suffix_.resize(cands_.size() + 1);
    suffix_.back() = kInfinity;
    for (std::size_t k = cands_.size(); k-- > 0;) suffix_[k] = std::min(suffix_[k + 1], cands_[k].relaxed);
    std::size_t at = 0;
    while (at < cands_.size()) {
      const double relaxed = suffix_[at];
      std::size_t end = at;
      double drop = 0.0;
      while (end < cands_.size() && cands_[end].ratio <= relaxed) {
        const int j = cands_[end].j;
        drop += std::abs(cands_[end].abar) * (s_.upper_[j] - s_.lower_[j]);
        ++end;
      }
      if (end == at) end = at + 1;  // round-off guard
      if (!(slope - drop > s_.opt_.primal_tolerance)) {
        // The slope turns here: enter the largest pivot of the group.
        std::size_t best = at;
        for (std::size_t k = at + 1; k < end; ++k) {
          if (std::abs(cands_[k].abar) > std::abs(cands_[best].abar)) best = k;
        }
        return cands_[best].j;
      }
      for (std::size_t k = at; k < end; ++k) flips_.push_back(cands_[k].j);
      slope -= drop;
      at = end;
    }
    return -1;
  }

  // Exact dual steepest-edge weights ||e_r' B^-1||^2.
  void reset_weights() {
    std::vector<double> rho(static_cast<std::size_t>(m_));
    for (int r = 0; r < m_; ++r) {
      std::fill(rho.begin(), rho.end(), 0.0);
      rho[r] = 1.0;
      s_.factor_.btran(rho);
      double w = 0.0;
      for (double v : rho) w += v * v;
      weight_[r] = w;
    }
    // Genuinely large weights should not trigger a reset on every refactor.
    weight_limit_ = std::max(1e12, 100.0 * *std::max_element(weight_.begin(), weight_.end()));
  }

  Outcome phase_two() {
    std::vector<double> rho(static_cast<std::size_t>(m_));
    std::vector<double> alpha(static_cast<std::size_t>(m_));
    std::vector<double> tau(static_cast<std::size_t>(m_));
    std::vector<double> flip_col(static_cast<std::size_t>(m_));
    bool verified = false;
    repair_dual();
    while (true) {
      s_.tick();
      if (s_.factor_.updates() >= s_.opt_.refactor_interval) refresh();
      const int r = choose_row();
      if (r < 0) {
        if (verified || s_.factor_.updates() == 0) return Outcome::Optimal;
        refresh();
        verified = true;
        continue;
      }
      verified = false;
      const int p = s_.basis_[r];
      const int s = s_.x_[p] < s_.lower_[p] ? 1 : -1;
      const double target = s > 0 ? s_.lower_[p] : s_.upper_[p];
      const double delta = std::abs(s_.x_[p] - target);

      std::fill(rho.begin(), rho.end(), 0.0);
      rho[r] = 1.0;
      s_.factor_.btran(rho);
      pivot_row(rho);
      const int q = ratio_test(s, delta);
      if (q < 0) {
        if (s_.factor_.updates() > 0) {
          refresh();
          continue;
        }
        return Outcome::Infeasible;
      }

      std::fill(alpha.begin(), alpha.end(), 0.0);
      for (int k = s_.sf_.cols.start[q]; k < s_.sf_.cols.start[q + 1]; ++k) alpha[s_.sf_.cols.index[k]] = s_.sf_.cols.value[k];
      s_.factor_.ftran(alpha);
      const double pivot = alpha[r];
      if (std::abs(pivot - row_alpha_[q]) > 1e-8 * (1.0 + std::abs(pivot)) || std::abs(pivot) < s_.pivot_tolerance()) {
        // Row and column disagree or the pivot is tiny: refactor, and if
        // that changes nothing, deprioritize the row.
        if (s_.factor_.updates() > 0) refresh();
        else weight_[r] *= 1e6;
        continue;
      }

      // Dual step.
      const double abar_q = -s * row_alpha_[q];
      double theta_d = s_.d_[q] / abar_q;
      if (theta_d < 0.0) {
        // Slightly infeasible entering reduced cost: shift it to zero.
        s_.cost_[q] -= s_.d_[q];
        s_.d_[q] = 0.0;
        theta_d = 0.0;
      }
      if (theta_d != 0.0) {
        for (int j : row_nz_) {
          if (s_.state_[j] != VarState::Basic) s_.d_[j] += theta_d * s * row_alpha_[j];
        }
      }
      s_.d_[p] = s * theta_d;
      s_.d_[q] = 0.0;

      // Bound flips.
      if (!flips_.empty()) {
        std::fill(flip_col.begin(), flip_col.end(), 0.0);
        for (int j : flips_) {
          const double before = s_.x_[j];
          flip(j);
          const double step = s_.x_[j] - before;
          for (int k = s_.sf_.cols.start[j]; k < s_.sf_.cols.start[j + 1]; ++k) flip_col[s_.sf_.cols.index[k]] += s_.sf_.cols.value[k] * step;
        }
        s_.factor_.ftran(flip_col);
        for (int i = 0; i < m_; ++i) s_.x_[s_.basis_[i]] -= flip_col[i];
      }

      // Primal step: the leaving variable lands on its bound.
      const double theta_p = (s_.x_[p] - target) / pivot;
      for (int i = 0; i < m_; ++i) {
        if (alpha[i] != 0.0) s_.x_[s_.basis_[i]] -= theta_p * alpha[i];
      }
      const double xq = s_.x_[q] + theta_p;

      // Dual steepest-edge weights.
      tau = rho;
      s_.factor_.ftran(tau);
      const double wr = weight_[r];
      for (int i = 0; i < m_; ++i) {
        if (i == r || alpha[i] == 0.0) continue;
        const double ratio = alpha[i] / pivot;
        weight_[i] = std::max(weight_[i] + ratio * (ratio * wr - 2.0 * tau[i]), ratio * ratio + 1e-12);
      }
      weight_[r] = std::max(wr / (pivot * pivot), 1e-12);

      s_.x_[p] = target;
      s_.state_[p] = s_.lower_[p] == s_.upper_[p] ? VarState::Fixed : (s > 0 ? VarState::AtLower : VarState::AtUpper);
      s_.basis_[r] = q;
      s_.state_[q] = VarState::Basic;
      s_.x_[q] = xq;
      s_.factor_.update(r, alpha);
    }
  }

  void refresh() {
    s_.refactor();
    if (s_.restored_ || *std::max_element(weight_.begin(), weight_.end()) > weight_limit_) reset_weights();
    s_.restored_ = false;
    s_.compute_reduced_costs();
    repair_dual();
  }

  SimplexState<Basis>& s_;
  int n_;
  int m_;
  int total_;
  std::vector<double> weight_;
  std::vector<double> row_alpha_;
  std::vector<int> row_nz_;
  std::vector<char> mark_;
  std::vector<Candidate> cands_;
  std::vector<double> suffix_;
  double weight_limit_ = 1e12;
  std::vector<int> flips_;
};

template <typename Basis>
LpOutcome run_simplex(const LinearProgram& lp, const SimplexOptions& opt, const BasisStatus* start) {
  const StandardForm sf(lp);
  SimplexState<Basis> state(sf, opt);
  if (!start || !state.install(*start)) state.slack_basis();

  LpStatus status;
  if (opt.algorithm == SimplexAlgorithm::Dual) {
    using Dual = DualSimplex<Basis>;
    const auto dual = Dual(state).run();
    if (dual == Dual::Outcome::Optimal) {
      status = LpStatus::Optimal;
    } else if (dual == Dual::Outcome::Infeasible) {
      status = LpStatus::Infeasible;
    } else {
      state.cost_ = sf.cost;
      state.refactor();
      status = PrimalSimplex<Basis>(state).run();
    }
  } else {
    status = PrimalSimplex<Basis>(state).run();
  }
  if (status == LpStatus::Optimal) {
    // Final answer from a fresh factorization; drift is cleaned up by the
    // primal simplex on the true costs.
    state.cost_ = sf.cost;
    state.refactor();
    if (state.primal_infeasibility() > opt.primal_tolerance) status = PrimalSimplex<Basis>(state).run();
  }

  LpOutcome out;
  out.status = status;
  out.iterations = static_cast<int>(state.iterations_);
  if (status != LpStatus::Optimal) return out;
  out.x = state.structural_solution();
  out.objective = lp.objective_value(out.x);
  out.max_violation = lp.max_violation(out.x);
  out.basis = state.status();
  return out;
}

}  // namespace detail

class SimplexBackend final : public LpBackend {
 public:
  explicit SimplexBackend(SimplexOptions options = {}) : options_(options) {}

  using LpBackend::solve;
  LpOutcome solve(const LinearProgram& lp, const BasisStatus* start) const override {
    lp.validate();
    if (lp.num_rows() <= options_.dense_row_limit) return detail::run_simplex<detail::DenseBasis>(lp, options_, start);
    return detail::run_simplex<detail::SparseBasis>(lp, options_, start);
  }

  std::string_view name() const override { return "builtin-simplex"; }

 private:
  SimplexOptions options_;
};

/// Solves with the built-in simplex backend.
inline LpOutcome solve(const LinearProgram& lp) { return SimplexBackend{}.solve(lp); }

}  // namespace hvacflex::lp
