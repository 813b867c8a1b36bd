#pragma once

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hvacflex::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Feasibility and optimality tolerances reported on every Optimal outcome.
inline constexpr double kFeasibilityTolerance = 1e-7;
inline constexpr double kOptimalityTolerance = 1e-7;

enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class ObjectiveSense { Minimize, Maximize };

struct Entry {
  int row;
  int col;
  double value;
};

struct Term {
  int col;
  double value;
};

/// A linear program in row form:
///   optimize  c'x  subject to  a_r'x (<=|=|>=) b_r,  l <= x <= u.
/// Variables default to free. Repeated (row, col) entries are summed.
class LinearProgram {
 public:
  int add_variable(double lower = -kInfinity, double upper = kInfinity, double cost = 0.0) {
    lower_.push_back(lower);
    upper_.push_back(upper);
    cost_.push_back(cost);
    return static_cast<int>(cost_.size()) - 1;
  }

  /// Appends `count` variables with identical bounds and returns the first index.
  int add_variables(int count, double lower = -kInfinity, double upper = kInfinity) {
    const int first = num_variables();
    lower_.insert(lower_.end(), static_cast<std::size_t>(count), lower);
    upper_.insert(upper_.end(), static_cast<std::size_t>(count), upper);
    cost_.insert(cost_.end(), static_cast<std::size_t>(count), 0.0);
    return first;
  }

  int add_row(RowSense sense, double rhs) {
    senses_.push_back(sense);
    rhs_.push_back(rhs);
    return static_cast<int>(rhs_.size()) - 1;
  }

  void add_entry(int row, int col, double value) {
    if (value != 0.0) entries_.push_back({row, col, value});
  }

  template <typename Terms>
  int add_constraint(const Terms& terms, RowSense sense, double rhs) {
    const int row = add_row(sense, rhs);
    for (const auto& t : terms) add_entry(row, t.col, t.value);
    return row;
  }

  int add_constraint(std::initializer_list<Term> terms, RowSense sense, double rhs) {
    return add_constraint<std::initializer_list<Term>>(terms, sense, rhs);
  }

  void set_cost(int col, double cost) { cost_.at(static_cast<std::size_t>(col)) = cost; }
  void set_bounds(int col, double lower, double upper) {
    lower_.at(static_cast<std::size_t>(col)) = lower;
    upper_.at(static_cast<std::size_t>(col)) = upper;
  }
  void set_rhs(int row, double rhs) { rhs_.at(static_cast<std::size_t>(row)) = rhs; }
  void set_sense(ObjectiveSense sense) { sense_ = sense; }

  int num_variables() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(rhs_.size()); }
  ObjectiveSense sense() const { return sense_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<double>& cost() const { return cost_; }
  const std::vector<RowSense>& row_senses() const { return senses_; }
  const std::vector<double>& rhs() const { return rhs_; }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Throws std::invalid_argument on out-of-range indices, non-finite
  /// coefficients, or crossed bounds.
  void validate() const {
    const int n = num_variables();
    const int m = num_rows();
    for (const auto& e : entries_) {
      if (e.row < 0 || e.row >= m || e.col < 0 || e.col >= n) {
        std::ostringstream os;
        os << "entry (" << e.row << ", " << e.col << ") out of range for " << m << "x" << n << " program";
        throw std::invalid_argument(os.str());
      }
      if (!std::isfinite(e.value)) throw std::invalid_argument("non-finite constraint coefficient");
    }
    for (int j = 0; j < n; ++j) {
      if (std::isnan(lower_[j]) || std::isnan(upper_[j]) || lower_[j] > upper_[j] ||
          lower_[j] == kInfinity || upper_[j] == -kInfinity) {
        throw std::invalid_argument("invalid bounds on variable " + std::to_string(j));
      }
      if (!std::isfinite(cost_[j])) throw std::invalid_argument("non-finite objective coefficient");
    }
    for (double b : rhs_) {
      if (!std::isfinite(b)) throw std::invalid_argument("non-finite right-hand side");
    }
  }

  /// Largest violation of any row or bound at `x`.
  double max_violation(const std::vector<double>& x) const {
    std::vector<double> activity(rhs_.size(), 0.0);
    for (const auto& e : entries_) activity[e.row] += e.value * x[e.col];
    double worst = 0.0;
    for (std::size_t r = 0; r < rhs_.size(); ++r) {
      const double diff = activity[r] - rhs_[r];
      switch (senses_[r]) {
        case RowSense::LessEqual: worst = std::max(worst, diff); break;
        case RowSense::GreaterEqual: worst = std::max(worst, -diff); break;
        case RowSense::Equal: worst = std::max(worst, std::abs(diff)); break;
      }
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
      worst = std::max(worst, lower_[j] - x[j]);
      worst = std::max(worst, x[j] - upper_[j]);
    }
    return worst;
  }

  double objective_value(const std::vector<double>& x) const {
    double v = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) v += cost_[j] * x[j];
    return v;
  }

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> cost_;
  std::vector<RowSense> senses_;
  std::vector<double> rhs_;
  std::vector<Entry> entries_;
  ObjectiveSense sense_ = ObjectiveSense::Minimize;
};

/// Writes `lp` in free MPS for cross-checking with external solvers. Rows are
/// named R<i>, columns C<j>; the objective row is OBJ.
inline void write_mps(std::ostream& os, const LinearProgram& lp, const std::string& name = "HVACFLEX") {
  const int n = lp.num_variables();
  const int m = lp.num_rows();
  os << std::setprecision(17);
  os << "NAME " << name << "\n";
  if (lp.sense() == ObjectiveSense::Maximize) os << "OBJSENSE\n    MAX\n";
  os << "ROWS\n N OBJ\n";
  for (int r = 0; r < m; ++r) {
    const char* tag = lp.row_senses()[r] == RowSense::LessEqual ? "L" : lp.row_senses()[r] == RowSense::Equal ? "E" : "G";
    os << " " << tag << " R" << r << "\n";
  }
  std::vector<std::vector<std::pair<int, double>>> cols(static_cast<std::size_t>(n));
  for (const auto& e : lp.entries()) cols[e.col].emplace_back(e.row, e.value);
  os << "COLUMNS\n";
  for (int j = 0; j < n; ++j) {
    if (lp.cost()[j] != 0.0) os << " C" << j << " OBJ " << lp.cost()[j] << "\n";
    for (const auto& [r, v] : cols[j]) os << " C" << j << " R" << r << " " << v << "\n";
    if (lp.cost()[j] == 0.0 && cols[j].empty()) os << " C" << j << " OBJ 0\n";
  }
  os << "RHS\n";
  for (int r = 0; r < m; ++r)
    if (lp.rhs()[r] != 0.0) os << " RHS R" << r << " " << lp.rhs()[r] << "\n";
  os << "BOUNDS\n";
  for (int j = 0; j < n; ++j) {
    const double l = lp.lower()[j], u = lp.upper()[j];
    if (l == u) {
      os << " FX BND C" << j << " " << l << "\n";
      continue;
    }
    if (l == -kInfinity && u == kInfinity) {
      os << " FR BND C" << j << "\n";
      continue;
    }
    if (l == -kInfinity) os << " MI BND C" << j << "\n";
    else if (l != 0.0) os << " LO BND C" << j << " " << l << "\n";
    if (u != kInfinity) os << " UP BND C" << j << " " << u << "\n";
  }
  os << "ENDATA\n";
}

}  // namespace hvacflex::lp
