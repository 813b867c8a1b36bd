#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace hvacflex::lp::detail {

/// Compressed-column storage of the full constraint matrix [A | I].
struct ColumnMatrix {
  int rows = 0;
  std::vector<int> start{0};
  std::vector<int> index;
  std::vector<double> value;

  int cols() const { return static_cast<int>(start.size()) - 1; }

  void push_column() { start.push_back(static_cast<int>(index.size())); }
  void push_entry(int row, double v) {
    index.push_back(row);
    value.push_back(v);
  }
};

/// Basis positions the factorization could not pivot, each paired with a
/// row whose logical column can replace it.
using Deficiency = std::vector<std::pair<int, int>>;

/// Explicit basis inverse with product-form rank-one updates. O(m^2) per
/// update, which is cheap for the small programs built online.
class DenseBasis {
 public:
  bool factor(const ColumnMatrix& a, const std::vector<int>& basis, Deficiency* deficient = nullptr) {
    if (deficient) deficient->clear();
    const int m = a.rows;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
      const int j = basis[k];
      for (int p = a.start[j]; p < a.start[j + 1]; ++p) b(a.index[p], k) = a.value[p];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    if (m > 0 && !(lu.rcond() > 1e-13)) return false;
    inverse_ = lu.inverse();
    updates_ = 0;
    return true;
  }

  void ftran(std::vector<double>& x) const {
    const int m = static_cast<int>(x.size());
    Eigen::Map<Eigen::VectorXd> v(x.data(), m);
    Eigen::VectorXd r = inverse_ * v;
    v = r;
  }

  void btran(std::vector<double>& y) const {
    const int m = static_cast<int>(y.size());
    Eigen::Map<Eigen::VectorXd> v(y.data(), m);
    Eigen::VectorXd r = inverse_.transpose() * v;
    v = r;
  }

  void update(int r, const std::vector<double>& alpha) {
    const int m = static_cast<int>(alpha.size());
    inverse_.row(r) /= alpha[r];
    for (int i = 0; i < m; ++i) {
      if (i == r || alpha[i] == 0.0) continue;
      inverse_.row(i) -= alpha[i] * inverse_.row(r);
    }
    ++updates_;
  }

  int updates() const { return updates_; }

 private:
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> inverse_;
  int updates_ = 0;
};

/// Sparse LU of the basis by Markowitz pivoting with a relative threshold,
/// plus a product-form eta file of column replacements. Solves skip zero
/// entries, so sparse right-hand sides stay cheap.
class SparseBasis {
 public:
  static constexpr double kThreshold = 0.1;       // |pivot| >= kThreshold * column max
  static constexpr double kAbsolutePivot = 1e-11;
  static constexpr int kSearchLines = 4;

  /// False when the basis is (numerically) singular; the positions left
  /// unpivoted are then listed in `deficient`.
  bool factor(const ColumnMatrix& a, const std::vector<int>& basis, Deficiency* deficient = nullptr) {
    m_ = a.rows;
    load(a, basis);
    clear_factors();
    int k = 0;
    for (; k < m_; ++k) {
      int r, c;
      if (!find_pivot(r, c)) break;
      eliminate(r, c);
    }
    etas_.clear();
    eta_index_.clear();
    eta_value_.clear();
    if (k < m_) {
      if (deficient) {
        deficient->clear();
        std::vector<int> rows, cols;
        for (int i = 0; i < m_; ++i)
          if (row_alive_[i]) rows.push_back(i);
        for (int j = 0; j < m_; ++j)
          if (col_alive_[j]) cols.push_back(j);
        for (std::size_t t = 0; t < cols.size(); ++t) deficient->emplace_back(cols[t], rows[t]);
      }
      return false;
    }
    build_column_copy();
    return true;
  }

  void ftran(std::vector<double>& x) const {
    work_.assign(x.begin(), x.end());
    auto& y = work_;
    for (int k = 0; k < m_; ++k) {
      const double yr = y[prow_[k]];
      if (yr == 0.0) continue;
      for (int p = l_start_[k]; p < l_start_[k + 1]; ++p) y[l_index_[p]] -= l_value_[p] * yr;
    }
    for (int k = m_ - 1; k >= 0; --k) {
      const int c = pcol_[k];
      const double v = y[prow_[k]] / pval_[k];
      x[c] = v;
      if (v == 0.0) continue;
      for (int p = uc_start_[c]; p < uc_start_[c + 1]; ++p) y[uc_row_[p]] -= uc_value_[p] * v;
    }
    for (const auto& e : etas_) {
      const double xr = x[e.row] / e.pivot;
      x[e.row] = xr;
      if (xr == 0.0) continue;
      for (int p = e.begin; p < e.end; ++p) x[eta_index_[p]] -= eta_value_[p] * xr;
    }
  }

  void btran(std::vector<double>& y) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = y[it->row];
      for (int p = it->begin; p < it->end; ++p) s -= eta_value_[p] * y[eta_index_[p]];
      y[it->row] = s / it->pivot;
    }
    work_.assign(y.begin(), y.end());
    auto& z = work_;
    for (int k = 0; k < m_; ++k) {
      const double v = z[pcol_[k]] / pval_[k];
      y[prow_[k]] = v;
      if (v == 0.0) continue;
      for (int p = u_start_[k]; p < u_start_[k + 1]; ++p) z[u_index_[p]] -= u_value_[p] * v;
    }
    for (int k = m_ - 1; k >= 0; --k) {
      double s = 0.0;
      for (int p = l_start_[k]; p < l_start_[k + 1]; ++p) s += l_value_[p] * y[l_index_[p]];
      y[prow_[k]] -= s;
    }
  }

  void update(int r, const std::vector<double>& alpha) {
    Eta e{r, alpha[r], static_cast<int>(eta_index_.size()), 0};
    for (int i = 0; i < static_cast<int>(alpha.size()); ++i) {
      if (i == r || std::abs(alpha[i]) < 1e-14) continue;
      eta_index_.push_back(i);
      eta_value_.push_back(alpha[i]);
    }
    e.end = static_cast<int>(eta_index_.size());
    etas_.push_back(e);
  }

  int updates() const { return static_cast<int>(etas_.size()); }

 private:
  struct Eta {
    int row;
    double pivot;
    int begin;
    int end;
  };

  // Doubly linked lists of lines bucketed by their nonzero count.
  struct CountLists {
    std::vector<int> head, next, prev, count;

    void reset(int lines) {
      head.assign(static_cast<std::size_t>(lines) + 2, -1);
      next.assign(static_cast<std::size_t>(lines), -1);
      prev.assign(static_cast<std::size_t>(lines), -1);
      count.assign(static_cast<std::size_t>(lines), 0);
    }
    void insert(int i, int c) {
      count[i] = c;
      prev[i] = -1;
      next[i] = head[c];
      if (head[c] >= 0) prev[head[c]] = i;
      head[c] = i;
    }
    void remove(int i) {
      if (prev[i] >= 0) next[prev[i]] = next[i];
      else head[count[i]] = next[i];
      if (next[i] >= 0) prev[next[i]] = prev[i];
    }
    void set(int i, int c) {
      if (c == count[i]) return;
      remove(i);
      insert(i, c);
    }
  };

  void load(const ColumnMatrix& a, const std::vector<int>& basis) {
    row_idx_.assign(static_cast<std::size_t>(m_), {});
    row_val_.assign(static_cast<std::size_t>(m_), {});
    col_rows_.assign(static_cast<std::size_t>(m_), {});
    for (int k = 0; k < m_; ++k) {
      const int j = basis[k];
      for (int p = a.start[j]; p < a.start[j + 1]; ++p) {
        const int i = a.index[p];
        row_idx_[i].push_back(k);
        row_val_[i].push_back(a.value[p]);
        col_rows_[k].push_back(i);
      }
    }
    rows_.reset(m_);
    cols_.reset(m_);
    // Reverse insertion keeps the scan order ascending within a bucket.
    for (int i = m_ - 1; i >= 0; --i) rows_.insert(i, static_cast<int>(row_idx_[i].size()));
    for (int j = m_ - 1; j >= 0; --j) cols_.insert(j, static_cast<int>(col_rows_[j].size()));
    row_alive_.assign(static_cast<std::size_t>(m_), 1);
    col_alive_.assign(static_cast<std::size_t>(m_), 1);
    mark_.assign(static_cast<std::size_t>(m_), -1);
  }

  void clear_factors() {
    prow_.clear();
    pcol_.clear();
    pval_.clear();
    l_start_.assign(1, 0);
    l_index_.clear();
    l_value_.clear();
    u_start_.assign(1, 0);
    u_index_.clear();
    u_value_.clear();
  }

  double value(int i, int c) const {
    const auto& idx = row_idx_[i];
    for (std::size_t t = 0; t < idx.size(); ++t)
      if (idx[t] == c) return row_val_[i][t];
    return 0.0;
  }

  double column_max(int c) const {
    double mx = 0.0;
    for (int i : col_rows_[c]) mx = std::max(mx, std::abs(value(i, c)));
    return mx;
  }

  // Markowitz search over the sparsest lines: columns and rows by increasing
  // count, stopping after a few lines once a candidate exists.
  bool find_pivot(int& pr, int& pc) const {
    pr = pc = -1;
    double best = std::numeric_limits<double>::infinity();
    double best_abs = 0.0;
    int searched = 0;
    auto consider = [&](int i, int c, double v, double mx, double merit) {
      const double av = std::abs(v);
      if (av <= kAbsolutePivot || av < kThreshold * mx) return;
      if (merit < best || (merit == best && av > best_abs)) {
        best = merit;
        best_abs = av;
        pr = i;
        pc = c;
      }
    };
    for (int cnt = 1; cnt <= m_; ++cnt) {
      for (int c = cols_.head[cnt]; c >= 0; c = cols_.next[c]) {
        const double mx = column_max(c);
        for (int i : col_rows_[c]) consider(i, c, value(i, c), mx, double(rows_.count[i] - 1) * (cnt - 1));
        if (pr >= 0 && (best <= double(cnt - 1) * (cnt - 1) || ++searched >= kSearchLines)) return true;
      }
      for (int r = rows_.head[cnt]; r >= 0; r = rows_.next[r]) {
        for (std::size_t t = 0; t < row_idx_[r].size(); ++t) {
          const int c = row_idx_[r][t];
          consider(r, c, row_val_[r][t], column_max(c), double(cnt - 1) * (cols_.count[c] - 1));
        }
        if (pr >= 0 && (best <= double(cnt - 1) * cnt || ++searched >= kSearchLines)) return true;
      }
    }
    return pr >= 0;
  }

  void eliminate(int pr, int pc) {
    const double piv = value(pr, pc);
    prow_.push_back(pr);
    pcol_.push_back(pc);
    pval_.push_back(piv);
    // U row: the pivot row without the pivot.
    std::vector<int> ucols;
    std::vector<double> uvals;
    for (std::size_t t = 0; t < row_idx_[pr].size(); ++t) {
      if (row_idx_[pr][t] == pc) continue;
      ucols.push_back(row_idx_[pr][t]);
      uvals.push_back(row_val_[pr][t]);
    }
    for (std::size_t t = 0; t < ucols.size(); ++t) {
      u_index_.push_back(ucols[t]);
      u_value_.push_back(uvals[t]);
    }
    u_start_.push_back(static_cast<int>(u_index_.size()));

    const std::vector<int> targets = col_rows_[pc];
    for (int i : targets) {
      if (i == pr) continue;
      auto& idx = row_idx_[i];
      auto& val = row_val_[i];
      std::size_t at = 0;
      while (idx[at] != pc) ++at;
      const double l = val[at] / piv;
      idx[at] = idx.back();
      val[at] = val.back();
      idx.pop_back();
      val.pop_back();
      l_index_.push_back(i);
      l_value_.push_back(l);
      for (std::size_t t = 0; t < idx.size(); ++t) mark_[idx[t]] = static_cast<int>(t);
      for (std::size_t t = 0; t < ucols.size(); ++t) {
        const int c = ucols[t];
        if (mark_[c] >= 0) {
          val[mark_[c]] -= l * uvals[t];
        } else {
          idx.push_back(c);
          val.push_back(-l * uvals[t]);
          col_rows_[c].push_back(i);
        }
      }
      for (int c : idx) mark_[c] = -1;
      rows_.set(i, static_cast<int>(idx.size()));
    }
    l_start_.push_back(static_cast<int>(l_index_.size()));

    for (int c : ucols) {
      auto& rows = col_rows_[c];
      for (std::size_t t = 0; t < rows.size(); ++t) {
        if (rows[t] == pr) {
          rows[t] = rows.back();
          rows.pop_back();
          break;
        }
      }
      cols_.set(c, static_cast<int>(rows.size()));
    }
    rows_.remove(pr);
    cols_.remove(pc);
    row_alive_[pr] = 0;
    col_alive_[pc] = 0;
    row_idx_[pr].clear();
    row_val_[pr].clear();
    col_rows_[pc].clear();
  }

  // U by column (basis position) for the ftran back substitution.
  void build_column_copy() {
    uc_start_.assign(static_cast<std::size_t>(m_) + 1, 0);
    for (int p : u_index_) ++uc_start_[p + 1];
    for (int c = 0; c < m_; ++c) uc_start_[c + 1] += uc_start_[c];
    uc_row_.resize(u_index_.size());
    uc_value_.resize(u_index_.size());
    std::vector<int> fill(uc_start_.begin(), uc_start_.end() - 1);
    for (int k = 0; k < m_; ++k) {
      for (int p = u_start_[k]; p < u_start_[k + 1]; ++p) {
        const int at = fill[u_index_[p]]++;
        uc_row_[at] = prow_[k];
        uc_value_[at] = u_value_[p];
      }
    }
  }

  int m_ = 0;
  // Active submatrix during factorization: values by row, patterns by column.
  std::vector<std::vector<int>> row_idx_;
  std::vector<std::vector<double>> row_val_;
  std::vector<std::vector<int>> col_rows_;
  CountLists rows_, cols_;
  std::vector<char> row_alive_, col_alive_;
  std::vector<int> mark_;
  // Factors: pivot k sits at (prow_[k], pcol_[k]).
  std::vector<int> prow_, pcol_;
  std::vector<double> pval_;
  std::vector<int> l_start_, l_index_;
  std::vector<double> l_value_;
  std::vector<int> u_start_, u_index_;
  std::vector<double> u_value_;
  std::vector<int> uc_start_, uc_row_;
  std::vector<double> uc_value_;
  std::vector<Eta> etas_;
  std::vector<int> eta_index_;
  std::vector<double> eta_value_;
  mutable std::vector<double> work_;
};

}  // namespace hvacflex::lp::detail
