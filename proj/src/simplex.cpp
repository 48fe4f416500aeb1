#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdint>

#include "rfopf/lp.hpp"

namespace rfopf {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

constexpr int kRefactorInterval = 80;
constexpr double kPivotTol = 1e-9;
constexpr double kShiftTol = 1e-6;  // largest cost shift for dual feasibility

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vec = Eigen::VectorXd;

// LU of the basis matrix plus a product-form eta file for the updates since
// the last factorization. Column singletons (logicals, mostly) are eliminated
// directly; only the remaining kernel goes through the sparse LU.
class BasisFactor {
 public:
  bool factorize(const SpMat& basis) {
    etas_.clear();
    const int m = static_cast<int>(basis.rows());
    const int* outer = basis.outerIndexPtr();
    const int* inner = basis.innerIndexPtr();
    const double* val = basis.valuePtr();
    owner_.assign(static_cast<std::size_t>(m), -1);
    diag_.assign(static_cast<std::size_t>(m), 0.0);
    single_row_.assign(static_cast<std::size_t>(m), -1);
    kernel_cols_.clear();
    for (int c = 0; c < m; ++c) {
      if (outer[c + 1] - outer[c] == 1) {
        const int i = inner[outer[c]];
        const double v = val[outer[c]];
        if (owner_[static_cast<std::size_t>(i)] < 0 && std::abs(v) > kPivotTol) {
          owner_[static_cast<std::size_t>(i)] = c;
          single_row_[static_cast<std::size_t>(c)] = i;
          diag_[static_cast<std::size_t>(c)] = v;
          continue;
        }
      }
      kernel_cols_.push_back(c);
    }
    kernel_rows_.clear();
    std::vector<int> kidx(static_cast<std::size_t>(m), -1);
    for (int i = 0; i < m; ++i)
      if (owner_[static_cast<std::size_t>(i)] < 0) {
        kidx[static_cast<std::size_t>(i)] = static_cast<int>(kernel_rows_.size());
        kernel_rows_.push_back(i);
      }
    if (kernel_rows_.size() != kernel_cols_.size()) return false;

    const int t = static_cast<int>(kernel_cols_.size());
    std::vector<Eigen::Triplet<double, int>> trip;
    coupling_start_.assign(1, 0);
    coupling_.clear();
    for (int k = 0; k < t; ++k) {
      const int c = kernel_cols_[static_cast<std::size_t>(k)];
      for (int p = outer[c]; p < outer[c + 1]; ++p) {
        const int i = inner[p];
        if (kidx[static_cast<std::size_t>(i)] >= 0)
          trip.emplace_back(kidx[static_cast<std::size_t>(i)], k, val[p]);
        else
          coupling_.emplace_back(i, val[p]);
      }
      coupling_start_.push_back(static_cast<int>(coupling_.size()));
    }
    if (t == 0) return true;
    SpMat K(t, t);
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();
    lu_.analyzePattern(K);
    lu_.factorize(K);
    return lu_.info() == Eigen::Success;
  }

  void ftran(Vec& v) const {
    if (v.size() == 0) return;
    solve(v);
    for (const auto& e : etas_) {
      const double xr = v[e.row] / e.pivot;
      if (xr != 0.0)
        for (const auto& [i, a] : e.entries) v[i] -= a * xr;
      v[e.row] = xr;
    }
  }

  void btran(Vec& v) const {
    if (v.size() == 0) return;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = v[it->row];
      for (const auto& [i, a] : it->entries) s -= a * v[i];
      v[it->row] = s / it->pivot;
    }
    solve_transpose(v);
  }

  void push(int row, const Vec& alpha) {
    Eta e;
    e.row = row;
    e.pivot = alpha[row];
    for (int i = 0; i < alpha.size(); ++i)
      if (i != row && alpha[i] != 0.0) e.entries.emplace_back(i, alpha[i]);
    etas_.push_back(std::move(e));
  }

  int updates() const { return static_cast<int>(etas_.size()); }

 private:
  // B x = r, r in row space, x by basis position
  void solve(Vec& r) const {
    const std::size_t t = kernel_cols_.size();
    Vec out(r.size());
    if (t > 0) {
      Vec rk(static_cast<Eigen::Index>(t));
      for (std::size_t k = 0; k < t; ++k) rk[static_cast<Eigen::Index>(k)] = r[kernel_rows_[k]];
      const Vec xk = lu_.solve(rk);
      for (std::size_t k = 0; k < t; ++k) {
        const double xv = xk[static_cast<Eigen::Index>(k)];
        out[kernel_cols_[k]] = xv;
        if (xv == 0.0) continue;
        for (int p = coupling_start_[k]; p < coupling_start_[k + 1]; ++p)
          r[coupling_[static_cast<std::size_t>(p)].first] -= coupling_[static_cast<std::size_t>(p)].second * xv;
      }
    }
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const int c = owner_[static_cast<std::size_t>(i)];
      if (c >= 0) out[c] = r[i] / diag_[static_cast<std::size_t>(c)];
    }
    r.swap(out);
  }

  // B' y = c, c by basis position, y in row space
  void solve_transpose(Vec& c) const {
    Vec y(c.size());
    for (Eigen::Index p = 0; p < c.size(); ++p) {
      const int i = single_row_[static_cast<std::size_t>(p)];
      if (i >= 0) y[i] = c[p] / diag_[static_cast<std::size_t>(p)];
    }
    const std::size_t t = kernel_cols_.size();
    if (t > 0) {
      Vec ck(static_cast<Eigen::Index>(t));
      for (std::size_t k = 0; k < t; ++k) {
        double s = c[kernel_cols_[k]];
        for (int p = coupling_start_[k]; p < coupling_start_[k + 1]; ++p)
          s -= coupling_[static_cast<std::size_t>(p)].second * y[coupling_[static_cast<std::size_t>(p)].first];
        ck[static_cast<Eigen::Index>(k)] = s;
      }
      const Vec yk = lu_.transpose().solve(ck);
      for (std::size_t k = 0; k < t; ++k) y[kernel_rows_[k]] = yk[static_cast<Eigen::Index>(k)];
    }
    c.swap(y);
  }

  struct Eta {
    int row = 0;
    double pivot = 1.0;
    std::vector<std::pair<int, double>> entries;
  };
  mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<int> owner_;       // row -> singleton column position, or -1
  std::vector<int> single_row_;  // position -> its row when a singleton, or -1
  std::vector<double> diag_;
  std::vector<int> kernel_cols_, kernel_rows_;
  std::vector<int> coupling_start_;  // per kernel column: entries in singleton rows
  std::vector<std::pair<int, double>> coupling_;
  std::vector<Eta> etas_;
};

}  // namespace

struct SimplexSolver::Impl {
  int n = 0;  // structural columns
  int m = 0;  // rows; logical column n + i has coefficient -1 in row i
  LpOptions opt;

  // column-wise and row-wise copies of A
  std::vector<int> col_start, col_row;
  std::vector<double> col_val;
  std::vector<int> row_start, row_col;
  std::vector<double> row_val;

  std::vector<double> lb, ub, cost;
  double cost_scale = 1.0;
  double obj_constant = 0.0;
  std::vector<double> orig_cost;

  std::vector<double> x;
  std::vector<BasisStatus> status;
  std::vector<int> head;  // basis position -> column
  std::vector<int> pos;   // column -> basis position or -1
  BasisFactor factor;
  bool factored = false;
  long iterations = 0;
  long degenerate_run = 0;

  explicit Impl(const LinearModel& model, LpOptions o) : opt(o) {
    n = model.num_vars();
    m = model.num_rows();
    std::vector<int> counts(static_cast<std::size_t>(n), 0);
    row_start.assign(static_cast<std::size_t>(m) + 1, 0);
    for (int i = 0; i < m; ++i) {
      const auto& r = model.row(i);
      row_start[static_cast<std::size_t>(i) + 1] = row_start[static_cast<std::size_t>(i)] + static_cast<int>(r.terms.size());
      for (const auto& t : r.terms) {
        row_col.push_back(t.var);
        row_val.push_back(t.coef);
        ++counts[static_cast<std::size_t>(t.var)];
      }
    }
    col_start.assign(static_cast<std::size_t>(n) + 1, 0);
    for (int j = 0; j < n; ++j) col_start[static_cast<std::size_t>(j) + 1] = col_start[static_cast<std::size_t>(j)] + counts[static_cast<std::size_t>(j)];
    col_row.resize(row_col.size());
    col_val.resize(row_col.size());
    std::vector<int> fill(col_start.begin(), col_start.end() - 1);
    for (int i = 0; i < m; ++i)
      for (int k = row_start[static_cast<std::size_t>(i)]; k < row_start[static_cast<std::size_t>(i) + 1]; ++k) {
        const int j = row_col[static_cast<std::size_t>(k)];
        const int p = fill[static_cast<std::size_t>(j)]++;
        col_row[static_cast<std::size_t>(p)] = i;
        col_val[static_cast<std::size_t>(p)] = row_val[static_cast<std::size_t>(k)];
      }

    const auto total = static_cast<std::size_t>(n + m);
    lb.assign(total, 0.0);
    ub.assign(total, 0.0);
    cost.assign(total, 0.0);
    orig_cost.assign(static_cast<std::size_t>(n), 0.0);
    double cmax = 0.0;
    for (int j = 0; j < n; ++j) {
      const auto& v = model.variable(j);
      lb[static_cast<std::size_t>(j)] = v.lb;
      ub[static_cast<std::size_t>(j)] = v.ub;
      orig_cost[static_cast<std::size_t>(j)] = v.obj;
      cmax = std::max(cmax, std::abs(v.obj));
    }
    cost_scale = cmax > 1.0 ? cmax : 1.0;
    for (int j = 0; j < n; ++j) cost[static_cast<std::size_t>(j)] = orig_cost[static_cast<std::size_t>(j)] / cost_scale;
    for (int i = 0; i < m; ++i) {
      const auto& r = model.row(i);
      const auto k = static_cast<std::size_t>(n + i);
      lb[k] = r.sense == Sense::LessEqual ? -kInf : r.rhs;
      ub[k] = r.sense == Sense::GreaterEqual ? kInf : r.rhs;
    }
    obj_constant = model.objective_constant();
    if (opt.max_iterations <= 0) opt.max_iterations = 50L * (n + m) + 10000;
    slack_basis();
  }

  // ---- basis bookkeeping -------------------------------------------------

  BasisStatus nonbasic_default(int j) const {
    const auto k = static_cast<std::size_t>(j);
    if (cost[k] < 0.0 && std::isfinite(ub[k])) return BasisStatus::AtUpper;
    if (std::isfinite(lb[k])) return BasisStatus::AtLower;
    if (std::isfinite(ub[k])) return BasisStatus::AtUpper;
    return BasisStatus::Free;
  }

  void place_nonbasic(int j) {
    const auto k = static_cast<std::size_t>(j);
    switch (status[k]) {
      case BasisStatus::AtLower:
        if (!std::isfinite(lb[k])) status[k] = std::isfinite(ub[k]) ? BasisStatus::AtUpper : BasisStatus::Free;
        break;
      case BasisStatus::AtUpper:
        if (!std::isfinite(ub[k])) status[k] = std::isfinite(lb[k]) ? BasisStatus::AtLower : BasisStatus::Free;
        break;
      case BasisStatus::Free:
        if (std::isfinite(lb[k]) || std::isfinite(ub[k])) status[k] = nonbasic_default(j);
        break;
      case BasisStatus::Basic: return;
    }
    x[k] = status[k] == BasisStatus::AtLower ? lb[k] : status[k] == BasisStatus::AtUpper ? ub[k] : 0.0;
  }

  void slack_basis() {
    const auto total = static_cast<std::size_t>(n + m);
    status.assign(total, BasisStatus::Basic);
    x.assign(total, 0.0);
    for (int j = 0; j < n; ++j) {
      status[static_cast<std::size_t>(j)] = nonbasic_default(j);
      place_nonbasic(j);
    }
    rebuild_head();
  }

  void rebuild_head() {
    head.clear();
    pos.assign(static_cast<std::size_t>(n + m), -1);
    for (int j = 0; j < n + m; ++j)
      if (status[static_cast<std::size_t>(j)] == BasisStatus::Basic) {
        pos[static_cast<std::size_t>(j)] = static_cast<int>(head.size());
        head.push_back(j);
      }
    factored = false;
  }

  bool install(const Basis& b) {
    if (b.columns.size() > static_cast<std::size_t>(n) || b.rows.size() > static_cast<std::size_t>(m)) return false;
    std::vector<BasisStatus> s(static_cast<std::size_t>(n + m), BasisStatus::Basic);
    for (int j = 0; j < n; ++j)
      s[static_cast<std::size_t>(j)] = j < static_cast<int>(b.columns.size()) ? b.columns[static_cast<std::size_t>(j)] : nonbasic_default(j);
    for (int i = 0; i < m; ++i)
      s[static_cast<std::size_t>(n + i)] = i < static_cast<int>(b.rows.size()) ? b.rows[static_cast<std::size_t>(i)] : BasisStatus::Basic;
    const auto basics = std::count(s.begin(), s.end(), BasisStatus::Basic);
    if (basics != m) return false;
    status = std::move(s);
    for (int j = 0; j < n + m; ++j) place_nonbasic(j);
    rebuild_head();
    return true;
  }

  // ---- linear algebra ------------------------------------------------------

  void load_column(int j, Vec& v) const {
    v.setZero(m);
    if (j < n) {
      for (int k = col_start[static_cast<std::size_t>(j)]; k < col_start[static_cast<std::size_t>(j) + 1]; ++k)
        v[col_row[static_cast<std::size_t>(k)]] = col_val[static_cast<std::size_t>(k)];
    } else {
      v[j - n] = -1.0;
    }
  }

  double dot_column(const Vec& y, int j) const {
    if (j >= n) return -y[j - n];
    double s = 0.0;
    for (int k = col_start[static_cast<std::size_t>(j)]; k < col_start[static_cast<std::size_t>(j) + 1]; ++k)
      s += y[col_row[static_cast<std::size_t>(k)]] * col_val[static_cast<std::size_t>(k)];
    return s;
  }

  bool refactor() {
    std::vector<Eigen::Triplet<double, int>> trip;
    for (int p = 0; p < m; ++p) {
      const int j = head[static_cast<std::size_t>(p)];
      if (j < n) {
        for (int k = col_start[static_cast<std::size_t>(j)]; k < col_start[static_cast<std::size_t>(j) + 1]; ++k)
          trip.emplace_back(col_row[static_cast<std::size_t>(k)], p, col_val[static_cast<std::size_t>(k)]);
      } else {
        trip.emplace_back(j - n, p, -1.0);
      }
    }
    SpMat B(m, m);
    B.setFromTriplets(trip.begin(), trip.end());
    B.makeCompressed();
    factored = m == 0 || factor.factorize(B);
    return factored;
  }

  bool ensure_factor() {
    if (factored && factor.updates() < kRefactorInterval) return true;
    if (refactor()) {
      compute_basic_values();
      return true;
    }
    // singular basis: fall back to the slack basis
    slack_basis();
    if (!refactor()) return false;
    compute_basic_values();
    return true;
  }

  void compute_basic_values() {
    if (m == 0) return;
    Vec rhs = Vec::Zero(m);
    for (int j = 0; j < n + m; ++j) {
      const auto k = static_cast<std::size_t>(j);
      if (status[k] == BasisStatus::Basic || x[k] == 0.0) continue;
      if (j < n) {
        for (int p = col_start[k]; p < col_start[k + 1]; ++p)
          rhs[col_row[static_cast<std::size_t>(p)]] -= col_val[static_cast<std::size_t>(p)] * x[k];
      } else {
        rhs[j - n] += x[k];
      }
    }
    factor.ftran(rhs);
    for (int p = 0; p < m; ++p) x[static_cast<std::size_t>(head[static_cast<std::size_t>(p)])] = rhs[p];
  }

  double infeasibility(int j) const {
    const auto k = static_cast<std::size_t>(j);
    if (x[k] < lb[k] - opt.feasibility_tol) return lb[k] - x[k];
    if (x[k] > ub[k] + opt.feasibility_tol) return x[k] - ub[k];
    return 0.0;
  }

  bool timed_out() const { return opt.deadline && std::chrono::steady_clock::now() > *opt.deadline; }

  void pivot(int r, int q, const Vec& alpha) {
    const int leaving = head[static_cast<std::size_t>(r)];
    head[static_cast<std::size_t>(r)] = q;
    pos[static_cast<std::size_t>(q)] = r;
    pos[static_cast<std::size_t>(leaving)] = -1;
    status[static_cast<std::size_t>(q)] = BasisStatus::Basic;
    factor.push(r, alpha);
  }

  // ---- primal simplex ------------------------------------------------------

  LpStatus primal() {
    Vec y(m), alpha(m), col(m);
    bool bland = false;
    degenerate_run = 0;
    while (true) {
      if (iterations >= opt.max_iterations || timed_out()) return LpStatus::IterationLimit;
      if (!ensure_factor()) return LpStatus::IterationLimit;

      bool phase1 = false;
      for (int p = 0; p < m; ++p)
        if (infeasibility(head[static_cast<std::size_t>(p)]) > 0.0) {
          phase1 = true;
          break;
        }
      for (int p = 0; p < m; ++p) {
        const int j = head[static_cast<std::size_t>(p)];
        const auto k = static_cast<std::size_t>(j);
        if (phase1)
          y[p] = x[k] < lb[k] - opt.feasibility_tol ? -1.0 : x[k] > ub[k] + opt.feasibility_tol ? 1.0 : 0.0;
        else
          y[p] = cost[k];
      }
      factor.btran(y);

      int q = -1;
      int dir = 0;
      double best = 0.0;
      for (int j = 0; j < n + m; ++j) {
        const auto k = static_cast<std::size_t>(j);
        if (status[k] == BasisStatus::Basic || lb[k] == ub[k]) continue;
        const double d = (phase1 ? 0.0 : cost[k]) - dot_column(y, j);
        const bool can_inc = status[k] != BasisStatus::AtUpper;
        const bool can_dec = status[k] != BasisStatus::AtLower;
        int dj = 0;
        if (d < -opt.optimality_tol && can_inc) dj = 1;
        else if (d > opt.optimality_tol && can_dec) dj = -1;
        if (dj == 0) continue;
        if (bland) {
          q = j;
          dir = dj;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          q = j;
          dir = dj;
        }
      }
      if (q < 0) {
        // confirm from a fresh factorization
        if (factor.updates() > 0) {
          factored = false;
          continue;
        }
        return phase1 ? LpStatus::Infeasible : LpStatus::Optimal;
      }

      load_column(q, col);
      alpha = col;
      factor.ftran(alpha);

      // x_B(t) = x_B - t * dir * alpha
      double tmax = kInf;
      for (int p = 0; p < m; ++p) {
        const double a = dir * alpha[p];
        if (std::abs(a) < kPivotTol) continue;
        const auto k = static_cast<std::size_t>(head[static_cast<std::size_t>(p)]);
        double limit = kInf;
        if (a > 0) {  // decreasing
          if (x[k] > ub[k] + opt.feasibility_tol) limit = (x[k] - ub[k] + opt.feasibility_tol) / a;
          else if (x[k] < lb[k] - opt.feasibility_tol) limit = kInf;
          else if (std::isfinite(lb[k])) limit = (x[k] - lb[k] + opt.feasibility_tol) / a;
        } else {  // increasing
          if (x[k] < lb[k] - opt.feasibility_tol) limit = (lb[k] - x[k] + opt.feasibility_tol) / -a;
          else if (x[k] > ub[k] + opt.feasibility_tol) limit = kInf;
          else if (std::isfinite(ub[k])) limit = (ub[k] - x[k] + opt.feasibility_tol) / -a;
        }
        tmax = std::min(tmax, limit);
      }
      int r = -1;
      double t = kInf;
      double leave_bound = 0.0;
      double best_piv = 0.0;
      for (int p = 0; p < m; ++p) {
        const double a = dir * alpha[p];
        if (std::abs(a) < kPivotTol) continue;
        const int j = head[static_cast<std::size_t>(p)];
        const auto k = static_cast<std::size_t>(j);
        double ratio = kInf;
        double bound = 0.0;
        if (a > 0) {
          if (x[k] > ub[k] + opt.feasibility_tol) bound = ub[k];
          else if (x[k] < lb[k] - opt.feasibility_tol || !std::isfinite(lb[k])) continue;
          else bound = lb[k];
          ratio = (x[k] - bound) / a;
        } else {
          if (x[k] < lb[k] - opt.feasibility_tol) bound = lb[k];
          else if (x[k] > ub[k] + opt.feasibility_tol || !std::isfinite(ub[k])) continue;
          else bound = ub[k];
          ratio = (bound - x[k]) / -a;
        }
        if (ratio > tmax) continue;
        const bool better = bland ? (r < 0 || ratio < t - 1e-12 || (std::abs(ratio - t) <= 1e-12 && j < head[static_cast<std::size_t>(r)]))
                                  : std::abs(a) > best_piv;
        if (better) {
          best_piv = std::abs(a);
          r = p;
          t = std::max(ratio, 0.0);
          leave_bound = bound;
        }
      }

      const auto kq = static_cast<std::size_t>(q);
      const double range = ub[kq] - lb[kq];
      ++iterations;
      if (std::isfinite(range) && range <= t) {
        // bound flip of the entering column
        const double step = dir * range;
        x[kq] += step;
        status[kq] = dir > 0 ? BasisStatus::AtUpper : BasisStatus::AtLower;
        x[kq] = dir > 0 ? ub[kq] : lb[kq];
        for (int p = 0; p < m; ++p) x[static_cast<std::size_t>(head[static_cast<std::size_t>(p)])] -= step * alpha[p];
        degenerate_run = 0;
        bland = false;
        continue;
      }
      if (r < 0) {
        if (phase1) return LpStatus::IterationLimit;
        return LpStatus::Unbounded;
      }

      const int leaving = head[static_cast<std::size_t>(r)];
      for (int p = 0; p < m; ++p) x[static_cast<std::size_t>(head[static_cast<std::size_t>(p)])] -= t * dir * alpha[p];
      x[kq] += t * dir;
      const auto kl = static_cast<std::size_t>(leaving);
      x[kl] = leave_bound;
      pivot(r, q, alpha);
      status[kl] = leave_bound == lb[kl] ? BasisStatus::AtLower : BasisStatus::AtUpper;

      if (t <= 1e-12) {
        if (++degenerate_run > 10L * std::max(m, 1)) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
  }

  // ---- dual simplex ----------------------------------------------------------

  // Makes the current basis dual feasible by moving boxed nonbasic columns to
  // the bound matching their reduced-cost sign. Returns false if that is not
  // possible.
  bool make_dual_feasible(std::vector<double>& d) {
    Vec y(m);
    for (int p = 0; p < m; ++p) y[p] = cost[static_cast<std::size_t>(head[static_cast<std::size_t>(p)])];
    factor.btran(y);
    d.assign(static_cast<std::size_t>(n + m), 0.0);
    bool moved = false;
    for (int j = 0; j < n + m; ++j) {
      const auto k = static_cast<std::size_t>(j);
      if (status[k] == BasisStatus::Basic) continue;
      d[k] = cost[k] - dot_column(y, j);
      if (lb[k] == ub[k]) continue;
      const double tol = opt.optimality_tol;
      // small wrong-signed reduced costs on one-sided columns: shift the cost
      const bool wrong = (status[k] == BasisStatus::AtLower && d[k] < -tol) || (status[k] == BasisStatus::AtUpper && d[k] > tol) ||
                         (status[k] == BasisStatus::Free && std::abs(d[k]) > tol);
      if (wrong && std::abs(d[k]) <= kShiftTol && (status[k] == BasisStatus::Free || !std::isfinite(status[k] == BasisStatus::AtLower ? ub[k] : lb[k]))) {
        cost[k] -= d[k];
        d[k] = 0.0;
        continue;
      }
      if (status[k] == BasisStatus::AtLower && d[k] < -tol) {
        if (!std::isfinite(ub[k])) return false;
        status[k] = BasisStatus::AtUpper;
        x[k] = ub[k];
        moved = true;
      } else if (status[k] == BasisStatus::AtUpper && d[k] > tol) {
        if (!std::isfinite(lb[k])) return false;
        status[k] = BasisStatus::AtLower;
        x[k] = lb[k];
        moved = true;
      } else if (status[k] == BasisStatus::Free && std::abs(d[k]) > tol) {
        return false;
      }
    }
    if (moved) compute_basic_values();
    return true;
  }

  // Returns Optimal, Infeasible, IterationLimit, or Unbounded meaning "not
  // applicable" (caller falls back to primal).
  LpStatus dual() {
    std::vector<double> d;
    if (!ensure_factor()) return LpStatus::IterationLimit;
    if (!make_dual_feasible(d)) return LpStatus::Unbounded;
    Vec rho(m), alpha(m), col(m), tau(m);
    std::vector<double> row_alpha(static_cast<std::size_t>(n + m), 0.0);
    std::vector<int> touched;
    // dual steepest-edge weights ||e_p' B^-1||^2 by basis position, from a
    // unit reference
    std::vector<double> weight(static_cast<std::size_t>(m), 1.0);
    bool bland = false;
    long degenerate = 0;
    while (true) {
      if (iterations >= opt.max_iterations || timed_out()) return LpStatus::IterationLimit;
      if (!factored || factor.updates() >= kRefactorInterval) {
        if (!ensure_factor()) return LpStatus::IterationLimit;
        if (!make_dual_feasible(d)) return LpStatus::Unbounded;
      }

      int r = -1;
      double worst = 0.0;
      for (int p = 0; p < m; ++p) {
        const int j = head[static_cast<std::size_t>(p)];
        const double inf = infeasibility(j);
        if (inf <= 0.0) continue;
        if (bland) {
          if (r < 0 || j < head[static_cast<std::size_t>(r)]) r = p;
        } else if (inf * inf > worst * weight[static_cast<std::size_t>(p)]) {
          worst = inf * inf / weight[static_cast<std::size_t>(p)];
          r = p;
        }
      }
      if (r < 0) return LpStatus::Optimal;

      const int leaving = head[static_cast<std::size_t>(r)];
      const auto kl = static_cast<std::size_t>(leaving);
      const bool to_lower = x[kl] < lb[kl];
      const double bound = to_lower ? lb[kl] : ub[kl];

      rho.setZero();
      rho[r] = 1.0;
      factor.btran(rho);
      for (int j : touched) row_alpha[static_cast<std::size_t>(j)] = 0.0;
      touched.clear();
      for (int i = 0; i < m; ++i) {
        const double ri = rho[i];
        if (ri == 0.0) continue;
        for (int k = row_start[static_cast<std::size_t>(i)]; k < row_start[static_cast<std::size_t>(i) + 1]; ++k) {
          const int j = row_col[static_cast<std::size_t>(k)];
          if (row_alpha[static_cast<std::size_t>(j)] == 0.0) touched.push_back(j);
          row_alpha[static_cast<std::size_t>(j)] += ri * row_val[static_cast<std::size_t>(k)];
        }
        touched.push_back(n + i);
        row_alpha[static_cast<std::size_t>(n + i)] = -ri;
      }

      // entering candidates
      auto eligible = [&](int j, double a) {
        const auto k = static_cast<std::size_t>(j);
        if (status[k] == BasisStatus::Basic || lb[k] == ub[k] || std::abs(a) < kPivotTol) return false;
        const bool inc = status[k] != BasisStatus::AtUpper;
        const bool dec = status[k] != BasisStatus::AtLower;
        // x_leaving changes by -a * dx_j
        if (to_lower) return (inc && a < 0) || (dec && a > 0);
        return (inc && a > 0) || (dec && a < 0);
      };
      double tmax = kInf;
      for (int j : touched) {
        const double a = row_alpha[static_cast<std::size_t>(j)];
        if (!eligible(j, a)) continue;
        tmax = std::min(tmax, (std::abs(d[static_cast<std::size_t>(j)]) + opt.optimality_tol) / std::abs(a));
      }
      int q = -1;
      double best_piv = 0.0;
      double best_ratio = kInf;
      for (int j : touched) {
        const double a = row_alpha[static_cast<std::size_t>(j)];
        if (!eligible(j, a)) continue;
        const double ratio = std::abs(d[static_cast<std::size_t>(j)]) / std::abs(a);
        if (ratio > tmax) continue;
        const bool better = bland ? (q < 0 || ratio < best_ratio - 1e-12 || (std::abs(ratio - best_ratio) <= 1e-12 && j < q))
                                  : std::abs(a) > best_piv;
        if (better) {
          best_piv = std::abs(a);
          best_ratio = ratio;
          q = j;
        }
      }
      if (q < 0) {
        if (factor.updates() > 0) {
          factored = false;
          continue;
        }
        return LpStatus::Infeasible;
      }

      load_column(q, col);
      alpha = col;
      factor.ftran(alpha);
      const double aq = row_alpha[static_cast<std::size_t>(q)];
      if (std::abs(alpha[r] - aq) > 1e-6 * (1.0 + std::abs(aq))) {
        if (factor.updates() > 0) {
          factored = false;
          continue;
        }
      }
      const double piv = alpha[r];
      if (std::abs(piv) < kPivotTol) {
        factored = false;
        continue;
      }
      {
        const double wr = std::max(rho.squaredNorm(), 1e-12);
        tau = rho;
        factor.ftran(tau);
        for (int p = 0; p < m; ++p) {
          if (p == r || alpha[p] == 0.0) continue;
          const double ratio = alpha[p] / piv;
          auto& w = weight[static_cast<std::size_t>(p)];
          w = std::max(w + ratio * (ratio * wr - 2.0 * tau[p]), 1e-6);
        }
        weight[static_cast<std::size_t>(r)] = std::max(wr / (piv * piv), 1e-6);
      }
      const auto kq = static_cast<std::size_t>(q);
      const double dxq = (x[kl] - bound) / piv;
      for (int p = 0; p < m; ++p) x[static_cast<std::size_t>(head[static_cast<std::size_t>(p)])] -= dxq * alpha[p];
      x[kq] += dxq;
      x[kl] = bound;

      const double theta_d = d[kq] / aq;
      for (int j : touched) {
        const auto k = static_cast<std::size_t>(j);
        if (status[k] != BasisStatus::Basic) d[k] -= theta_d * row_alpha[k];
      }
      d[kq] = 0.0;
      d[kl] = -theta_d;
      pivot(r, q, alpha);
      status[kl] = to_lower ? BasisStatus::AtLower : BasisStatus::AtUpper;
      ++iterations;

      if (std::abs(theta_d) <= 1e-12) {
        if (++degenerate > 10L * std::max(m, 1)) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }
    }
  }

  void perturb_costs() {
    for (int j = 0; j < n; ++j) {
      const auto k = static_cast<std::size_t>(j);
      if (lb[k] == ub[k] || status[k] == BasisStatus::Basic || status[k] == BasisStatus::Free) continue;
      // deterministic pseudo-random factor in [1, 2)
      std::uint64_t h = static_cast<std::uint64_t>(j) * 0x9E3779B97F4A7C15ULL;
      h ^= h >> 31;
      h *= 0xBF58476D1CE4E5B9ULL;
      h ^= h >> 27;
      const double r = 1.0 + static_cast<double>(h >> 11) * 0x1.0p-53;
      const double delta = 5e-7 * r * (1.0 + std::abs(cost[k]));
      cost[k] += status[k] == BasisStatus::AtUpper ? -delta : delta;
    }
  }

  LpSolution solve() {
    iterations = 0;
    LpSolution sol;
    for (int j = 0; j < n + m; ++j) place_nonbasic(j);
    factored = false;
    // perturbed costs against dual degeneracy; the primal pass below restores
    // optimality for the true costs
    const std::vector<double> true_cost = cost;
    perturb_costs();
    LpStatus st = dual();
    cost = true_cost;
    if (st == LpStatus::Infeasible) {
      // confirm from a fresh factorization with the primal phase 1
      st = primal();
    } else if (st != LpStatus::IterationLimit) {
      st = primal();
    }
    sol.status = st;
    sol.iterations = iterations;
    sol.x.assign(x.begin(), x.begin() + n);
    sol.objective = obj_constant;
    for (int j = 0; j < n; ++j) sol.objective += orig_cost[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
    if (st == LpStatus::Optimal && m > 0) {
      Vec y(m);
      for (int p = 0; p < m; ++p) y[p] = cost[static_cast<std::size_t>(head[static_cast<std::size_t>(p)])];
      factor.btran(y);
      sol.duals.resize(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) sol.duals[static_cast<std::size_t>(i)] = y[i] * cost_scale;
    }
    return sol;
  }
};

SimplexSolver::SimplexSolver(const LinearModel& model, LpOptions options)
    : impl_(std::make_unique<Impl>(model, options)) {}
SimplexSolver::~SimplexSolver() = default;
SimplexSolver::SimplexSolver(SimplexSolver&&) noexcept = default;
SimplexSolver& SimplexSolver::operator=(SimplexSolver&&) noexcept = default;

int SimplexSolver::num_columns() const { return impl_->n; }
int SimplexSolver::num_rows() const { return impl_->m; }

void SimplexSolver::set_bounds(int j, double lb, double ub) {
  const auto k = static_cast<std::size_t>(j);
  impl_->lb[k] = lb;
  impl_->ub[k] = ub;
  if (impl_->status[k] != BasisStatus::Basic) impl_->place_nonbasic(j);
}

void SimplexSolver::set_basis(const Basis& basis) {
  if (!impl_->install(basis)) impl_->slack_basis();
}

Basis SimplexSolver::basis() const {
  Basis b;
  b.columns.assign(impl_->status.begin(), impl_->status.begin() + impl_->n);
  b.rows.assign(impl_->status.begin() + impl_->n, impl_->status.end());
  return b;
}

LpSolution SimplexSolver::solve() { return impl_->solve(); }

LpSolution solve_lp(const LinearModel& model, const LpOptions& options) {
  SimplexSolver solver(model, options);
  return solver.solve();
}

}  // namespace rfopf
