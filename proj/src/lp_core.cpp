#include "evflex/lp_core.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>
#include <sstream>

#include "evflex/errors.hpp"

namespace evflex::lp {

int LinearProgram::add_variable(std::string name, double lower, double upper, double cost) {
  vars_.push_back(Variable{std::move(name), lower, upper, cost});
  return static_cast<int>(vars_.size()) - 1;
}

int LinearProgram::add_row(std::string name, RowSense sense, double rhs) {
  rows_.push_back(Row{std::move(name), sense, rhs, {}});
  return static_cast<int>(rows_.size()) - 1;
}

void LinearProgram::add_entry(int row, int var, double coeff) {
  if (row < 0 || row >= num_rows()) throw ConfigError("add_entry: bad row index");
  if (var < 0 || var >= num_variables()) throw ConfigError("add_entry: bad variable index");
  if (coeff == 0.0) return;  // keep rows free of explicit zeros
  rows_[row].entries.push_back(RowEntry{var, coeff});
}

void LinearProgram::validate() const {
  for (int j = 0; j < num_variables(); ++j) {
    const Variable& v = vars_[j];
    if (std::isnan(v.lower) || std::isnan(v.upper) || std::isnan(v.cost))
      throw ConfigError("variable " + v.name + ": NaN in bounds or cost");
    if (v.lower > v.upper)
      throw ConfigError("variable " + v.name + ": lower bound exceeds upper bound");
  }
  for (int i = 0; i < num_rows(); ++i) {
    const Row& r = rows_[i];
    if (std::isnan(r.rhs)) throw ConfigError("row " + r.name + ": NaN rhs");
    for (const RowEntry& e : r.entries) {
      if (e.var < 0 || e.var >= num_variables())
        throw ConfigError("row " + r.name + ": entry references missing variable");
      if (e.coeff == 0.0) throw ConfigError("row " + r.name + ": explicit zero coefficient");
      if (std::isnan(e.coeff)) throw ConfigError("row " + r.name + ": NaN coefficient");
    }
  }
}

std::size_t LinearProgram::num_nonzeros() const {
  std::size_t n = 0;
  for (const Row& r : rows_) n += r.entries.size();
  return n;
}

std::string Solution::to_bytes() const {
  std::string out;
  auto put = [&out](const void* p, std::size_t n) {
    out.append(static_cast<const char*>(p), n);
  };
  int st = static_cast<int>(status);
  put(&st, sizeof st);
  put(&objective, sizeof objective);
  auto put_vec = [&](const std::vector<double>& v) {
    std::size_t n = v.size();
    put(&n, sizeof n);
    if (n) put(v.data(), n * sizeof(double));
  };
  put_vec(x);
  put_vec(row_dual);
  put_vec(reduced_cost);
  return out;
}

namespace {

// ---------------------------------------------------------------------------
// Internal standard form: min c.x  s.t.  A x + s = b, with bounds on both the
// structural variables and the row slacks. Column j >= n_struct is the slack
// of row j - n_struct.
// ---------------------------------------------------------------------------

struct Csc {
  int m = 0, n = 0;
  std::vector<int> ptr;  // n+1
  std::vector<int> idx;
  std::vector<double> val;
};

enum VStat : unsigned char { kBasic, kAtLower, kAtUpper, kFreeZero };

struct Eta {
  int pivot_pos;
  double pivot_val;
  std::vector<std::pair<int, double>> other;  // (position, value), excludes pivot
};

class LuFactors {
 public:
  // Factor the basis given by `basis` (column indices into cols).
  // Returns false if numerically singular.
  bool factor(const Csc& cols, const std::vector<int>& basis) {
    m_ = static_cast<int>(basis.size());
    l_cols_.assign(m_, {});
    u_cols_.assign(m_, {});
    diag_.assign(m_, 0.0);
    perm_.assign(m_, -1);
    pinv_.assign(m_, -1);
    q_.resize(m_);

    // Process sparsest columns first; slack singletons pivot immediately and
    // keep fill low in the time-coupled blocks.
    std::vector<int> count(m_);
    for (int k = 0; k < m_; ++k) {
      int col = basis[k];
      count[k] = cols.ptr[col + 1] - cols.ptr[col];
      q_[k] = k;
    }
    std::stable_sort(q_.begin(), q_.end(), [&](int a, int b) { return count[a] < count[b]; });

    std::vector<double> work(m_, 0.0);
    std::vector<int> pattern;
    std::vector<int> stack, stack_entry;
    std::vector<unsigned char> mark(m_, 0);
    pattern.reserve(64);

    for (int step = 0; step < m_; ++step) {
      int pos = q_[step];
      int col = basis[pos];
      // scatter column
      pattern.clear();
      for (int p = cols.ptr[col]; p < cols.ptr[col + 1]; ++p) {
        int r = cols.idx[p];
        work[r] = cols.val[p];
        if (!mark[r]) {
          mark[r] = 1;
          // DFS reach through L
          dfs_reach(r, pattern, mark, stack, stack_entry);
        }
      }
      // numeric triangular solve in topological order (pattern is in reverse
      // topological order from DFS postorder; traverse from the back)
      for (int t = static_cast<int>(pattern.size()) - 1; t >= 0; --t) {
        int r = pattern[t];
        int k = pinv_[r];
        if (k < 0) continue;
        double xr = work[r];
        if (xr == 0.0) continue;
        for (const auto& [rr, lv] : l_cols_[k]) work[rr] -= lv * xr;
      }
      // pivot: largest magnitude among non-pivotal rows, ties on lowest row
      int pivot_row = -1;
      double best = 0.0;
      for (int r : pattern) {
        if (pinv_[r] >= 0) continue;
        double a = std::fabs(work[r]);
        if (a > best || (a == best && pivot_row >= 0 && r < pivot_row)) {
          best = a;
          pivot_row = r;
        }
      }
      if (pivot_row < 0 || best < 1e-11) {
        clear_marks(pattern, mark, work);
        return false;
      }
      double piv = work[pivot_row];
      diag_[step] = piv;
      for (int r : pattern) {
        double v = work[r];
        if (v == 0.0) {
          continue;
        }
        int k = pinv_[r];
        if (k >= 0)
          u_cols_[step].emplace_back(k, v);
        else if (r != pivot_row)
          l_cols_[step].emplace_back(r, v / piv);
      }
      // deterministic order inside the stored columns
      std::sort(u_cols_[step].begin(), u_cols_[step].end());
      std::sort(l_cols_[step].begin(), l_cols_[step].end());
      pinv_[pivot_row] = step;
      perm_[step] = pivot_row;
      clear_marks(pattern, mark, work);
    }
    return true;
  }

  // Solve B z = a. `a` is sparse as (index,value); result dense by basis pos.
  void ftran(const std::vector<std::pair<int, double>>& a, std::vector<double>& z_by_pos,
             std::vector<double>& work, std::vector<double>& ystore) const {
    std::fill(work.begin(), work.end(), 0.0);
    for (const auto& [r, v] : a) work[r] += v;
    for (int k = 0; k < m_; ++k) {
      double yk = work[perm_[k]];
      ystore[k] = yk;
      if (yk != 0.0)
        for (const auto& [r, lv] : l_cols_[k]) work[r] -= lv * yk;
    }
    for (int k = m_ - 1; k >= 0; --k) {
      double zk = ystore[k] / diag_[k];
      z_by_pos[q_[k]] = zk;
      if (zk != 0.0)
        for (const auto& [p, uv] : u_cols_[k]) ystore[p] -= uv * zk;
    }
  }

  // Solve B^T w = c. `c_by_pos` indexed by basis position; result by row.
  void btran(const std::vector<double>& c_by_pos, std::vector<double>& w_by_row,
             std::vector<double>& v) const {
    for (int k = 0; k < m_; ++k) {
      double s = c_by_pos[q_[k]];
      for (const auto& [p, uv] : u_cols_[k]) s -= uv * v[p];
      v[k] = s / diag_[k];
    }
    for (int k = m_ - 1; k >= 0; --k) {
      double s = v[k];
      // entries of L column k live in rows pivotal at later steps
      for (const auto& [r, lv] : l_cols_[k]) s -= lv * w_by_row[r];
      w_by_row[perm_[k]] = s;
    }
  }

  int size() const { return m_; }

 private:
  void dfs_reach(int root, std::vector<int>& pattern, std::vector<unsigned char>& mark,
                 std::vector<int>& stack, std::vector<int>& entry) const {
    stack.clear();
    entry.clear();
    stack.push_back(root);
    entry.push_back(0);
    while (!stack.empty()) {
      int r = stack.back();
      int k = pinv_[r];
      bool descended = false;
      if (k >= 0) {
        auto& col = l_cols_[k];
        for (int& e = entry.back(); e < static_cast<int>(col.size()); ) {
          int child = col[e].first;
          ++e;
          if (!mark[child]) {
            mark[child] = 1;
            stack.push_back(child);
            entry.push_back(0);
            descended = true;
            break;
          }
        }
      }
      if (!descended) {
        pattern.push_back(r);  // postorder
        stack.pop_back();
        entry.pop_back();
      }
    }
  }

  static void clear_marks(std::vector<int>& pattern, std::vector<unsigned char>& mark,
                          std::vector<double>& work) {
    for (int r : pattern) {
      mark[r] = 0;
      work[r] = 0.0;
    }
    pattern.clear();
  }

  int m_ = 0;
  std::vector<std::vector<std::pair<int, double>>> l_cols_;  // (orig row, value)
  std::vector<std::vector<std::pair<int, double>>> u_cols_;  // (pivot step, value)
  std::vector<double> diag_;
  std::vector<int> perm_;  // step -> original row
  std::vector<int> pinv_;  // original row -> step
  std::vector<int> q_;     // step -> basis position
};

class Simplex {
 public:
  Simplex(const LinearProgram& lp, const Tolerances& tol) : lp_(lp), tol_(tol) {
    n_ = lp.num_variables();
    m_ = lp.num_rows();
    total_ = n_ + m_;
    build_columns();
    lo_.resize(total_);
    up_.resize(total_);
    cost_.assign(total_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = lp.variable(j).lower;
      up_[j] = lp.variable(j).upper;
      cost_[j] = lp.variable(j).cost;
    }
    b_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      const Row& r = lp.row(i);
      b_[i] = r.rhs;
      int s = n_ + i;
      switch (r.sense) {
        case RowSense::le: lo_[s] = 0.0; up_[s] = kInf; break;
        case RowSense::ge: lo_[s] = -kInf; up_[s] = 0.0; break;
        case RowSense::eq: lo_[s] = 0.0; up_[s] = 0.0; break;
      }
    }
  }

  Solution run() {
    if (m_ == 0) return solve_unconstrained();

    init_basis();
    if (!refactor()) return fail_singular();

    // Phase 1: drive the basic variables inside their bounds.
    if (infeasibility() > m_ * tol_.feas) {
      Outcome oc = iterate(true);
      if (oc == Outcome::kIterLimit) return build_solution(SolveStatus::iteration_limit);
      if (infeasibility() > std::max(1.0, norm_b()) * 10 * tol_.feas * m_ ||
          oc == Outcome::kNoProgress) {
        // genuinely infeasible (or stalled at positive infeasibility)
        Solution s = build_solution(SolveStatus::infeasible);
        collect_infeasible_rows(s);
        return s;
      }
    }
    Outcome oc = iterate(false);
    if (oc == Outcome::kIterLimit) return build_solution(SolveStatus::iteration_limit);
    if (oc == Outcome::kUnbounded) {
      Solution s = build_solution(SolveStatus::unbounded);
      s.unbounded_var = unbounded_var_;
      return s;
    }
    return build_solution(SolveStatus::optimal);
  }

  std::int64_t iterations() const { return iter_; }

 private:
  enum class Outcome { kOptimal, kUnbounded, kIterLimit, kNoProgress };

  void build_columns() {
    cols_.m = m_;
    cols_.n = total_;
    std::vector<int> count(total_, 0);
    for (int i = 0; i < m_; ++i)
      for (const RowEntry& e : lp_.row(i).entries) ++count[e.var];
    for (int i = 0; i < m_; ++i) ++count[n_ + i];
    cols_.ptr.assign(total_ + 1, 0);
    for (int j = 0; j < total_; ++j) cols_.ptr[j + 1] = cols_.ptr[j] + count[j];
    cols_.idx.resize(cols_.ptr[total_]);
    cols_.val.resize(cols_.ptr[total_]);
    std::vector<int> fill(total_, 0);
    for (int i = 0; i < m_; ++i) {
      for (const RowEntry& e : lp_.row(i).entries) {
        int p = cols_.ptr[e.var] + fill[e.var]++;
        cols_.idx[p] = i;
        cols_.val[p] = e.coeff;
      }
    }
    for (int i = 0; i < m_; ++i) {
      int j = n_ + i;
      int p = cols_.ptr[j] + fill[j]++;
      cols_.idx[p] = i;
      cols_.val[p] = 1.0;
    }
    // combine duplicate (row,var) entries so columns hold one value per row;
    // structural fill order is row-ascending, so duplicates are adjacent
    std::vector<int> nptr(total_ + 1, 0);
    std::size_t w = 0;
    for (int j = 0; j < total_; ++j) {
      nptr[j] = static_cast<int>(w);
      int p = cols_.ptr[j];
      int end = cols_.ptr[j + 1];
      while (p < end) {
        int r = cols_.idx[p];
        double v = cols_.val[p];
        ++p;
        while (p < end && cols_.idx[p] == r) v += cols_.val[p++];
        if (v != 0.0) {
          cols_.idx[w] = r;
          cols_.val[w] = v;
          ++w;
        }
      }
    }
    nptr[total_] = static_cast<int>(w);
    cols_.ptr = std::move(nptr);
    cols_.idx.resize(w);
    cols_.val.resize(w);
  }

  void init_basis() {
    vstat_.assign(total_, kAtLower);
    for (int j = 0; j < total_; ++j) {
      if (lo_[j] == -kInf && up_[j] == kInf)
        vstat_[j] = kFreeZero;
      else if (lo_[j] == -kInf)
        vstat_[j] = kAtUpper;
      else
        vstat_[j] = kAtLower;
    }
    basis_.resize(m_);
    pos_of_.assign(total_, -1);
    for (int i = 0; i < m_; ++i) {
      basis_[i] = n_ + i;
      vstat_[n_ + i] = kBasic;
      pos_of_[n_ + i] = i;
    }
    xb_.assign(m_, 0.0);
    etas_.clear();
  }

  double nonbasic_value(int j) const {
    switch (vstat_[j]) {
      case kAtLower: return lo_[j];
      case kAtUpper: return up_[j];
      default: return 0.0;
    }
  }

  // b - N x_N, sparse accumulation
  void effective_rhs(std::vector<double>& out) const {
    out.assign(b_.begin(), b_.end());
    for (int j = 0; j < total_; ++j) {
      if (vstat_[j] == kBasic) continue;
      double xj = nonbasic_value(j);
      if (xj == 0.0) continue;
      for (int p = cols_.ptr[j]; p < cols_.ptr[j + 1]; ++p) out[cols_.idx[p]] -= cols_.val[p] * xj;
    }
  }

  bool refactor() {
    if (!lu_.factor(cols_, basis_)) return false;
    etas_.clear();
    std::vector<double> rhs;
    effective_rhs(rhs);
    std::vector<std::pair<int, double>> sparse_rhs;
    sparse_rhs.reserve(m_);
    for (int i = 0; i < m_; ++i)
      if (rhs[i] != 0.0) sparse_rhs.emplace_back(i, rhs[i]);
    ftran_full(sparse_rhs, xb_);
    return true;
  }

  void ftran_full(const std::vector<std::pair<int, double>>& a, std::vector<double>& z) {
    work_.assign(m_, 0.0);
    ystore_.resize(m_);
    z.assign(m_, 0.0);
    lu_.ftran(a, z, work_, ystore_);
    for (const Eta& e : etas_) {
      double zp = z[e.pivot_pos] / e.pivot_val;
      if (zp != 0.0)
        for (const auto& [r, v] : e.other) z[r] -= v * zp;
      z[e.pivot_pos] = zp;
    }
  }

  void btran_full(std::vector<double>& c_by_pos, std::vector<double>& y) {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = c_by_pos[it->pivot_pos];
      for (const auto& [r, v] : it->other) s -= v * c_by_pos[r];
      c_by_pos[it->pivot_pos] = s / it->pivot_val;
    }
    y.assign(m_, 0.0);
    vwork_.resize(m_);
    lu_.btran(c_by_pos, y, vwork_);
  }

  double infeasibility() const {
    double f = 0.0;
    for (int p = 0; p < m_; ++p) {
      int j = basis_[p];
      if (xb_[p] < lo_[j]) f += lo_[j] - xb_[p];
      else if (xb_[p] > up_[j]) f += xb_[p] - up_[j];
    }
    return f;
  }

  double norm_b() const {
    double s = 0.0;
    for (double v : b_) s = std::max(s, std::fabs(v));
    return s;
  }

  // One simplex loop (phase 1 when `phase1`, else phase 2).
  Outcome iterate(bool phase1) {
    const std::int64_t iter_limit = 4'000'000;
    int degenerate_streak = 0;
    bool bland = false;

    std::vector<double> cb(m_), y(m_), d(total_);
    std::vector<double> alpha(m_);

    for (;;) {
      if (iter_ >= iter_limit) return Outcome::kIterLimit;

      if (phase1 && infeasibility() <= m_ * tol_.feas) return Outcome::kOptimal;

      // duals for the current (possibly phase-1) costs
      for (int p = 0; p < m_; ++p) cb[p] = phase1 ? phase1_cost(p) : cost_[basis_[p]];
      btran_full(cb, y);

      // Dantzig pricing, ties on the lowest column index
      int enter = -1;
      double best_score = 0.0;
      int enter_dir = 0;
      for (int j = 0; j < total_; ++j) {
        if (vstat_[j] == kBasic || j == skip_var_) continue;
        double cj = phase1 ? 0.0 : cost_[j];
        double dj = cj;
        for (int p = cols_.ptr[j]; p < cols_.ptr[j + 1]; ++p)
          dj -= y[cols_.idx[p]] * cols_.val[p];
        int dir = 0;
        double score = 0.0;
        if (vstat_[j] == kAtLower || vstat_[j] == kFreeZero) {
          if (dj < -tol_.opt) { dir = +1; score = -dj; }
        }
        if (dir == 0 && (vstat_[j] == kAtUpper || vstat_[j] == kFreeZero)) {
          if (dj > tol_.opt) { dir = -1; score = dj; }
        }
        if (dir == 0) continue;
        if (bland) { enter = j; enter_dir = dir; break; }
        if (score > best_score) { best_score = score; enter = j; enter_dir = dir; }
      }
      if (enter < 0) {
        if (phase1) {
          // no improving direction; positive leftover means infeasible
          return infeasibility() <= m_ * tol_.feas ? Outcome::kOptimal : Outcome::kNoProgress;
        }
        return Outcome::kOptimal;
      }

      // direction through the basis
      std::vector<std::pair<int, double>> acol;
      acol.reserve(cols_.ptr[enter + 1] - cols_.ptr[enter]);
      for (int p = cols_.ptr[enter]; p < cols_.ptr[enter + 1]; ++p)
        acol.emplace_back(cols_.idx[p], cols_.val[p]);
      ftran_full(acol, alpha);

      // ratio test over the basic variables
      double sigma = enter_dir;  // +1 moving up from lower, -1 down from upper
      double theta_basic = kInf;
      int leave_pos = -1;
      bool leave_to_upper = false;
      double best_pivot_mag = 0.0;

      for (int p = 0; p < m_; ++p) {
        double rate = -sigma * alpha[p];
        if (std::fabs(rate) < 1e-11) continue;
        int jb = basis_[p];
        double xv = xb_[p];
        double theta;
        bool to_upper;
        if (phase1 && xv < lo_[jb] - tol_.feas) {
          if (rate <= 0) continue;  // moving further below: no block
          theta = (lo_[jb] - xv) / rate;
          to_upper = false;
        } else if (phase1 && xv > up_[jb] + tol_.feas) {
          if (rate >= 0) continue;
          theta = (up_[jb] - xv) / rate;
          to_upper = true;
        } else if (rate > 0) {
          if (up_[jb] == kInf) continue;
          theta = (up_[jb] - xv) / rate;
          to_upper = true;
        } else {
          if (lo_[jb] == -kInf) continue;
          theta = (lo_[jb] - xv) / rate;
          to_upper = false;
        }
        if (theta < 0) theta = 0;  // degenerate guard
        double tie = 1e-9 * (1.0 + std::fabs(theta_basic));
        bool take = false;
        if (leave_pos < 0 || theta < theta_basic - tie) {
          take = true;
        } else if (theta <= theta_basic + tie) {
          // tie: prefer the numerically larger pivot; Bland prefers low index
          take = bland ? (basis_[p] < basis_[leave_pos])
                       : (std::fabs(alpha[p]) > best_pivot_mag);
        }
        if (take) {
          theta_basic = theta;
          leave_pos = p;
          leave_to_upper = to_upper;
          best_pivot_mag = std::fabs(alpha[p]);
        }
      }

      double theta_flip = up_[enter] - lo_[enter];  // infinite for free vars

      if (leave_pos < 0 && !std::isfinite(theta_flip)) {
        if (phase1) {
          // cannot happen with a bounded infeasibility measure; treat as stall
          return Outcome::kNoProgress;
        }
        unbounded_var_ = enter < n_ ? enter : -1;
        return Outcome::kUnbounded;
      }

      ++iter_;
      bool do_flip = leave_pos < 0 || theta_flip <= theta_basic;
      double theta = do_flip ? theta_flip : theta_basic;
      if (theta <= 1e-12) {
        ++degenerate_streak;
        if (degenerate_streak > 200) bland = true;
      } else {
        degenerate_streak = 0;
        bland = false;
      }

      if (do_flip) {
        apply_step(enter, sigma, theta, alpha);
        vstat_[enter] = (vstat_[enter] == kAtLower) ? kAtUpper : kAtLower;
        continue;
      }

      // basis change
      double piv = alpha[leave_pos];
      if (std::fabs(piv) < 1e-9) {
        if (etas_.empty()) {
          // fresh factorization and still a tiny pivot: this column is nearly
          // parallel to the basis; set it aside for one pricing round
          skip_var_ = enter;
          continue;
        }
        if (!refactor()) return Outcome::kNoProgress;
        continue;  // retry the iteration with fresh numbers
      }
      skip_var_ = -1;
      apply_step(enter, sigma, theta, alpha);
      int leaving = basis_[leave_pos];
      vstat_[leaving] = leave_to_upper ? kAtUpper : kAtLower;
      pos_of_[leaving] = -1;
      basis_[leave_pos] = enter;
      pos_of_[enter] = leave_pos;
      double enter_val = nonbasic_value(enter) + sigma * theta;
      vstat_[enter] = kBasic;
      xb_[leave_pos] = enter_val;

      Eta eta;
      eta.pivot_pos = leave_pos;
      eta.pivot_val = piv;
      for (int p = 0; p < m_; ++p)
        if (p != leave_pos && alpha[p] != 0.0) eta.other.emplace_back(p, alpha[p]);
      etas_.push_back(std::move(eta));

      if (etas_.size() >= 96) {
        if (!refactor()) return Outcome::kNoProgress;
      }
    }
  }

  double phase1_cost(int pos) const {
    int j = basis_[pos];
    if (xb_[pos] < lo_[j] - tol_.feas) return -1.0;
    if (xb_[pos] > up_[j] + tol_.feas) return 1.0;
    return 0.0;
  }

  // move entering variable by sigma*theta, update basic values
  void apply_step(int enter, double sigma, double theta, const std::vector<double>& alpha) {
    (void)enter;
    if (theta == 0.0) return;
    for (int p = 0; p < m_; ++p)
      if (alpha[p] != 0.0) xb_[p] -= sigma * theta * alpha[p];
  }

  Solution solve_unconstrained() {
    Solution sol;
    sol.x.assign(n_, 0.0);
    double obj = lp_.objective_offset();
    for (int j = 0; j < n_; ++j) {
      const Variable& v = lp_.variable(j);
      double xj;
      if (v.cost > 0) {
        if (v.lower == -kInf) { sol.status = SolveStatus::unbounded; sol.unbounded_var = j; return sol; }
        xj = v.lower;
      } else if (v.cost < 0) {
        if (v.upper == kInf) { sol.status = SolveStatus::unbounded; sol.unbounded_var = j; return sol; }
        xj = v.upper;
      } else {
        xj = std::isfinite(v.lower) ? v.lower : (std::isfinite(v.upper) ? v.upper : 0.0);
      }
      sol.x[j] = xj;
      obj += v.cost * xj;
    }
    sol.status = SolveStatus::optimal;
    sol.objective = obj;
    sol.reduced_cost.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) sol.reduced_cost[j] = lp_.variable(j).cost;
    sol.iterations = 0;
    return sol;
  }

  Solution fail_singular() {
    // A slack basis is always factorizable, so this indicates a logic error.
    throw ModelError("simplex: initial basis factorization failed");
  }

  Solution build_solution(SolveStatus status) {
    Solution sol;
    sol.status = status;
    sol.iterations = iter_;
    sol.x.assign(n_, 0.0);
    std::vector<double> full(total_, 0.0);
    for (int j = 0; j < total_; ++j)
      if (vstat_[j] != kBasic) full[j] = nonbasic_value(j);
    for (int p = 0; p < m_; ++p) full[basis_[p]] = xb_[p];
    for (int j = 0; j < n_; ++j) sol.x[j] = full[j];

    double obj = lp_.objective_offset();
    for (int j = 0; j < n_; ++j) obj += cost_[j] * full[j];
    sol.objective = obj;

    // duals from the final basis (phase-2 costs)
    std::vector<double> cb(m_), y(m_);
    for (int p = 0; p < m_; ++p) cb[p] = cost_[basis_[p]];
    btran_full(cb, y);
    sol.row_dual.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) sol.row_dual[i] = y[i];
    sol.reduced_cost.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (vstat_[j] == kBasic) { sol.reduced_cost[j] = 0.0; continue; }
      double dj = cost_[j];
      for (int p = cols_.ptr[j]; p < cols_.ptr[j + 1]; ++p) dj -= y[cols_.idx[p]] * cols_.val[p];
      sol.reduced_cost[j] = dj;
    }
    sol.row_activity.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const Row& r = lp_.row(i);
      double a = 0.0;
      for (const RowEntry& e : r.entries) a += e.coeff * sol.x[e.var];
      sol.row_activity[i] = a;
    }
    return sol;
  }

  void collect_infeasible_rows(Solution& sol) {
    sol.infeasible_rows.clear();
    for (int i = 0; i < m_; ++i) {
      const Row& r = lp_.row(i);
      double a = sol.row_activity.empty() ? 0.0 : sol.row_activity[i];
      double viol = 0.0;
      switch (r.sense) {
        case RowSense::le: viol = std::max(0.0, a - r.rhs); break;
        case RowSense::ge: viol = std::max(0.0, r.rhs - a); break;
        case RowSense::eq: viol = std::fabs(a - r.rhs); break;
      }
      if (viol > tol_.feas * 10) sol.infeasible_rows.emplace_back(i, viol);
    }
    std::sort(sol.infeasible_rows.begin(), sol.infeasible_rows.end(),
              [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
              });
  }

  const LinearProgram& lp_;
  Tolerances tol_;
  int n_ = 0, m_ = 0, total_ = 0;
  Csc cols_;
  std::vector<double> lo_, up_, cost_, b_;
  std::vector<int> basis_, pos_of_;
  std::vector<unsigned char> vstat_;
  std::vector<double> xb_;
  std::vector<Eta> etas_;
  LuFactors lu_;
  std::vector<double> work_, ystore_, vwork_;
  std::int64_t iter_ = 0;
  int unbounded_var_ = -1;
  int skip_var_ = -1;
};

}  // namespace

Solution solve(const LinearProgram& lp, const Tolerances& tol) {
  lp.validate();
  Simplex s(lp, tol);
  Solution sol = s.run();
  sol.iterations = s.iterations();
  return sol;
}

Solution ReferenceSimplexBackend::solve(const LinearProgram& lp, const Tolerances& tol) {
  return lp::solve(lp, tol);
}

CheckReport verify(const LinearProgram& lp, const Solution& sol, const Tolerances& tol) {
  CheckReport rep;
  auto fail = [&rep](const std::string& msg) {
    rep.ok = false;
    rep.violations.push_back(msg);
  };
  if (sol.status != SolveStatus::optimal) {
    fail("solution status is not optimal");
    return rep;
  }
  int n = lp.num_variables(), m = lp.num_rows();
  if (static_cast<int>(sol.x.size()) != n || static_cast<int>(sol.row_dual.size()) != m) {
    fail("solution dimensions do not match the model");
    return rep;
  }

  // primal bounds
  for (int j = 0; j < n; ++j) {
    const Variable& v = lp.variable(j);
    double bel = std::max(0.0, v.lower - sol.x[j]);
    double abv = std::max(0.0, sol.x[j] - v.upper);
    double viol = std::max(bel, abv);
    if (viol > rep.max_bound_violation) rep.max_bound_violation = viol;
    if (viol > tol.feas) fail("bound violated on variable " + v.name);
  }
  // rows
  std::vector<double> activity(m, 0.0);
  for (int i = 0; i < m; ++i) {
    const Row& r = lp.row(i);
    double a = 0.0;
    for (const RowEntry& e : r.entries) a += e.coeff * sol.x[e.var];
    activity[i] = a;
    double viol = 0.0;
    switch (r.sense) {
      case RowSense::le: viol = std::max(0.0, a - r.rhs); break;
      case RowSense::ge: viol = std::max(0.0, r.rhs - a); break;
      case RowSense::eq: viol = std::fabs(a - r.rhs); break;
    }
    double scale = 1.0 + std::fabs(r.rhs);
    if (viol > rep.max_row_violation) rep.max_row_violation = viol;
    if (viol > tol.feas * scale * 10) fail("row violated: " + r.name);
  }

  // dual sign conventions: for a minimization, a <= row must have y <= 0 only
  // if it binds from... we use the convention y = d(obj)/d(rhs): le rows give
  // y <= 0 is NOT required; instead complementary slackness + reduced-cost
  // consistency pin everything down:
  //   d_j = c_j - sum_i y_i a_ij; x_j at lower => d_j >= -tol; at upper =>
  //   d_j <= tol; interior => |d_j| <= tol.
  double dual_tol = std::max(tol.feas, 1e-7);
  for (int i = 0; i < m; ++i) {
    const Row& r = lp.row(i);
    double slack = r.rhs - activity[i];
    double y = sol.row_dual[i];
    if (r.sense == RowSense::le) {
      // loose row needs zero dual; rhs increase of a le row cannot hurt: y <= 0
      if (y > dual_tol) {
        rep.max_dual_violation = std::max(rep.max_dual_violation, y);
        fail("le row with positive dual: " + r.name);
      }
      double cs = std::fabs(y) * std::fabs(slack);
      rep.max_comp_slack_violation = std::max(rep.max_comp_slack_violation, cs);
      if (std::fabs(slack) > dual_tol * (1 + std::fabs(r.rhs)) && std::fabs(y) > dual_tol)
        fail("complementary slackness violated on row " + r.name);
    } else if (r.sense == RowSense::ge) {
      if (y < -dual_tol) {
        rep.max_dual_violation = std::max(rep.max_dual_violation, -y);
        fail("ge row with negative dual: " + r.name);
      }
      double cs = std::fabs(y) * std::fabs(slack);
      rep.max_comp_slack_violation = std::max(rep.max_comp_slack_violation, cs);
      if (std::fabs(slack) > dual_tol * (1 + std::fabs(r.rhs)) && std::fabs(y) > dual_tol)
        fail("complementary slackness violated on row " + r.name);
    }
  }

  // reduced-cost consistency and variable complementary slackness
  std::vector<double> dj(n, 0.0);
  for (int j = 0; j < n; ++j) dj[j] = lp.variable(j).cost;
  for (int i = 0; i < m; ++i)
    for (const RowEntry& e : lp.row(i).entries) dj[e.var] -= sol.row_dual[i] * e.coeff;
  for (int j = 0; j < n; ++j) {
    const Variable& v = lp.variable(j);
    double scale = 1.0 + std::fabs(v.cost);
    double at_lo = std::isfinite(v.lower) ? std::fabs(sol.x[j] - v.lower) : kInf;
    double at_up = std::isfinite(v.upper) ? std::fabs(sol.x[j] - v.upper) : kInf;
    double slack_tol = tol.feas * (1 + std::fabs(sol.x[j])) * 10;
    bool on_lower = at_lo <= slack_tol;
    bool on_upper = at_up <= slack_tol;
    if (!on_lower && dj[j] > dual_tol * scale) {
      rep.max_dual_violation = std::max(rep.max_dual_violation, dj[j]);
      fail("positive reduced cost off lower bound: " + v.name);
    }
    if (!on_upper && dj[j] < -dual_tol * scale) {
      rep.max_dual_violation = std::max(rep.max_dual_violation, -dj[j]);
      fail("negative reduced cost off upper bound: " + v.name);
    }
  }

  // duality gap: dual objective = y.b + sum_j d_j * (bound the variable sits on)
  double dual_obj = lp.objective_offset();
  for (int i = 0; i < m; ++i) dual_obj += sol.row_dual[i] * lp.row(i).rhs;
  for (int j = 0; j < n; ++j) {
    const Variable& v = lp.variable(j);
    if (dj[j] > 0 && std::isfinite(v.lower)) dual_obj += dj[j] * v.lower;
    else if (dj[j] < 0 && std::isfinite(v.upper)) dual_obj += dj[j] * v.upper;
    else if (std::fabs(dj[j]) > dual_tol * (1 + std::fabs(v.cost))) {
      // nonzero reduced cost on an unbounded side: dual infeasible
      fail("dual infeasibility via reduced cost on unbounded variable " + v.name);
    }
  }
  double denom = std::max({1.0, std::fabs(sol.objective), std::fabs(dual_obj)});
  rep.duality_gap_rel = std::fabs(sol.objective - dual_obj) / denom;
  if (rep.duality_gap_rel > tol.gap) fail("duality gap exceeds tolerance");
  return rep;
}

}  // namespace evflex::lp
