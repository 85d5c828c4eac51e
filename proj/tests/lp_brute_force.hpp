#pragma once

// Test-only oracle: solves small boxed LPs by enumerating all candidate
// vertices (every n-subset of active hyperplanes drawn from row boundaries
// and variable bounds). Independent of the simplex implementation.

#include <cmath>
#include <vector>

#include "evflex/lp_core.hpp"
#include "evflex/rng.hpp"

namespace evflex::testutil {

struct BruteForceResult {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> x;
};

namespace detail {

// Gaussian elimination with partial pivoting; returns false if singular.
inline bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> b,
                        std::vector<double>& out) {
  int n = static_cast<int>(b.size());
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::fabs(a[i][k]) > std::fabs(a[piv][k])) piv = i;
    if (std::fabs(a[piv][k]) < 1e-10) return false;
    std::swap(a[piv], a[k]);
    std::swap(b[piv], b[k]);
    for (int i = k + 1; i < n; ++i) {
      double f = a[i][k] / a[k][k];
      if (f == 0.0) continue;
      for (int j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  out.assign(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a[i][j] * out[j];
    out[i] = s / a[i][i];
  }
  return true;
}

inline bool point_feasible(const lp::LinearProgram& lp, const std::vector<double>& x,
                           double tol = 1e-9) {
  for (int j = 0; j < lp.num_variables(); ++j) {
    const lp::Variable& v = lp.variable(j);
    if (x[j] < v.lower - tol || x[j] > v.upper + tol) return false;
  }
  for (int i = 0; i < lp.num_rows(); ++i) {
    const lp::Row& r = lp.row(i);
    double a = 0.0;
    for (const lp::RowEntry& e : r.entries) a += e.coeff * x[e.var];
    switch (r.sense) {
      case lp::RowSense::le:
        if (a > r.rhs + tol) return false;
        break;
      case lp::RowSense::ge:
        if (a < r.rhs - tol) return false;
        break;
      case lp::RowSense::eq:
        if (std::fabs(a - r.rhs) > tol) return false;
        break;
    }
  }
  return true;
}

}  // namespace detail

// Requires every variable to have finite bounds (a boxed LP), which makes the
// feasible set a polytope whose optimum sits on a vertex.
inline BruteForceResult brute_force_solve(const lp::LinearProgram& lp) {
  int n = lp.num_variables();
  int m = lp.num_rows();

  // hyperplane catalogue: rows first, then lower bounds, then upper bounds
  struct Plane {
    std::vector<double> normal;
    double rhs;
  };
  std::vector<Plane> planes;
  for (int i = 0; i < m; ++i) {
    Plane p;
    p.normal.assign(n, 0.0);
    for (const lp::RowEntry& e : lp.row(i).entries) p.normal[e.var] += e.coeff;
    p.rhs = lp.row(i).rhs;
    planes.push_back(std::move(p));
  }
  for (int j = 0; j < n; ++j) {
    Plane p;
    p.normal.assign(n, 0.0);
    p.normal[j] = 1.0;
    p.rhs = lp.variable(j).lower;
    planes.push_back(p);
    p.rhs = lp.variable(j).upper;
    planes.push_back(std::move(p));
  }

  BruteForceResult best;
  int total = static_cast<int>(planes.size());
  std::vector<int> pick(n);
  // enumerate all n-subsets of planes
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  if (n > total) return best;
  for (;;) {
    std::vector<std::vector<double>> a(n);
    std::vector<double> b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = planes[idx[i]].normal;
      b[i] = planes[idx[i]].rhs;
    }
    std::vector<double> x;
    if (detail::solve_dense(std::move(a), std::move(b), x) && detail::point_feasible(lp, x)) {
      double obj = lp.objective_offset();
      for (int j = 0; j < n; ++j) obj += lp.variable(j).cost * x[j];
      if (!best.feasible || obj < best.objective) {
        best.feasible = true;
        best.objective = obj;
        best.x = x;
      }
    }
    // next combination
    int i = n - 1;
    while (i >= 0 && idx[i] == total - n + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int k = i + 1; k < n; ++k) idx[k] = idx[k - 1] + 1;
  }
  return best;
}

// Random boxed LP with <= 6 variables and <= 6 rows; roughly one in five is
// infeasible so both solver outcomes get exercised.
inline lp::LinearProgram random_boxed_lp(Rng& rng) {
  lp::LinearProgram lp;
  int n = 1 + static_cast<int>(rng.next_below(6));
  int m = static_cast<int>(rng.next_below(7));
  for (int j = 0; j < n; ++j) {
    double lo = rng.next_bernoulli(0.3) ? -1.0 - 2.0 * rng.next_double() : 0.0;
    double up = lo + 0.2 + 4.0 * rng.next_double();
    double cost = -3.0 + 6.0 * rng.next_double();
    lp.add_variable("x" + std::to_string(j), lo, up, cost);
  }
  for (int i = 0; i < m; ++i) {
    lp::RowSense sense = static_cast<lp::RowSense>(rng.next_below(3));
    double rhs = -4.0 + 8.0 * rng.next_double();
    int r = lp.add_row("r" + std::to_string(i), sense, rhs);
    int nnz = 1 + static_cast<int>(rng.next_below(std::min(n, 4)));
    // pick distinct variables
    std::vector<int> vars;
    while (static_cast<int>(vars.size()) < nnz) {
      int v = static_cast<int>(rng.next_below(n));
      bool dup = false;
      for (int w : vars) dup |= (w == v);
      if (!dup) vars.push_back(v);
    }
    for (int v : vars) {
      double c = 0.0;
      while (std::fabs(c) < 0.1) c = -2.0 + 4.0 * rng.next_double();
      lp.add_entry(r, v, c);
    }
  }
  return lp;
}

}  // namespace evflex::testutil
