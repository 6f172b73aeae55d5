#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "lossgame/core.hpp"

namespace lossgame::lp {

enum class Status { optimal, infeasible, unbounded };

/// Linear program over x >= 0:
///   maximize objective . x   subject to   eq_a x = eq_b,  ge_a x >= ge_b.
/// An empty objective asks for feasibility only.
struct Problem {
  int vars = 0;
  std::vector<std::vector<double>> eq_a;
  std::vector<double> eq_b;
  std::vector<std::vector<double>> ge_a;
  std::vector<double> ge_b;
  std::vector<double> objective;
};

struct Solution {
  Status status = Status::infeasible;
  std::vector<double> x;
  double value = 0.0;
};

namespace detail {

inline void pivot(std::vector<std::vector<double>>& t, std::vector<int>& basis,
                  int row, int col) {
  const double p = t[row][col];
  for (double& v : t[row]) v /= p;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (static_cast<int>(i) == row) continue;
    const double f = t[i][col];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < t[i].size(); ++j) t[i][j] -= f * t[row][j];
  }
  basis[row] = col;
}

/// Bland-rule simplex over the current basic feasible tableau; columns at
/// index >= eligible never enter. Returns false when unbounded.
inline bool run(std::vector<std::vector<double>>& t, std::vector<int>& basis,
                const std::vector<double>& cost, int eligible) {
  const int m = static_cast<int>(t.size());
  for (int iter = 0; iter < 20000; ++iter) {
    int enter = -1;
    for (int j = 0; j < eligible; ++j) {
      double rc = cost[j];
      for (int i = 0; i < m; ++i) rc -= cost[basis[i]] * t[i][j];
      if (rc > 1e-9) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return true;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (t[i][enter] <= 1e-11) continue;
      const double ratio = t[i].back() / t[i][enter];
      if (ratio < best - 1e-12 ||
          (ratio < best + 1e-12 && (leave < 0 || basis[i] < basis[leave]))) {
        best = ratio;
        leave = i;
      }
    }
    if (leave < 0) return false;
    pivot(t, basis, leave, enter);
  }
  throw numerical_error("lp: simplex iteration limit reached");
}

}  // namespace detail

inline Solution solve(const Problem& pr) {
  const int nv = pr.vars;
  const int ne = static_cast<int>(pr.eq_a.size());
  const int ng = static_cast<int>(pr.ge_a.size());
  const int m = ne + ng;
  const int ncols = nv + ng + m;  // structural, surplus, artificial

  std::vector<std::vector<double>> t(m, std::vector<double>(ncols + 1, 0.0));
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) {
    const bool is_ge = i >= ne;
    const std::vector<double>& row = is_ge ? pr.ge_a[i - ne] : pr.eq_a[i];
    double rhs = is_ge ? pr.ge_b[i - ne] : pr.eq_b[i];
    for (int j = 0; j < nv; ++j) t[i][j] = row[j];
    if (is_ge) t[i][nv + (i - ne)] = -1.0;
    t[i][ncols] = rhs;
    if (rhs < 0.0)
      for (double& v : t[i]) v = -v;
    t[i][nv + ng + i] = 1.0;
    basis[i] = nv + ng + i;
  }

  std::vector<double> phase1(ncols, 0.0);
  for (int i = 0; i < m; ++i) phase1[nv + ng + i] = -1.0;
  detail::run(t, basis, phase1, nv + ng);
  double art_sum = 0.0;
  for (int i = 0; i < m; ++i)
    if (basis[i] >= nv + ng) art_sum += t[i][ncols];
  if (art_sum > 1e-7) return {Status::infeasible, {}, 0.0};

  // drive leftover (zero-level) artificials out of the basis
  for (int i = 0; i < m; ++i) {
    if (basis[i] < nv + ng) continue;
    int col = -1;
    for (int j = 0; j < nv + ng; ++j)
      if (std::abs(t[i][j]) > 1e-9) {
        col = j;
        break;
      }
    if (col >= 0) {
      detail::pivot(t, basis, i, col);
    } else {
      for (int j = 0; j <= ncols; ++j) t[i][j] = 0.0;  // redundant row
    }
  }

  std::vector<double> cost(ncols, 0.0);
  for (int j = 0; j < nv && j < static_cast<int>(pr.objective.size()); ++j)
    cost[j] = pr.objective[j];
  if (!pr.objective.empty())
    if (!detail::run(t, basis, cost, nv + ng)) return {Status::unbounded, {}, 0.0};

  Solution sol;
  sol.status = Status::optimal;
  sol.x.assign(nv, 0.0);
  for (int i = 0; i < m; ++i)
    if (basis[i] < nv) sol.x[basis[i]] = t[i][ncols];
  for (int j = 0; j < nv && j < static_cast<int>(pr.objective.size()); ++j)
    sol.value += pr.objective[j] * sol.x[j];
  return sol;
}

}  // namespace lossgame::lp
