#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "csmamf/errors.hpp"

namespace csmamf {

struct LpResult {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> x;
};

// Dense two-phase primal simplex with Bland's rule for
//   min c'x  s.t.  A x = b,  x >= 0.
// Bland's rule makes the pivot sequence deterministic and cycle-free; fine
// for the small dense problems this library generates (rows = C+O(1)).
class SimplexSolver {
public:
  explicit SimplexSolver(double eps = 1e-11, std::size_t max_pivots = 200000)
      : eps_(eps), max_pivots_(max_pivots) {}

  LpResult solve(std::vector<std::vector<double>> a, std::vector<double> b,
                 std::vector<double> c) const {
    const std::size_t m = a.size();
    const std::size_t n = m == 0 ? 0 : a[0].size();
    if (b.size() != m || c.size() != n) throw ConfigError("simplex: dimension mismatch");

    for (std::size_t i = 0; i < m; ++i) {
      if (b[i] < 0) {
        b[i] = -b[i];
        for (auto& v : a[i]) v = -v;
      }
    }

    // Tableau columns: n structural + m artificial + rhs.
    const std::size_t cols = n + m + 1;
    std::vector<std::vector<double>> t(m, std::vector<double>(cols, 0.0));
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
      t[i][n + i] = 1.0;
      t[i][cols - 1] = b[i];
      basis[i] = n + i;
    }

    // Phase 1: minimize the sum of artificials.
    std::vector<double> phase1(cols - 1, 0.0);
    for (std::size_t j = n; j < n + m; ++j) phase1[j] = 1.0;
    double obj1 = run(t, basis, phase1, n + m);
    if (obj1 > 1e-8) return {};  // infeasible

    // Drive leftover artificials out of the basis.
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] < n) continue;
      std::size_t pivot_col = n;
      for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(t[i][j]) > eps_) {
          pivot_col = j;
          break;
        }
      }
      if (pivot_col == n) continue;  // redundant row, harmless
      pivot(t, basis, i, pivot_col);
    }

    // Phase 2 over structural columns only.
    std::vector<double> full_cost(cols - 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) full_cost[j] = c[j];
    double obj2 = run(t, basis, full_cost, n);

    LpResult res;
    res.feasible = true;
    res.objective = obj2;
    res.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] < n) res.x[basis[i]] = t[i].back();
    return res;
  }

private:
  // Runs simplex on the current tableau minimizing `cost`, allowing entering
  // columns < col_limit. Returns the objective value.
  double run(std::vector<std::vector<double>>& t, std::vector<std::size_t>& basis,
             const std::vector<double>& cost, std::size_t col_limit) const {
    const std::size_t m = t.size();
    const std::size_t cols = t[0].size();
    std::vector<double> z(cols, 0.0);  // reduced-cost row incl. objective in back()
    auto rebuild_costs = [&] {
      std::fill(z.begin(), z.end(), 0.0);
      for (std::size_t j = 0; j + 1 < cols; ++j) z[j] = cost[j];
      for (std::size_t i = 0; i < m; ++i) {
        const double cb = cost[basis[i]];
        if (cb == 0.0) continue;
        for (std::size_t j = 0; j < cols; ++j) z[j] -= cb * t[i][j];
      }
    };
    rebuild_costs();

    for (std::size_t iter = 0; iter < max_pivots_; ++iter) {
      // Bland: first improving column.
      std::size_t enter = col_limit;
      for (std::size_t j = 0; j < col_limit; ++j) {
        if (z[j] < -eps_) {
          enter = j;
          break;
        }
      }
      if (enter == col_limit) return -z[cols - 1];

      // Min-ratio row; ties by smallest basis index (Bland).
      std::size_t leave = m;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        if (t[i][enter] > eps_) {
          const double ratio = t[i][cols - 1] / t[i][enter];
          if (ratio < best - eps_ || (ratio < best + eps_ && (leave == m || basis[i] < basis[leave]))) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave == m) throw NumericalError("simplex: unbounded objective");

      pivot(t, basis, leave, enter);
      const double cb = z[enter];
      for (std::size_t j = 0; j < cols; ++j) z[j] -= cb * t[leave][j];
    }
    throw NumericalError("simplex: pivot limit exceeded");
  }

  void pivot(std::vector<std::vector<double>>& t, std::vector<std::size_t>& basis,
             std::size_t row, std::size_t col) const {
    const std::size_t m = t.size();
    const std::size_t cols = t[0].size();
    const double p = t[row][col];
    for (std::size_t j = 0; j < cols; ++j) t[row][j] /= p;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == row) continue;
      const double f = t[i][col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) t[i][j] -= f * t[row][j];
    }
    basis[row] = col;
  }

  double eps_;
  std::size_t max_pivots_;
};

}  // namespace csmamf
