#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "csmamf/errors.hpp"
#include "csmamf/meanfield.hpp"
#include "csmamf/simulator.hpp"

namespace csmamf {

/// Asymptotic per-class performance laws at a stable fixed point: the
/// stationary queue length is Geo(xi_c) and the scaled waiting and sojourn
/// times are Exp((1-xi_c)/xi_c).
struct LimitLaws {
  std::vector<double> xi;
  std::vector<double> exp_rate;          // (1-xi)/xi
  std::vector<double> mean_scaled_wait;  // xi/(1-xi), also the mean queue length

  double geometric_pmf(int c, int n) const { return (1.0 - xi[c]) * std::pow(xi[c], n); }
  double tail(int c, int n) const { return std::pow(xi[c], n); }  // P(Q >= n)

  // Probability generating function of Geo(xi) at s.
  double queue_pgf(int c, double s) const { return (1.0 - xi[c]) / (1.0 - xi[c] * s); }

  // Laplace-Stieltjes transform of the limiting scaled waiting time at z; by
  // the distributional form of Little's law it equals queue_pgf(c, 1-z).
  double wait_lst(int c, double z) const {
    if (std::isinf(exp_rate[c])) return 1.0;  // xi = 0: point mass at zero wait
    return exp_rate[c] / (exp_rate[c] + z);
  }
};

inline LimitLaws limit_laws(const FixedPointResult& fp) {
  LimitLaws laws;
  laws.xi = fp.xi;
  for (double x : fp.xi) {
    if (!(x < 1.0))
      throw InfeasibleError("limit laws need a stable fixed point (some xi >= 1)");
    if (!(x >= 0.0)) throw ConfigError("limit laws: negative activity factor");
    laws.exp_rate.push_back(x > 0.0 ? (1.0 - x) / x : std::numeric_limits<double>::infinity());
    laws.mean_scaled_wait.push_back(x / (1.0 - x));
  }
  return laws;
}

/// What the comparison needs from a simulation: the averaged population
/// distribution plus per-class waiting-time estimates. Built from a single
/// run (iid standard errors) or from pooled replicas (spread of per-replica
/// means).
struct EmpiricalSummary {
  PopulationState x_hat;
  std::vector<double> mean_wait;  // raw time units
  std::vector<double> wait_se;
  std::vector<std::uint64_t> wait_count;
  std::vector<int> nodes_per_class;

  static EmpiricalSummary from(const SimStats& stats) {
    EmpiricalSummary s;
    s.x_hat = stats.x_hat;
    s.nodes_per_class = stats.nodes_per_class;
    for (const auto& c : stats.per_class) {
      s.mean_wait.push_back(c.mean_wait);
      s.wait_count.push_back(c.wait_samples.size());
      double ss = 0.0;
      for (double w : c.wait_samples) ss += (w - c.mean_wait) * (w - c.mean_wait);
      const std::size_t n = c.wait_samples.size();
      s.wait_se.push_back(n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0);
    }
    return s;
  }

  static EmpiricalSummary from(const ReplicateResult& pooled) {
    EmpiricalSummary s;
    s.x_hat = pooled.x_hat;
    s.nodes_per_class = pooled.runs.front().nodes_per_class;
    for (const auto& c : pooled.per_class) {
      s.mean_wait.push_back(c.mean_wait);
      s.wait_se.push_back(c.mean_wait_stderr);
      s.wait_count.push_back(c.wait_count);
    }
    return s;
  }
};

struct ClassComparison {
  double distance = 0.0;            // euclidean distance between x_hat and x_star rows
  double tail_gap = 0.0;            // sup_n |P_hat(Q >= n) - xi^n| over non-noise bins
  double scaled_wait_direct = 0.0;  // (lambda_c/N_c) * empirical mean waiting time
  double scaled_wait_little = 0.0;  // mean mass of the averaged population distribution
  double scaled_wait_limit = 0.0;   // xi/(1-xi)
  double wait_rel_error = 0.0;      // |direct - limit| / limit
  bool estimators_consistent = true;
};

struct ComparisonReport {
  std::vector<ClassComparison> per_class;
  double pseudo_conservation_residual = -1.0;  // complete base-model graphs only, else -1
  bool complete_graph = false;
};

/// Relative residual of the polling-system pseudo-conservation identity,
/// evaluated with empirical per-class mean waiting times. The identity holds
/// exactly in stationarity, so the residual measures estimation error.
inline double pseudo_conservation_residual(const std::vector<double>& mean_wait,
                                           const NetworkParams& params,
                                           const std::vector<int>& nodes_per_class) {
  const int C = params.num_classes();
  if (static_cast<int>(mean_wait.size()) != C || static_cast<int>(nodes_per_class.size()) != C)
    throw ConfigError("pseudo-conservation: per-class vectors have wrong length");

  double rho = 0.0, nu_total = 0.0;
  for (int c = 0; c < C; ++c) {
    rho += params.lambda[c] / params.mu[c];
    nu_total += params.nu[c];
  }
  if (!(rho < 1.0)) throw InfeasibleError("pseudo-conservation: total load must be below 1");

  double lhs = 0.0, rhs = rho / nu_total;
  for (int c = 0; c < C; ++c) {
    const double lam = params.lambda[c];
    const double mu = params.mu[c];
    const double nu = params.nu[c];
    lhs += (lam / mu) * (1.0 - (lam / nu) / (1.0 - rho)) * mean_wait[c];
    rhs += rho / (1.0 - rho) * lam / (mu * mu);
    rhs += (1.0 / (1.0 - rho)) * nodes_per_class[c] * lam / (mu * nu);
    rhs -= lam / (nu_total * mu);
  }
  return std::abs(lhs - rhs) / std::abs(rhs);
}

inline double pseudo_conservation_residual(const SimStats& stats, const NetworkParams& params,
                                           const ActivitySpace& space) {
  if (!space.complete_graph())
    throw ConfigError("pseudo-conservation law applies to complete interference graphs only");
  std::vector<double> w;
  for (const auto& c : stats.per_class) {
    if (c.wait_samples.empty())
      throw ConfigError("pseudo-conservation: no waiting-time samples");
    w.push_back(c.mean_wait);
  }
  return pseudo_conservation_residual(w, params, stats.nodes_per_class);
}

/// Quantitative comparison of simulated statistics against the asymptotic
/// laws: population distance, tail gaps, and the two scaled waiting-time
/// estimators (direct tagging and the Little's-law route).
inline ComparisonReport compare(const EmpiricalSummary& emp, const LimitLaws& laws,
                                const FixedPointResult& fp, const ActivitySpace& space,
                                const NetworkParams& params) {
  const int C = static_cast<int>(laws.xi.size());
  if (emp.x_hat.num_classes != C) throw ConfigError("compare: class count mismatch");

  ComparisonReport rep;
  rep.complete_graph = space.complete_graph();
  rep.per_class.resize(C);

  for (int c = 0; c < C; ++c) {
    auto& out = rep.per_class[c];
    if (emp.wait_count[c] == 0)
      throw ConfigError("compare: class " + std::to_string(c) +
                        " has no waiting-time samples (insufficient data)");

    out.distance = distance_l2_class(emp.x_hat, fp.x_star, c);

    // Tail gaps, capped where the limiting tail falls below pure noise.
    double cum = 0.0;
    for (int n = 0; n <= emp.x_hat.n_max; ++n) {
      const double limit_tail = laws.tail(c, n);
      if (limit_tail < 1e-6) break;
      out.tail_gap = std::max(out.tail_gap, std::abs((1.0 - cum) - limit_tail));
      cum += emp.x_hat.at(c, n);
    }

    const double lam_per_node = params.lambda[c] / emp.nodes_per_class[c];
    out.scaled_wait_direct = lam_per_node * emp.mean_wait[c];
    out.scaled_wait_little = emp.x_hat.mass(c);
    out.scaled_wait_limit = laws.mean_scaled_wait[c];
    out.wait_rel_error =
        std::abs(out.scaled_wait_direct - out.scaled_wait_limit) / out.scaled_wait_limit;

    // Both estimators target the same quantity; a gap beyond three standard
    // errors of the direct one points at a simulator defect.
    const double se = lam_per_node * emp.wait_se[c];
    out.estimators_consistent =
        std::abs(out.scaled_wait_direct - out.scaled_wait_little) <=
        3.0 * se + 1e-3 * out.scaled_wait_limit;
  }

  if (rep.complete_graph && params.variant == ModelVariant::base)
    rep.pseudo_conservation_residual =
        pseudo_conservation_residual(emp.mean_wait, params, emp.nodes_per_class);
  return rep;
}

inline ComparisonReport compare(const SimStats& stats, const LimitLaws& laws,
                                const FixedPointResult& fp, const ActivitySpace& space,
                                const NetworkParams& params) {
  return compare(EmpiricalSummary::from(stats), laws, fp, space, params);
}

}  // namespace csmamf
