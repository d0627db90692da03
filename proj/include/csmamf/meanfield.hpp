#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "csmamf/errors.hpp"
#include "csmamf/graph.hpp"
#include "csmamf/params.hpp"
#include "csmamf/population.hpp"
#include "csmamf/stationary.hpp"

namespace csmamf {

namespace detail {

// Per-class product-form state weight induced by the current population, for
// the variant at hand. The base model uses (1 - x_{c,0}) nu_c / mu_c, the
// multi-rate model U_c nu_c (1 - x_{c,0}), the queue-based model
// sum_n nu_c(n) x_{c,n} / mu_c; the finite-buffer model matches the base one.
inline std::vector<double> population_weights(const PopulationState& x,
                                              const NetworkParams& params) {
  const int C = x.num_classes;
  std::vector<double> w(C);
  for (int c = 0; c < C; ++c) {
    if (params.variant == ModelVariant::queue_based) {
      double agg = 0.0;
      for (int n = 1; n <= x.n_max; ++n)
        agg += params.backoff[c].rate(n, params.nu[c]) * x.at(c, n);
      w[c] = agg / params.mu[c];
    } else {
      w[c] = (1.0 - x.empty_fraction(c)) * params.sigma(c);
    }
    w[c] = std::max(w[c], 0.0);  // clip float dust at the simplex boundary
  }
  return w;
}

}  // namespace detail

/// pi_x(Omega_-c) for every class: the instantaneous probability that the
/// fast activity process sits in a state where class c may back off, given
/// the population x.
inline std::vector<double> backoff_measure(const PopulationState& x, const NetworkParams& params,
                                           const ActivitySpace& space) {
  const ActivityDistribution d =
      detail::distribution_from_weights(space, detail::population_weights(x, params));
  std::vector<double> m(space.num_classes);
  for (int c = 0; c < space.num_classes; ++c) m[c] = d.mass(space.omega_minus[c]);
  return m;
}

namespace detail {

// Drift without the simplex precondition, for integrator stages.
inline PopulationState drift_unchecked(const PopulationState& x, const NetworkParams& params,
                                       const ActivitySpace& space) {
  const int C = x.num_classes;
  const int top = x.n_max;
  const std::vector<double> pi_minus = backoff_measure(x, params, space);

  PopulationState h(C, top);
  for (int c = 0; c < C; ++c) {
    const double lam = params.lambda[c];
    const double inv_p = 1.0 / params.p[c];
    // Arrivals above the cap (finite-buffer K_c or the truncation level) are
    // dropped, which keeps row sums conserved on the truncated state.
    const int arrival_top =
        params.variant == ModelVariant::finite_buffer ? std::min(params.buffer_cap[c], top) : top;

    for (int n = 0; n <= top; ++n) {
      double v = 0.0;
      if (n >= 1 && n <= arrival_top) v += lam * x.at(c, n - 1);  // arrival into level n
      if (n < arrival_top) v -= lam * x.at(c, n);                 // arrival out of level n
      if (params.variant == ModelVariant::queue_based) {
        if (n < top)
          v += pi_minus[c] * params.backoff[c].rate(n + 1, params.nu[c]) * x.at(c, n + 1);
        if (n >= 1) v -= pi_minus[c] * params.backoff[c].rate(n, params.nu[c]) * x.at(c, n);
      } else {
        if (n < top) v += pi_minus[c] * params.nu[c] * x.at(c, n + 1);
        if (n >= 1) v -= pi_minus[c] * params.nu[c] * x.at(c, n);
      }
      h.at(c, n) = inv_p * v;
    }
  }
  return h;
}

}  // namespace detail

/// Right-hand side H(x) of the mean-field initial-value problem. Rows of the
/// result sum to zero: probability mass is conserved per class.
inline PopulationState drift(const PopulationState& x, const NetworkParams& params,
                             const ActivitySpace& space) {
  params.validate();
  if (x.num_classes != space.num_classes)
    throw ConfigError("drift: population and activity space disagree on class count");
  if (!x.in_simplex(1e-9))
    throw ConfigError("drift: population state is not on the probability simplex");
  if (params.variant == ModelVariant::finite_buffer) {
    for (int c = 0; c < x.num_classes; ++c)
      for (int n = params.buffer_cap[c] + 1; n <= x.n_max; ++n)
        if (x.at(c, n) != 0.0)
          throw ConfigError("drift: finite-buffer state has mass above the buffer capacity");
  }
  return detail::drift_unchecked(x, params, space);
}

inline double drift_max_norm(const PopulationState& h) {
  double m = 0.0;
  for (double v : h.data) m = std::max(m, std::abs(v));
  return m;
}

struct Trajectory {
  std::vector<double> times;
  std::vector<PopulationState> states;
  std::vector<double> drift_norms;  // max-norm of H at each stored sample
};

struct IntegrateOptions {
  double step = 0.01;
  int sample_stride = 100;  // store every k-th step (plus the initial state)
};

/// Classical fixed-step RK4 for dx/dt = H(x) on [0, horizon]. Row sums are
/// conserved analytically; each accepted step renormalizes rows to scrub
/// accumulated float error. A step that drives any entry below -1e-9 aborts
/// with a suggestion to reduce the step size.
inline Trajectory integrate(const PopulationState& x0, const NetworkParams& params,
                            const ActivitySpace& space, double horizon,
                            const IntegrateOptions& opt = {}) {
  params.validate();
  if (!(opt.step > 0.0)) throw ConfigError("integrate: step must be positive");
  if (!(horizon >= 0.0)) throw ConfigError("integrate: horizon must be nonnegative");
  if (!x0.in_simplex(1e-9))
    throw ConfigError("integrate: initial state is not on the probability simplex");

  const double h = opt.step;
  const long steps = static_cast<long>(std::ceil(horizon / h - 1e-12));
  const int stride = std::max(1, opt.sample_stride);

  Trajectory traj;
  PopulationState x = x0;
  auto store = [&](double t) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.drift_norms.push_back(drift_max_norm(detail::drift_unchecked(x, params, space)));
  };
  store(0.0);

  PopulationState stage(x.num_classes, x.n_max);
  for (long s = 1; s <= steps; ++s) {
    const PopulationState k1 = detail::drift_unchecked(x, params, space);
    for (std::size_t i = 0; i < x.data.size(); ++i) stage.data[i] = x.data[i] + 0.5 * h * k1.data[i];
    const PopulationState k2 = detail::drift_unchecked(stage, params, space);
    for (std::size_t i = 0; i < x.data.size(); ++i) stage.data[i] = x.data[i] + 0.5 * h * k2.data[i];
    const PopulationState k3 = detail::drift_unchecked(stage, params, space);
    for (std::size_t i = 0; i < x.data.size(); ++i) stage.data[i] = x.data[i] + h * k3.data[i];
    const PopulationState k4 = detail::drift_unchecked(stage, params, space);

    for (std::size_t i = 0; i < x.data.size(); ++i)
      x.data[i] += h / 6.0 * (k1.data[i] + 2.0 * k2.data[i] + 2.0 * k3.data[i] + k4.data[i]);

    for (double v : x.data)
      if (v < -1e-9)
        throw NumericalError("integrate: step too large, state left the simplex; reduce h");
    for (auto& v : x.data) v = std::max(v, 0.0);
    x.renormalize_rows();

    if (s % stride == 0 || s == steps) store(s * h);
  }
  return traj;
}

struct FixedPointResult {
  std::vector<double> xi;  // activity factors
  PopulationState x_star;
  bool stable = false;     // xi < 1 componentwise (load strictly inside, factors feasible)
  double varrho = 0.0;     // sum_d rho_d + max_c lambda_c/nu_c
  long iterations = 0;
  double residual = 0.0;
};

/// Complete-graph closed form xi_c = lambda_c / (nu_c (1 - sum_d rho_d)).
inline std::vector<double> complete_graph_activity_factors(const NetworkParams& params) {
  params.validate();
  const int C = params.num_classes();
  double load = 0.0;
  for (int c = 0; c < C; ++c) load += params.rho(c);
  if (!(load < 1.0))
    throw InfeasibleError("load is not inside the capacity region of the complete graph");
  std::vector<double> xi(C);
  for (int c = 0; c < C; ++c) xi[c] = params.lambda[c] / (params.nu[c] * (1.0 - load));
  return xi;
}

inline double varrho(const NetworkParams& params) {
  double load = 0.0, worst = 0.0;
  for (int c = 0; c < params.num_classes(); ++c) {
    load += params.rho(c);
    worst = std::max(worst, params.lambda[c] / params.nu[c]);
  }
  return load + worst;
}

struct FixedPointOptions {
  int n_max = 64;          // truncation level; <= 0 selects it from xi_max
  InvertOptions invert;
};

namespace detail {

inline int resolve_n_max(int requested, const std::vector<double>& xi) {
  if (requested > 0) return requested;
  double xm = 0.0;
  for (double v : xi) xm = std::max(xm, v);
  if (!(xm < 1.0)) return 64;
  if (xm <= 0.0) return 16;
  const int n = static_cast<int>(std::ceil(std::log(1e-12) / std::log(xm)));
  return std::clamp(n, 16, 4096);
}

// Geometric rows (1-xi_c) xi_c^n truncated at n_max and renormalized.
inline PopulationState geometric_state(const std::vector<double>& xi, int n_max) {
  const int C = static_cast<int>(xi.size());
  PopulationState x(C, n_max);
  for (int c = 0; c < C; ++c) {
    double t = 1.0, sum = 0.0;
    for (int n = 0; n <= n_max; ++n, t *= xi[c]) {
      x.at(c, n) = t;
      sum += t;
    }
    for (int n = 0; n <= n_max; ++n) x.at(c, n) /= sum;
  }
  return x;
}

inline void require_interior_load(const ActivitySpace& space, const NetworkParams& params) {
  const CapacityResult cap = capacity_region_contains(space, params.rho_vector());
  if (cap.position != RegionPosition::inside_interior)
    throw InfeasibleError("load vector is not strictly inside the capacity region (margin " +
                          std::to_string(cap.margin) + ")");
}

// Activity factors eta(rho): complete graphs use the closed form, everything
// else the damped inversion.
inline std::vector<double> activity_factors(const ActivitySpace& space,
                                            const NetworkParams& params,
                                            const FixedPointOptions& opt,
                                            InvertDiagnostics* diag) {
  if (space.complete_graph()) {
    std::vector<double> xi = complete_graph_activity_factors(params);
    const std::vector<double> th = throughput(space, params, xi);
    double res = 0.0;
    for (int c = 0; c < params.num_classes(); ++c)
      res = std::max(res, std::abs(th[c] - params.rho(c)));
    if (diag) *diag = {0, res};
    return xi;
  }
  return invert_throughput(space, params, params.rho_vector(), opt.invert, diag);
}

inline FixedPointResult fixed_point_queue_based(const ActivitySpace& space,
                                                const NetworkParams& params,
                                                const FixedPointOptions& opt) {
  const int C = params.num_classes();
  InvertDiagnostics diag;
  // Effective back-off rates nu~_c = nu_c eta(rho)_c: the equilibrium class
  // weight nu~_c / mu_c must meet the load, whatever the rate profile.
  const std::vector<double> eta = activity_factors(space, params, opt, &diag);
  std::vector<double> nu_eff(C);
  for (int c = 0; c < C; ++c) nu_eff[c] = params.nu[c] * eta[c];

  const int n_max = opt.n_max > 0 ? opt.n_max : 64;
  PopulationState x(C, n_max);
  for (int c = 0; c < C; ++c) {
    // Level weights u_n = prod_{k<=n} nu~_c / nu_c(k); the normalization
    // sum must converge, which the tail of the rate table decides.
    const bool linear_tail = params.backoff[c].tail == BackoffRateTable::Tail::linear;
    const double tail_rate = params.backoff[c].rate(n_max + 1, params.nu[c]);
    if (!linear_tail && nu_eff[c] >= tail_rate)
      throw InfeasibleError("queue-based equilibrium: normalization diverges for class " +
                            std::to_string(c) + " (effective rate exceeds the tail rate)");

    double u = 1.0, sum = 0.0;
    for (int n = 0; n <= n_max; ++n) {
      if (n >= 1) u *= nu_eff[c] / params.backoff[c].rate(n, params.nu[c]);
      x.at(c, n) = u;
      sum += u;
      if (u < 1e-14 * sum) break;  // tail numerically converged
    }
    for (int n = 0; n <= n_max; ++n) x.at(c, n) /= sum;
  }

  FixedPointResult r;
  r.xi = eta;
  r.x_star = std::move(x);
  r.varrho = varrho(params);
  // Existence of the normalized equilibrium is the stability notion here;
  // eta < 1 is not required for queue-based rates.
  r.stable = true;
  r.iterations = diag.iterations;
  r.residual = diag.residual;
  return r;
}

inline double finite_buffer_saturated_throughput(const NetworkParams& params, double xi, int cap) {
  // Single class: theta~(xi) with empty-buffer fraction 1 / sum_{n<=K} xi^n.
  double denom = 0.0, t = 1.0;
  for (int n = 0; n <= cap; ++n, t *= xi) denom += t;
  const double busy = 1.0 - 1.0 / denom;
  const double w = params.sigma(0) * busy;
  return w / (1.0 + w);
}

inline double finite_buffer_effective_load(const NetworkParams& params, double xi, int cap) {
  double denom = 0.0, t = 1.0;
  for (int n = 0; n <= cap; ++n, t *= xi) denom += t;
  const double x_cap = std::pow(xi, cap) / denom;
  return params.rho(0) * (1.0 - x_cap);
}

inline FixedPointResult fixed_point_finite_buffer(const NetworkParams& params,
                                                  const FixedPointOptions& opt) {
  if (params.num_classes() != 1)
    throw ConfigError("finite-buffer fixed point is not supported for more than one class");
  const int cap = params.buffer_cap[0];
  const int n_max = std::max(opt.n_max > 0 ? opt.n_max : 64, cap);

  // theta~ is increasing in xi and rho~ decreasing, so their difference has a
  // single sign change; bracket it and bisect.
  auto f = [&](double xi) {
    return finite_buffer_saturated_throughput(params, xi, cap) -
           finite_buffer_effective_load(params, xi, cap);
  };
  double lo = 0.0, hi = 1.0;
  long guard = 0;
  while (f(hi) < 0.0) {
    hi *= 2.0;
    if (++guard > 200) throw NumericalError("finite-buffer fixed point: no bracket found");
  }
  long it = 0;
  while (hi - lo > 1e-15 * std::max(1.0, hi) && it < 200) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
    ++it;
  }
  const double xi = 0.5 * (lo + hi);
  const double residual = std::abs(f(xi));
  if (residual > 1e-12)
    throw NumericalError("finite-buffer fixed point: bisection residual " +
                         std::to_string(residual));

  PopulationState x(1, n_max);
  double t = 1.0, sum = 0.0;
  for (int n = 0; n <= cap; ++n, t *= xi) sum += t;
  t = 1.0;
  for (int n = 0; n <= cap; ++n, t *= xi) x.at(0, n) = t / sum;

  FixedPointResult r;
  r.xi = {xi};
  r.x_star = std::move(x);
  r.stable = true;  // a finite-buffer equilibrium always exists
  r.varrho = varrho(params);
  r.iterations = it;
  r.residual = residual;
  return r;
}

}  // namespace detail

/// Equilibrium of the mean-field dynamics. Base and multi-rate models yield
/// geometric per-class rows with parameter xi = eta(rho); queue-based rates
/// yield the level-weight cascade; the single-class finite-buffer model is
/// solved by bisection on the saturated-throughput/effective-load crossing.
/// When some xi_c >= 1 the result is still returned with stable = false (no
/// equilibrium on the simplex).
inline FixedPointResult fixed_point(const NetworkParams& params, const ActivitySpace& space,
                                    const FixedPointOptions& opt = {}) {
  params.validate();
  detail::require_interior_load(space, params);

  if (params.variant == ModelVariant::queue_based)
    return detail::fixed_point_queue_based(space, params, opt);
  if (params.variant == ModelVariant::finite_buffer)
    return detail::fixed_point_finite_buffer(params, opt);

  InvertDiagnostics diag;
  const std::vector<double> xi = detail::activity_factors(space, params, opt, &diag);
  FixedPointResult r;
  r.xi = xi;
  r.varrho = varrho(params);
  r.iterations = diag.iterations;
  r.residual = diag.residual;
  r.stable = true;
  for (double v : xi)
    if (!(v < 1.0)) r.stable = false;
  if (r.stable) {
    r.x_star = detail::geometric_state(xi, detail::resolve_n_max(opt.n_max, xi));
  } else {
    // No equilibrium on the simplex; report the factors with an empty-state
    // placeholder so callers can still inspect xi and varrho.
    r.x_star = PopulationState::empty_state(params.num_classes(),
                                            opt.n_max > 0 ? opt.n_max : 64);
  }
  return r;
}

struct StabilityReport {
  double varrho = 0.0;
  bool stable = false;
  bool xi_feasible = false;
};

/// Stability of the fixed point. Complete graphs use the explicit condition
/// varrho = sum_d rho_d + max_c lambda_c/nu_c < 1; general graphs fall back
/// to checking xi = eta(rho) < 1 componentwise.
inline StabilityReport stability_condition(const NetworkParams& params,
                                           const ActivitySpace& space) {
  params.validate();
  StabilityReport rep;
  rep.varrho = varrho(params);
  if (space.complete_graph()) {
    rep.stable = rep.varrho < 1.0;
    rep.xi_feasible = rep.stable;
    return rep;
  }
  try {
    const std::vector<double> xi =
        invert_throughput(space, params, params.rho_vector());
    rep.xi_feasible = true;
    for (double v : xi)
      if (!(v < 1.0)) rep.xi_feasible = false;
  } catch (const InfeasibleError&) {
    rep.xi_feasible = false;
  }
  rep.stable = rep.xi_feasible;
  return rep;
}

/// Mean buffer level per class.
inline std::vector<double> mass(const PopulationState& x) {
  std::vector<double> m(x.num_classes);
  for (int c = 0; c < x.num_classes; ++c) m[c] = x.mass(c);
  return m;
}

/// d m_c / dt = (lambda_c - nu_c (1 - x_{c,0}) pi^b) / p_c on a complete
/// graph, where pi^b is the probability that the medium is idle.
inline std::vector<double> mass_drift(const PopulationState& x, const NetworkParams& params,
                                      const ActivitySpace& space) {
  params.validate();
  if (!space.complete_graph())
    throw ConfigError("mass_drift applies to complete interference graphs only");
  if (params.variant != ModelVariant::base)
    throw ConfigError("mass_drift applies to the base model only");
  if (!x.in_simplex(1e-9))
    throw ConfigError("mass_drift: population state is not on the probability simplex");

  double denom = 1.0;
  for (int c = 0; c < x.num_classes; ++c)
    denom += params.sigma(c) * (1.0 - x.empty_fraction(c));
  const double pi_idle = 1.0 / denom;

  std::vector<double> md(x.num_classes);
  for (int c = 0; c < x.num_classes; ++c)
    md[c] = (params.lambda[c] - params.nu[c] * (1.0 - x.empty_fraction(c)) * pi_idle) /
            params.p[c];
  return md;
}

}  // namespace csmamf
