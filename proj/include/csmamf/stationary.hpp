#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "csmamf/errors.hpp"
#include "csmamf/graph.hpp"
#include "csmamf/params.hpp"

namespace csmamf {

/// Probability vector over the activity states, in ActivitySpace order.
struct ActivityDistribution {
  std::vector<double> probs;

  double mass(const std::vector<int>& indices) const {
    double s = 0.0;
    for (int i : indices) s += probs[i];
    return s;
  }
};

namespace detail {

// Product-form distribution from per-class state weights w_c >= 0:
// pi(omega) proportional to prod_{c active} w_c. Switches to log domain when
// weights are large enough for the direct partition sum to overflow.
inline ActivityDistribution distribution_from_weights(const ActivitySpace& space,
                                                      const std::vector<double>& w) {
  const std::size_t S = space.size();
  ActivityDistribution d;
  d.probs.assign(S, 0.0);

  double wmax = 0.0;
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ConfigError("product form: weights must be finite and nonnegative");
    wmax = std::max(wmax, v);
  }

  if (wmax <= 1e8) {
    double z = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      double t = 1.0;
      const ActivityMask m = space.states[s];
      for (int c = 0; c < space.num_classes; ++c)
        if (m & (1u << c)) t *= w[c];
      d.probs[s] = t;
      z += t;
    }
    for (auto& v : d.probs) v /= z;
    return d;
  }

  // Log-sum-exp fallback.
  std::vector<double> logw(w.size());
  for (std::size_t c = 0; c < w.size(); ++c)
    logw[c] = w[c] > 0.0 ? std::log(w[c]) : -std::numeric_limits<double>::infinity();
  std::vector<double> lt(S);
  double lmax = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < S; ++s) {
    double t = 0.0;
    const ActivityMask m = space.states[s];
    for (int c = 0; c < space.num_classes; ++c)
      if (m & (1u << c)) t += logw[c];
    lt[s] = t;
    lmax = std::max(lmax, t);
  }
  double z = 0.0;
  for (std::size_t s = 0; s < S; ++s) z += std::exp(lt[s] - lmax);
  for (std::size_t s = 0; s < S; ++s) d.probs[s] = std::exp(lt[s] - lmax) / z;
  return d;
}

inline std::vector<double> weights_from_eta(const ActivitySpace& space,
                                            const NetworkParams& params,
                                            const std::vector<double>& eta) {
  if (static_cast<int>(eta.size()) != space.num_classes)
    throw ConfigError("eta has wrong length");
  std::vector<double> w(eta.size());
  for (int c = 0; c < space.num_classes; ++c) {
    if (!(eta[c] >= 0.0) || !std::isfinite(eta[c]))
      throw ConfigError("eta must be finite and nonnegative");
    w[c] = eta[c] * params.sigma(c);
  }
  return w;
}

}  // namespace detail

/// Stationary law of the saturated activity process when class c backs off at
/// rate eta_c * nu_c: pi(omega) = prod_c (eta_c sigma_c)^{omega_c} / Z(eta).
inline ActivityDistribution product_form_distribution(const ActivitySpace& space,
                                                      const NetworkParams& params,
                                                      const std::vector<double>& eta) {
  params.validate();
  return detail::distribution_from_weights(space, detail::weights_from_eta(space, params, eta));
}

/// theta_c(eta) = pi(Omega_+c; eta): stationary fraction of time class c
/// transmits in the saturated network.
inline std::vector<double> throughput(const ActivitySpace& space, const NetworkParams& params,
                                      const std::vector<double>& eta) {
  const ActivityDistribution d = product_form_distribution(space, params, eta);
  std::vector<double> th(space.num_classes);
  for (int c = 0; c < space.num_classes; ++c) th[c] = d.mass(space.omega_plus[c]);
  return th;
}

struct InvertOptions {
  double damping = 0.5;
  double tol = 1e-12;
  long max_iterations = 100000;
};

struct InvertDiagnostics {
  long iterations = 0;
  double residual = 0.0;
};

/// Inverts the throughput map on the interior of the capacity region by the
/// damped coordinate iteration
///   eta_c <- (1-d) eta_c + d gamma_c / (sigma_c pi(Omega_-c; eta)),
/// which uses pi(Omega_+c) = eta_c sigma_c pi(Omega_-c) to rewrite
/// theta(eta) = gamma as a fixed-point equation. Starts from eta = gamma.
inline std::vector<double> invert_throughput(const ActivitySpace& space,
                                             const NetworkParams& params,
                                             const std::vector<double>& gamma,
                                             const InvertOptions& opt = {},
                                             InvertDiagnostics* diag = nullptr) {
  params.validate();
  const int C = space.num_classes;
  if (static_cast<int>(gamma.size()) != C) throw ConfigError("gamma has wrong length");

  bool all_zero = true;
  for (double g : gamma) {
    if (!(g >= 0.0) || !std::isfinite(g))
      throw ConfigError("gamma must be finite and nonnegative");
    if (g > 0.0) all_zero = false;
  }
  if (all_zero) {
    if (diag) *diag = {0, 0.0};
    return std::vector<double>(C, 0.0);
  }

  const CapacityResult cap = capacity_region_contains(space, gamma);
  if (cap.position != RegionPosition::inside_interior)
    throw InfeasibleError("infeasible target: gamma is not strictly inside the capacity region"
                          " (margin " + std::to_string(cap.margin) + ")");

  std::vector<double> eta = gamma;
  std::vector<double> sigma(C);
  for (int c = 0; c < C; ++c) sigma[c] = params.sigma(c);

  double residual = std::numeric_limits<double>::infinity();
  long it = 0;
  std::vector<double> minus(C);
  for (; it <= opt.max_iterations; ++it) {
    const ActivityDistribution d =
        detail::distribution_from_weights(space, detail::weights_from_eta(space, params, eta));
    residual = 0.0;
    for (int c = 0; c < C; ++c) {
      minus[c] = d.mass(space.omega_minus[c]);
      const double plus = d.mass(space.omega_plus[c]);
      // Detailed-balance identity pi(Omega_+c) = eta_c sigma_c pi(Omega_-c)
      // holds exactly for the product form; a violation means the state sets
      // or the distribution are corrupted.
      if (std::abs(plus - eta[c] * sigma[c] * minus[c]) > 1e-9 * std::max(1.0, plus))
        throw NumericalError("throughput inversion: detailed-balance check failed");
      residual = std::max(residual, std::abs(plus - gamma[c]));
    }
    if (residual <= opt.tol) break;
    for (int c = 0; c < C; ++c)
      eta[c] = (1.0 - opt.damping) * eta[c] + opt.damping * gamma[c] / (sigma[c] * minus[c]);
  }
  if (diag) *diag = {it, residual};
  if (residual > opt.tol)
    throw NumericalError("throughput inversion did not converge: residual " +
                         std::to_string(residual) + " after " +
                         std::to_string(opt.max_iterations) + " iterations");
  return eta;
}

}  // namespace csmamf
