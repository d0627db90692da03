#pragma once

// Test-only oracles: small independent implementations used to cross-check
// the library. Nothing here reuses the code paths under test.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace oracles {

// Dense solve of A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                       std::vector<double> b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-14) throw std::runtime_error("singular system");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

// Stationary distribution of a CTMC given its dense generator (rows sum to
// zero): solves pi Q = 0 with the last balance equation replaced by sum = 1.
inline std::vector<double> stationary_dense(const std::vector<std::vector<double>>& gen) {
  const std::size_t n = gen.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 0.0);
  for (std::size_t j = 0; j + 1 < n; ++j)
    for (std::size_t i = 0; i < n; ++i) a[j][i] = gen[i][j];  // transpose: columns balance
  for (std::size_t i = 0; i < n; ++i) a[n - 1][i] = 1.0;
  b[n - 1] = 1.0;
  return solve_dense(std::move(a), std::move(b));
}

// Saturated activity CTMC over an explicit list of feasible states: class c
// activates at rate eta_c * nu_c from states where it and its neighbors are
// idle, and deactivates at rate mu_c. Validates the product form.
struct SaturatedChain {
  int num_classes;
  std::vector<std::uint32_t> states;
  std::vector<std::uint32_t> neighbor_mask;

  std::vector<double> stationary(const std::vector<double>& eta, const std::vector<double>& nu,
                                 const std::vector<double>& mu) const {
    const std::size_t S = states.size();
    std::vector<int> index(1u << num_classes, -1);
    for (std::size_t s = 0; s < S; ++s) index[states[s]] = static_cast<int>(s);
    std::vector<std::vector<double>> gen(S, std::vector<double>(S, 0.0));
    for (std::size_t s = 0; s < S; ++s) {
      const std::uint32_t w = states[s];
      for (int c = 0; c < num_classes; ++c) {
        const std::uint32_t bit = 1u << c;
        if (w & bit) {
          gen[s][index[w & ~bit]] += mu[c];
        } else if ((w & neighbor_mask[c]) == 0 && eta[c] > 0.0) {
          gen[s][index[w | bit]] += eta[c] * nu[c];
        }
      }
      double total = 0.0;
      for (std::size_t t = 0; t < S; ++t)
        if (t != s) total += gen[s][t];
      gen[s][s] = -total;
    }
    return stationary_dense(gen);
  }
};

// Single-class single-node queueing CTMC truncated at q <= qmax: state
// (q, phase) with phase 0 = idle and phase m >= 1 = transmitting in service
// mode m. Arrivals at rate lambda (dropped at the cap), back-off completion
// at a queue-dependent rate when idle with q > 0 (then a mode is drawn), and
// per-mode transmission completion rates.
inline std::vector<double> single_node_queue_pmf_general(
    double lambda, const std::vector<double>& backoff_rate_by_q,
    const std::vector<double>& mode_prob, const std::vector<double>& mode_rate, int qmax) {
  const int M = static_cast<int>(mode_prob.size());
  const int phases = M + 1;
  const int S = phases * (qmax + 1);
  auto idx = [phases](int q, int ph) { return q * phases + ph; };
  std::vector<std::vector<double>> gen(S, std::vector<double>(S, 0.0));
  for (int q = 0; q <= qmax; ++q) {
    for (int ph = 0; ph < phases; ++ph) {
      const int s = idx(q, ph);
      double total = 0.0;
      if (q < qmax) {
        gen[s][idx(q + 1, ph)] += lambda;
        total += lambda;
      }
      if (ph == 0 && q > 0) {
        const double nu_q = backoff_rate_by_q[q - 1];
        for (int m = 0; m < M; ++m) {
          gen[s][idx(q - 1, m + 1)] += nu_q * mode_prob[m];
          total += nu_q * mode_prob[m];
        }
      }
      if (ph >= 1) {
        gen[s][idx(q, 0)] += mode_rate[ph - 1];
        total += mode_rate[ph - 1];
      }
      gen[s][s] = -total;
    }
  }
  const std::vector<double> pi = stationary_dense(gen);
  std::vector<double> pmf(qmax + 1, 0.0);
  for (int q = 0; q <= qmax; ++q)
    for (int ph = 0; ph < phases; ++ph) pmf[q] += pi[idx(q, ph)];
  return pmf;
}

inline std::vector<double> single_node_queue_pmf(double lambda, double nu, double mu, int qmax) {
  return single_node_queue_pmf_general(lambda, std::vector<double>(qmax, nu), {1.0}, {mu},
                                       qmax);
}

// Two-node single-class complete-graph CTMC truncated at q <= qmax per node:
// state (q1, q2, phase) with phase 0 = idle, 1/2 = node transmitting. Solved
// by uniformized power iteration (the dense system is too large to factor).
inline std::vector<double> two_node_queue_pmf(double lambda, double nu, double mu, int qmax,
                                              double tol = 1e-13, long max_iters = 400000) {
  const int L = qmax + 1;
  const int S = L * L * 3;
  auto idx = [L](int q1, int q2, int ph) { return (q1 * L + q2) * 3 + ph; };

  struct Arc {
    int to;
    double rate;
  };
  std::vector<std::vector<Arc>> arcs(S);
  std::vector<double> exit(S, 0.0);
  const double lam_node = lambda / 2.0;
  const double nu_node = nu / 2.0;

  for (int q1 = 0; q1 < L; ++q1)
    for (int q2 = 0; q2 < L; ++q2)
      for (int ph = 0; ph < 3; ++ph) {
        const int s = idx(q1, q2, ph);
        auto add = [&](int to, double rate) {
          arcs[s].push_back({to, rate});
          exit[s] += rate;
        };
        if (q1 < qmax) add(idx(q1 + 1, q2, ph), lam_node);
        if (q2 < qmax) add(idx(q1, q2 + 1, ph), lam_node);
        if (ph == 0) {
          if (q1 > 0) add(idx(q1 - 1, q2, 1), nu_node);
          if (q2 > 0) add(idx(q1, q2 - 1, 2), nu_node);
        } else {
          add(idx(q1, q2, 0), mu);
        }
      }

  double uniform_rate = 0.0;
  for (double e : exit) uniform_rate = std::max(uniform_rate, e);
  uniform_rate *= 1.05;

  std::vector<double> pi(S, 1.0 / S), next(S, 0.0);
  for (long it = 0; it < max_iters; ++it) {
    for (int s = 0; s < S; ++s) next[s] = pi[s] * (1.0 - exit[s] / uniform_rate);
    for (int s = 0; s < S; ++s) {
      const double w = pi[s] / uniform_rate;
      for (const Arc& a : arcs[s]) next[a.to] += w * a.rate;
    }
    double diff = 0.0;
    for (int s = 0; s < S; ++s) diff += std::abs(next[s] - pi[s]);
    pi.swap(next);
    if (diff < tol) break;
  }

  // Tagged-node buffer pmf: average the two marginals (symmetric anyway).
  std::vector<double> pmf(L, 0.0);
  for (int q1 = 0; q1 < L; ++q1)
    for (int q2 = 0; q2 < L; ++q2)
      for (int ph = 0; ph < 3; ++ph) {
        const double v = pi[idx(q1, q2, ph)];
        pmf[q1] += 0.5 * v;
        pmf[q2] += 0.5 * v;
      }
  return pmf;
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

}  // namespace oracles
