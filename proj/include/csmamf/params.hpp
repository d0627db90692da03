#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "csmamf/errors.hpp"

namespace csmamf {

enum class ModelVariant { base, multi_rate, queue_based, finite_buffer };

inline std::string to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::base: return "base";
    case ModelVariant::multi_rate: return "multi_rate";
    case ModelVariant::queue_based: return "queue_based";
    case ModelVariant::finite_buffer: return "finite_buffer";
  }
  return "?";
}

/// One transmission mode: picked with `prob`, service exponential with the
/// given mean. A mixture of such modes is the phase-type family the model
/// variant supports; only the means enter the mean-field equations.
struct ServiceMode {
  double prob = 1.0;
  double mean = 1.0;
};

/// Queue-length dependent back-off rates nu_c(n) for n >= 1: explicit values
/// for n = 1..table.size(), then either constant (last table value) or linear
/// (n times the class base rate) beyond the table.
struct BackoffRateTable {
  enum class Tail { constant, linear };
  std::vector<double> table;
  Tail tail = Tail::constant;

  double rate(int n, double base_rate) const {
    if (n <= 0) return 0.0;
    if (n <= static_cast<int>(table.size())) return table[n - 1];
    if (tail == Tail::linear) return base_rate * n;
    return table.empty() ? base_rate : table.back();
  }
};

/// Per-class rates and proportions, plus the payload of the selected model
/// variant. Rates are the unscaled class aggregates: in the N-node system a
/// single node sees lambda_c/N_c arrivals and nu_c/N_c back-off completions.
struct NetworkParams {
  std::vector<double> lambda;
  std::vector<double> nu;
  std::vector<double> mu;
  std::vector<double> p;

  ModelVariant variant = ModelVariant::base;
  std::vector<std::vector<ServiceMode>> modes;  // multi_rate
  std::vector<BackoffRateTable> backoff;        // queue_based
  std::vector<int> buffer_cap;                  // finite_buffer K_c

  int num_classes() const { return static_cast<int>(lambda.size()); }

  // Mean service time: 1/mu_c, or the mode-mixture mean U_c.
  double mean_service(int c) const {
    if (variant == ModelVariant::multi_rate) {
      double u = 0.0;
      for (const auto& m : modes[c]) u += m.prob * m.mean;
      return u;
    }
    return 1.0 / mu[c];
  }

  double rho(int c) const { return lambda[c] * mean_service(c); }
  double sigma(int c) const { return nu[c] * mean_service(c); }

  std::vector<double> rho_vector() const {
    std::vector<double> r(num_classes());
    for (int c = 0; c < num_classes(); ++c) r[c] = rho(c);
    return r;
  }

  void validate() const {
    const int C = num_classes();
    if (C < 1) throw ConfigError("params: need at least one class");
    auto check_len = [C](const std::vector<double>& v, const char* name) {
      if (static_cast<int>(v.size()) != C)
        throw ConfigError(std::string("params: ") + name + " has wrong length");
    };
    check_len(nu, "nu");
    check_len(mu, "mu");
    check_len(p, "p");
    double psum = 0.0;
    for (int c = 0; c < C; ++c) {
      if (!(lambda[c] >= 0.0) || !std::isfinite(lambda[c]))
        throw ConfigError("params: lambda must be finite and nonnegative");
      if (!(nu[c] > 0.0)) throw ConfigError("params: nu must be positive");
      if (!(mu[c] > 0.0)) throw ConfigError("params: mu must be positive");
      if (!(p[c] > 0.0) || p[c] > 1.0) throw ConfigError("params: p must lie in (0,1]");
      psum += p[c];
    }
    if (std::abs(psum - 1.0) > 1e-9) throw ConfigError("params: class proportions must sum to 1");

    switch (variant) {
      case ModelVariant::base:
        break;
      case ModelVariant::multi_rate: {
        if (static_cast<int>(modes.size()) != C)
          throw ConfigError("params: modes must list every class");
        for (const auto& ms : modes) {
          if (ms.empty()) throw ConfigError("params: each class needs at least one mode");
          double s = 0.0;
          for (const auto& m : ms) {
            if (!(m.prob > 0.0) || !(m.mean > 0.0))
              throw ConfigError("params: mode probabilities and means must be positive");
            s += m.prob;
          }
          if (std::abs(s - 1.0) > 1e-9)
            throw ConfigError("params: mode probabilities must sum to 1");
        }
        break;
      }
      case ModelVariant::queue_based: {
        if (static_cast<int>(backoff.size()) != C)
          throw ConfigError("params: back-off tables must list every class");
        for (const auto& t : backoff) {
          for (double r : t.table)
            if (!(r > 0.0)) throw ConfigError("params: back-off table rates must be positive");
          if (t.table.empty() && t.tail == BackoffRateTable::Tail::constant)
            throw ConfigError("params: constant-tail back-off table may not be empty");
        }
        break;
      }
      case ModelVariant::finite_buffer: {
        if (static_cast<int>(buffer_cap.size()) != C)
          throw ConfigError("params: buffer capacities must list every class");
        for (int k : buffer_cap)
          if (k < 1) throw ConfigError("params: buffer capacity must be at least 1");
        break;
      }
    }
  }
};

}  // namespace csmamf
