#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "csmamf/errors.hpp"

namespace csmamf {

/// Per-class probability distribution over buffer levels 0..n_max: entry
/// (c,n) is the fraction of class-c nodes holding n packets. Rows live on the
/// probability simplex.
struct PopulationState {
  int num_classes = 0;
  int n_max = 0;
  std::vector<double> data;  // row-major, C x (n_max + 1)

  PopulationState() = default;
  PopulationState(int classes, int levels_max)
      : num_classes(classes), n_max(levels_max),
        data(static_cast<std::size_t>(classes) * (levels_max + 1), 0.0) {}

  static PopulationState empty_state(int classes, int levels_max) {
    PopulationState s(classes, levels_max);
    for (int c = 0; c < classes; ++c) s.at(c, 0) = 1.0;
    return s;
  }

  int levels() const { return n_max + 1; }
  double& at(int c, int n) { return data[static_cast<std::size_t>(c) * levels() + n]; }
  double at(int c, int n) const { return data[static_cast<std::size_t>(c) * levels() + n]; }

  double row_sum(int c) const {
    double s = 0.0;
    for (int n = 0; n <= n_max; ++n) s += at(c, n);
    return s;
  }

  // Fraction of class-c nodes with an empty buffer.
  double empty_fraction(int c) const { return at(c, 0); }

  bool in_simplex(double tol = 1e-9) const {
    for (int c = 0; c < num_classes; ++c) {
      if (std::abs(row_sum(c) - 1.0) > tol) return false;
      for (int n = 0; n <= n_max; ++n) {
        const double v = at(c, n);
        if (v < -tol || v > 1.0 + tol) return false;
      }
    }
    return true;
  }

  void renormalize_rows() {
    for (int c = 0; c < num_classes; ++c) {
      const double s = row_sum(c);
      if (!(s > 0.0)) throw NumericalError("population state: empty row cannot be normalized");
      for (int n = 0; n <= n_max; ++n) at(c, n) /= s;
    }
  }

  // Class mass: mean buffer level sum_n n * x_{c,n}.
  double mass(int c) const {
    double m = 0.0;
    for (int n = 1; n <= n_max; ++n) m += n * at(c, n);
    return m;
  }

  bool same_shape(const PopulationState& o) const {
    return num_classes == o.num_classes && n_max == o.n_max;
  }
};

inline double distance_l2(const PopulationState& a, const PopulationState& b) {
  if (!a.same_shape(b)) throw ConfigError("population states have different shapes");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double distance_l2_class(const PopulationState& a, const PopulationState& b, int c) {
  if (!a.same_shape(b)) throw ConfigError("population states have different shapes");
  double s = 0.0;
  for (int n = 0; n <= a.n_max; ++n) {
    const double d = a.at(c, n) - b.at(c, n);
    s += d * d;
  }
  return std::sqrt(s);
}

/// Partial-sum ordering: xl is stochastically dominated by xu when every
/// prefix sum of xl is at least the matching prefix sum of xu.
inline bool stochastically_dominated(const PopulationState& xl, const PopulationState& xu,
                                     double tol = 1e-12) {
  if (!xl.same_shape(xu)) throw ConfigError("stochastic dominance: shape mismatch");
  for (int c = 0; c < xl.num_classes; ++c) {
    double pl = 0.0, pu = 0.0;
    for (int n = 0; n <= xl.n_max; ++n) {
      pl += xl.at(c, n);
      pu += xu.at(c, n);
      if (pl < pu - tol) return false;
    }
  }
  return true;
}

}  // namespace csmamf
