// The three model variants on a single-class network: service-time mixtures
// (only the mean matters), queue-length-proportional back-off, and a finite
// buffer swept over its capacity.

#include <cstdio>

#include "csmamf/csmamf.hpp"

int main() {
  using namespace csmamf;
  const ActivitySpace space = enumerate_feasible_states(InterferenceGraph::complete(1));

  NetworkParams base;
  base.lambda = {0.3};
  base.nu = {1.0};
  base.mu = {1.0};
  base.p = {1.0};
  const FixedPointResult fb_base = fixed_point(base, space);
  std::printf("base:         xi = %.6f, x*_0 = %.6f\n", fb_base.xi[0],
              fb_base.x_star.at(0, 0));

  NetworkParams mixture = base;
  mixture.variant = ModelVariant::multi_rate;
  mixture.modes = {{{0.5, 1.6}, {0.5, 0.4}}};  // mean service time still 1.0
  const FixedPointResult fp_mix = fixed_point(mixture, space);
  std::printf("mixture:      xi = %.6f (same as base: mean-only sensitivity)\n",
              fp_mix.xi[0]);

  NetworkParams qb = base;
  qb.variant = ModelVariant::queue_based;
  qb.backoff = {{{}, BackoffRateTable::Tail::linear}};  // nu(n) = n nu
  const FixedPointResult fp_qb = fixed_point(qb, space);
  std::printf("queue-based:  nu~ = %.6f, x*_0 = %.6f (Poisson levels)\n", fp_qb.xi[0],
              fp_qb.x_star.at(0, 0));

  NetworkParams fb = base;
  fb.variant = ModelVariant::finite_buffer;
  for (int cap : {1, 2, 4, 8, 16, 32}) {
    fb.buffer_cap = {cap};
    const FixedPointResult fp = fixed_point(fb, space, {64, {}});
    double loss = fp.x_star.at(0, cap) * 0.3;  // lambda x*_K
    std::printf("finite K=%-2d:  xi = %.6f, drop rate = %.6f\n", cap, fp.xi[0], loss);
  }
  return 0;
}
