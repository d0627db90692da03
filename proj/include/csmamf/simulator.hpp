#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <deque>
#include <future>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "csmamf/errors.hpp"
#include "csmamf/graph.hpp"
#include "csmamf/meanfield.hpp"
#include "csmamf/params.hpp"
#include "csmamf/population.hpp"
#include "csmamf/rng.hpp"

namespace csmamf {

struct SimConfig {
  NetworkParams params;
  ActivitySpace space;
  int total_nodes = 0;
  std::uint64_t seed = 1;
  double t_end = 0.0;
  double burn_in_fraction = 0.2;  // ignored when burn_in_time >= 0
  double burn_in_time = -1.0;
  double sample_interval = 0.0;   // <= 0 selects t_end / 10000
  int n_max = 64;                 // level cap for population statistics
  std::uint64_t max_events = 2'000'000'000ULL;
  bool record_snapshots = false;  // keep the (t, population) series in SimStats

  double burn_in() const {
    return burn_in_time >= 0.0 ? burn_in_time : burn_in_fraction * t_end;
  }

  double snapshot_interval() const {
    return sample_interval > 0.0 ? sample_interval : t_end / 10000.0;
  }

  // Class sizes by largest-remainder rounding of p_c * N; ties go to the
  // lower class index. The per-node rates lambda_c/N_c and nu_c/N_c are
  // derived from these totals.
  std::vector<int> nodes_per_class() const {
    const int C = params.num_classes();
    std::vector<int> n(C);
    std::vector<std::pair<double, int>> rem(C);
    int assigned = 0;
    for (int c = 0; c < C; ++c) {
      const double exact = params.p[c] * total_nodes;
      n[c] = static_cast<int>(std::floor(exact + 1e-12));
      rem[c] = {-(exact - n[c]), c};  // sort ascending = largest remainder first
      assigned += n[c];
    }
    std::sort(rem.begin(), rem.end());
    for (int i = 0; i < total_nodes - assigned; ++i) n[rem[i % C].second] += 1;
    for (int c = 0; c < C; ++c)
      if (n[c] < 1)
        throw ConfigError("class " + std::to_string(c) +
                          " rounds to zero nodes; increase N or its proportion");
    return n;
  }

  void validate() const {
    params.validate();
    if (params.num_classes() != space.num_classes)
      throw ConfigError("simulation: params and activity space disagree on class count");
    if (total_nodes < 1) throw ConfigError("simulation: need at least one node");
    if (!(t_end > 0.0)) throw ConfigError("simulation: t_end must be positive");
    if (burn_in_time < 0.0 && (burn_in_fraction < 0.0 || burn_in_fraction >= 1.0))
      throw ConfigError("simulation: burn-in fraction must lie in [0,1)");
    if (burn_in() >= t_end) throw ConfigError("simulation: burn-in must end before t_end");
    if (n_max < 1) throw ConfigError("simulation: n_max must be at least 1");
    nodes_per_class();
  }
};

/// Full microscopic state: per-node buffer contents (excluding any packet in
/// transmission), arrival timestamps awaiting service, and the activity state.
struct SimState {
  std::vector<std::vector<int>> queue;                    // [class][node]
  std::vector<std::vector<std::deque<double>>> arrivals;  // [class][node] FIFO of arrival times
  int activity_index = 0;
  std::vector<int> transmitting_node;   // per class, -1 if idle
  std::vector<double> inflight_arrival; // arrival time of the packet in transmission
  double clock = 0.0;
};

/// Empirical per-class distribution of buffer levels; levels >= n_max are
/// pooled into the top bin. Rows sum to one exactly (counts over N_c).
inline PopulationState population_snapshot(const SimState& state, int n_max) {
  const int C = static_cast<int>(state.queue.size());
  PopulationState x(C, n_max);
  for (int c = 0; c < C; ++c) {
    const int nodes = static_cast<int>(state.queue[c].size());
    for (int q : state.queue[c]) x.at(c, std::min(q, n_max)) += 1.0;
    for (int n = 0; n <= n_max; ++n) x.at(c, n) /= nodes;
  }
  return x;
}

struct ClassCounters {
  std::uint64_t arrivals = 0;       // all arrival events, dropped ones included
  std::uint64_t drops = 0;          // finite-buffer rejections
  std::uint64_t backoffs = 0;       // completed back-offs = transmission starts
  std::uint64_t transmissions = 0;  // completed transmissions
  double blocked_opportunity = 0.0; // integrated back-off rate while frozen
};

struct ClassStats {
  ClassCounters counts;
  std::vector<double> wait_samples;     // arrival -> transmission start
  std::vector<double> sojourn_samples;  // arrival -> transmission end
  double mean_wait = 0.0;
  double mean_sojourn = 0.0;
  double time_avg_queue = 0.0;    // mean buffered packets per node
  double time_avg_active = 0.0;   // fraction of time the class transmits
};

struct SimStats {
  PopulationState x_hat;  // time-averaged population snapshots after burn-in
  std::vector<ClassStats> per_class;
  std::vector<int> nodes_per_class;
  std::vector<double> snapshot_times;             // filled when record_snapshots
  std::vector<PopulationState> snapshot_states;
  double duration = 0.0;
  double stats_duration = 0.0;
  std::uint64_t snapshots = 0;
  std::uint64_t total_events = 0;
  std::uint64_t seed = 0;
  bool stable_config = false;
  std::uint64_t queued_at_end = 0;
  std::uint64_t inflight_at_end = 0;

  std::uint64_t total_arrivals() const {
    std::uint64_t s = 0;
    for (const auto& c : per_class) s += c.counts.arrivals;
    return s;
  }
};

// Raised when the event safety cap is hit; carries the partial statistics.
class EventCapExceeded : public NumericalError {
public:
  EventCapExceeded(std::string what, SimStats partial_stats)
      : NumericalError(std::move(what)), partial(std::move(partial_stats)) {}
  SimStats partial;
};

namespace detail {

class SimulationRun {
public:
  SimulationRun(const SimConfig& cfg, std::uint64_t seed)
      : cfg_(cfg), params_(cfg.params), space_(cfg.space), rng_(seed), seed_(seed) {
    C_ = params_.num_classes();
    nodes_ = cfg.nodes_per_class();
    state_.queue.assign(C_, {});
    state_.arrivals.assign(C_, {});
    for (int c = 0; c < C_; ++c) {
      state_.queue[c].assign(nodes_[c], 0);
      state_.arrivals[c].assign(nodes_[c], {});
    }
    state_.activity_index = space_.zero_state;
    state_.transmitting_node.assign(C_, -1);
    state_.inflight_arrival.assign(C_, 0.0);

    nonempty_.assign(C_, {});
    nonempty_pos_.assign(C_, std::vector<int>(0));
    for (int c = 0; c < C_; ++c) nonempty_pos_[c].assign(nodes_[c], -1);
    backoff_weight_.assign(C_, 0.0);
    buffered_.assign(C_, 0);
    tx_rate_.assign(C_, 0.0);
    hist_.assign(C_, std::vector<std::int64_t>(cfg.n_max + 1, 0));
    for (int c = 0; c < C_; ++c) hist_[c][0] = nodes_[c];
    hist_accum_.assign(C_, std::vector<double>(cfg.n_max + 1, 0.0));

    int_queue_.assign(C_, 0.0);
    int_active_.assign(C_, 0.0);
    counters_.assign(C_, {});
    waits_.assign(C_, {});
    sojourns_.assign(C_, {});
    backoff_rate_scratch_.assign(C_, 0.0);
    tx_rate_scratch_.assign(C_, 0.0);

    arrival_rate_total_ = std::accumulate(params_.lambda.begin(), params_.lambda.end(), 0.0);
  }

  SimStats run() {
    const double t_end = cfg_.t_end;
    const double burn = cfg_.burn_in();
    const double snap_dt = cfg_.snapshot_interval();
    // First snapshot strictly after the burn-in window.
    double next_snap = std::ceil(burn / snap_dt + 1e-12) * snap_dt;
    if (next_snap <= burn) next_snap += snap_dt;

    std::uint64_t events = 0;
    while (true) {
      const double total_rate = arrival_rate_total_ + refresh_rates();
      const double dt = total_rate > 0.0 ? rng_.exponential(total_rate)
                                         : std::numeric_limits<double>::infinity();
      const double t_next = state_.clock + dt;
      const double horizon = std::min(t_next, t_end);

      while (next_snap <= horizon + 1e-12 * t_end && next_snap <= t_end) {
        for (int c = 0; c < C_; ++c)
          for (int n = 0; n <= cfg_.n_max; ++n) hist_accum_[c][n] += hist_[c][n];
        ++snapshots_;
        if (cfg_.record_snapshots) {
          snapshot_times_.push_back(next_snap);
          snapshot_states_.push_back(current_snapshot());
        }
        next_snap += snap_dt;
      }
      accumulate_time(std::max(state_.clock, burn), std::max(horizon, burn));

      if (t_next >= t_end) {
        state_.clock = t_end;
        break;
      }
      state_.clock = t_next;
      dispatch(total_rate, burn);

      if (++events > cfg_.max_events)
        throw EventCapExceeded("simulation exceeded the event safety cap of " +
                                   std::to_string(cfg_.max_events),
                               finalize(events));
    }
    return finalize(events);
  }

private:
  // Sum of back-off and transmission rates for the current state; fills the
  // per-class rate scratch vectors.
  double refresh_rates() {
    double total = 0.0;
    const std::uint32_t allowed = space_.backoff_allowed[state_.activity_index];
    for (int c = 0; c < C_; ++c) {
      const double b = (allowed & (1u << c)) ? class_backoff_rate(c) : 0.0;
      const double tx = state_.transmitting_node[c] >= 0 ? tx_rate_[c] : 0.0;
      backoff_rate_scratch_[c] = b;
      tx_rate_scratch_[c] = tx;
      total += b + tx;
    }
    return total;
  }

  double class_backoff_rate(int c) const {
    // backoff_weight_ is maintained incrementally; clip accumulated float
    // dust when the class has drained empty.
    if (params_.variant == ModelVariant::queue_based)
      return std::max(backoff_weight_[c], 0.0) / nodes_[c];
    return params_.nu[c] * static_cast<double>(nonempty_[c].size()) / nodes_[c];
  }

  void accumulate_time(double from, double to) {
    const double dt = to - from;
    if (dt <= 0.0) return;
    stats_duration_ += dt;
    const std::uint32_t allowed = space_.backoff_allowed[state_.activity_index];
    for (int c = 0; c < C_; ++c) {
      int_queue_[c] += dt * buffered_[c];
      if (state_.transmitting_node[c] >= 0) int_active_[c] += dt;
      if (!(allowed & (1u << c))) {
        const double frozen_rate = params_.variant == ModelVariant::queue_based
                                       ? backoff_weight_[c] / nodes_[c]
                                       : params_.nu[c] * static_cast<double>(nonempty_[c].size()) /
                                             nodes_[c];
        counters_[c].blocked_opportunity += dt * frozen_rate;
      }
    }
  }

  void dispatch(double total_rate, double burn) {
    double u = rng_.uniform() * total_rate;
    if (u < arrival_rate_total_) {
      int c = 0;
      while (c + 1 < C_ && u >= params_.lambda[c]) u -= params_.lambda[c], ++c;
      while (c > 0 && params_.lambda[c] == 0.0) --c;  // float dust on the cascade
      handle_arrival(c);
      return;
    }
    u -= arrival_rate_total_;
    for (int c = 0; c < C_; ++c) {
      if (u < backoff_rate_scratch_[c]) {
        handle_backoff(c, burn);
        return;
      }
      u -= backoff_rate_scratch_[c];
    }
    for (int c = 0; c < C_; ++c) {
      if (u < tx_rate_scratch_[c]) {
        handle_completion(c, burn);
        return;
      }
      u -= tx_rate_scratch_[c];
    }
    // Float dust: attribute to the last positive-rate candidate.
    for (int c = C_ - 1; c >= 0; --c) {
      if (tx_rate_scratch_[c] > 0.0) return handle_completion(c, burn);
      if (backoff_rate_scratch_[c] > 0.0) return handle_backoff(c, burn);
    }
    for (int c = C_ - 1; c >= 0; --c)
      if (params_.lambda[c] > 0.0) return handle_arrival(c);
  }

  void handle_arrival(int c) {
    counters_[c].arrivals += 1;
    const int k = static_cast<int>(rng_.below(nodes_[c]));
    const int q = state_.queue[c][k];
    if (params_.variant == ModelVariant::finite_buffer && q >= params_.buffer_cap[c]) {
      counters_[c].drops += 1;
      return;
    }
    set_queue(c, k, q + 1);
    state_.arrivals[c][k].push_back(state_.clock);
  }

  void handle_backoff(int c, double burn) {
    assert(space_.backoff_allowed[state_.activity_index] & (1u << c));
    const int k = pick_backoff_winner(c);
    const int q = state_.queue[c][k];
    assert(q > 0);

    const double arrived = state_.arrivals[c][k].front();
    state_.arrivals[c][k].pop_front();
    if (state_.clock > burn) waits_[c].push_back(state_.clock - arrived);
    counters_[c].backoffs += 1;

    set_queue(c, k, q - 1);
    state_.transmitting_node[c] = k;
    state_.inflight_arrival[c] = arrived;
    tx_rate_[c] = draw_service_rate(c);
    state_.activity_index = space_.up[state_.activity_index][c];
    assert(state_.activity_index >= 0);
  }

  void handle_completion(int c, double burn) {
    assert(state_.transmitting_node[c] >= 0);
    if (state_.clock > burn) sojourns_[c].push_back(state_.clock - state_.inflight_arrival[c]);
    counters_[c].transmissions += 1;
    state_.transmitting_node[c] = -1;
    state_.activity_index = space_.down[state_.activity_index][c];
    assert(state_.activity_index >= 0);
  }

  int pick_backoff_winner(int c) {
    if (params_.variant != ModelVariant::queue_based) {
      const auto& list = nonempty_[c];
      return list[rng_.below(list.size())];
    }
    // Weight nodes by their current back-off rate nu_c(Q).
    double u = rng_.uniform() * backoff_weight_[c];
    const auto& qs = state_.queue[c];
    for (int k = 0; k < static_cast<int>(qs.size()); ++k) {
      const double w = params_.backoff[c].rate(qs[k], params_.nu[c]);
      if (u < w) return k;
      u -= w;
    }
    for (int k = static_cast<int>(qs.size()) - 1; k >= 0; --k)
      if (qs[k] > 0) return k;
    throw NumericalError("back-off event with no eligible node");
  }

  double draw_service_rate(int c) {
    if (params_.variant != ModelVariant::multi_rate) return params_.mu[c];
    double u = rng_.uniform();
    const auto& ms = params_.modes[c];
    for (const auto& m : ms) {
      if (u < m.prob) return 1.0 / m.mean;
      u -= m.prob;
    }
    return 1.0 / ms.back().mean;
  }

  // Central queue mutation: keeps the nonempty lists, histograms, buffered
  // totals and queue-based weights consistent.
  void set_queue(int c, int k, int q_new) {
    const int q_old = state_.queue[c][k];
    state_.queue[c][k] = q_new;
    buffered_[c] += q_new - q_old;
    hist_[c][std::min(q_old, cfg_.n_max)] -= 1;
    hist_[c][std::min(q_new, cfg_.n_max)] += 1;
    if (params_.variant == ModelVariant::queue_based)
      backoff_weight_[c] += params_.backoff[c].rate(q_new, params_.nu[c]) -
                            params_.backoff[c].rate(q_old, params_.nu[c]);
    if (q_old == 0 && q_new > 0) {
      nonempty_pos_[c][k] = static_cast<int>(nonempty_[c].size());
      nonempty_[c].push_back(k);
    } else if (q_old > 0 && q_new == 0) {
      const int pos = nonempty_pos_[c][k];
      const int last = nonempty_[c].back();
      nonempty_[c][pos] = last;
      nonempty_pos_[c][last] = pos;
      nonempty_[c].pop_back();
      nonempty_pos_[c][k] = -1;
    }
  }

  SimStats finalize(std::uint64_t events) {
    SimStats out;
    out.nodes_per_class = nodes_;
    out.duration = cfg_.t_end;
    out.stats_duration = stats_duration_;
    out.snapshots = snapshots_;
    out.total_events = events;
    out.seed = seed_;
    out.stable_config = stability_condition(params_, space_).stable;

    out.x_hat = PopulationState(C_, cfg_.n_max);
    for (int c = 0; c < C_; ++c)
      for (int n = 0; n <= cfg_.n_max; ++n)
        out.x_hat.at(c, n) =
            snapshots_ > 0 ? hist_accum_[c][n] / (static_cast<double>(snapshots_) * nodes_[c]) : 0.0;

    out.snapshot_times = std::move(snapshot_times_);
    out.snapshot_states = std::move(snapshot_states_);
    out.per_class.resize(C_);
    for (int c = 0; c < C_; ++c) {
      auto& cs = out.per_class[c];
      cs.counts = counters_[c];
      cs.wait_samples = std::move(waits_[c]);
      cs.sojourn_samples = std::move(sojourns_[c]);
      cs.mean_wait = mean_of(cs.wait_samples);
      cs.mean_sojourn = mean_of(cs.sojourn_samples);
      cs.time_avg_queue =
          stats_duration_ > 0.0 ? int_queue_[c] / stats_duration_ / nodes_[c] : 0.0;
      cs.time_avg_active = stats_duration_ > 0.0 ? int_active_[c] / stats_duration_ : 0.0;
      out.queued_at_end += buffered_[c];
      if (state_.transmitting_node[c] >= 0) out.inflight_at_end += 1;
    }
    return out;
  }

  static double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  }

  PopulationState current_snapshot() const {
    PopulationState x(C_, cfg_.n_max);
    for (int c = 0; c < C_; ++c)
      for (int n = 0; n <= cfg_.n_max; ++n)
        x.at(c, n) = static_cast<double>(hist_[c][n]) / nodes_[c];
    return x;
  }

  const SimConfig& cfg_;
  const NetworkParams& params_;
  const ActivitySpace& space_;
  Rng rng_;
  std::uint64_t seed_;
  int C_ = 0;
  std::vector<int> nodes_;
  SimState state_;

  std::vector<std::vector<int>> nonempty_;      // per class: node ids with q > 0
  std::vector<std::vector<int>> nonempty_pos_;  // inverse index into nonempty_
  std::vector<double> backoff_weight_;          // queue-based: sum_k nu_c(Q_k)
  std::vector<std::int64_t> buffered_;          // total buffered packets per class
  std::vector<double> tx_rate_;                 // current service rate per active class
  std::vector<std::vector<std::int64_t>> hist_; // live level histogram (top bin pooled)
  std::vector<std::vector<double>> hist_accum_;
  std::vector<double> backoff_rate_scratch_;
  std::vector<double> tx_rate_scratch_;

  std::vector<double> int_queue_;
  std::vector<double> int_active_;
  std::vector<ClassCounters> counters_;
  std::vector<std::vector<double>> waits_;
  std::vector<std::vector<double>> sojourns_;

  double arrival_rate_total_ = 0.0;
  double stats_duration_ = 0.0;
  std::uint64_t snapshots_ = 0;
  std::vector<double> snapshot_times_;
  std::vector<PopulationState> snapshot_states_;
};

}  // namespace detail

/// Runs one seeded realization of the exact N-node Markov process and returns
/// its statistics. Unstable parameter sets are permitted and flagged.
inline SimStats run(const SimConfig& config) {
  config.validate();
  detail::SimulationRun r(config, config.seed);
  return r.run();
}

struct PooledClassSummary {
  double mean_wait = 0.0;
  double mean_wait_stderr = 0.0;
  double mean_sojourn = 0.0;
  double mean_sojourn_stderr = 0.0;
  double time_avg_queue = 0.0;
  std::uint64_t wait_count = 0;
};

struct ReplicateResult {
  std::vector<SimStats> runs;
  PopulationState x_hat;  // average over replicas
  std::vector<PooledClassSummary> per_class;
};

/// Runs `count` replicas with seeds seed, seed+1, ... and pools their
/// statistics; replicas execute in parallel but the pooled reduction is
/// performed in replica order, so results do not depend on scheduling.
inline ReplicateResult replicate(const SimConfig& config, int count) {
  if (count < 1) throw ConfigError("replicate: need at least one run");
  config.validate();

  std::vector<std::future<SimStats>> futures;
  futures.reserve(count);
  for (int i = 0; i < count; ++i) {
    SimConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(i);
    futures.push_back(std::async(std::launch::async, [cfg = std::move(c)] { return run(cfg); }));
  }

  ReplicateResult out;
  out.runs.reserve(count);
  for (auto& f : futures) out.runs.push_back(f.get());

  const int C = config.params.num_classes();
  out.x_hat = PopulationState(C, config.n_max);
  for (const auto& r : out.runs)
    for (std::size_t i = 0; i < out.x_hat.data.size(); ++i)
      out.x_hat.data[i] += r.x_hat.data[i] / count;

  out.per_class.resize(C);
  for (int c = 0; c < C; ++c) {
    auto& s = out.per_class[c];
    std::vector<double> wait_means, sojourn_means;
    for (const auto& r : out.runs) {
      wait_means.push_back(r.per_class[c].mean_wait);
      sojourn_means.push_back(r.per_class[c].mean_sojourn);
      s.time_avg_queue += r.per_class[c].time_avg_queue / count;
      s.wait_count += r.per_class[c].wait_samples.size();
    }
    auto mean_and_stderr = [](const std::vector<double>& v) {
      const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
      if (v.size() < 2) return std::pair<double, double>{m, 0.0};
      double ss = 0.0;
      for (double x : v) ss += (x - m) * (x - m);
      return std::pair<double, double>{m, std::sqrt(ss / (v.size() - 1) / v.size())};
    };
    std::tie(s.mean_wait, s.mean_wait_stderr) = mean_and_stderr(wait_means);
    std::tie(s.mean_sojourn, s.mean_sojourn_stderr) = mean_and_stderr(sojourn_means);
  }
  return out;
}

}  // namespace csmamf
