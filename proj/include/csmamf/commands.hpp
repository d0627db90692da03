#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "csmamf/config.hpp"
#include "csmamf/io.hpp"
#include "csmamf/metrics.hpp"

namespace csmamf {

// The CLI subcommands as plain functions: each returns the JSON payload and,
// when an output directory is given, writes it (plus any CSV side files)
// there atomically. Keeping them header-level functions lets the tests drive
// them without spawning processes.

namespace detail {

inline void stamp(Json& j, const ExperimentConfig& cfg) {
  j["config_hash"] = cfg.hash();
  j["seed"] = cfg.sim.seed;
}

inline void maybe_write_json(const ExperimentConfig& cfg, const std::string& out_dir,
                             const std::string& name, const Json& j) {
  if (out_dir.empty()) return;
  if (std::find(cfg.output.formats.begin(), cfg.output.formats.end(), "json") ==
      cfg.output.formats.end())
    return;
  atomic_write(std::filesystem::path(out_dir) / name, j.dump(2) + "\n");
}

inline bool csv_enabled(const ExperimentConfig& cfg) {
  return std::find(cfg.output.formats.begin(), cfg.output.formats.end(), "csv") !=
         cfg.output.formats.end();
}

inline Json fixed_point_json(const FixedPointResult& fp) {
  Json j;
  j["xi"] = fp.xi;
  j["residual"] = fp.residual;
  j["iterations"] = fp.iterations;
  j["stable"] = fp.stable;
  j["varrho"] = fp.varrho;
  return j;
}

inline int resolved_meanfield_n_max(const ExperimentConfig& cfg, const ActivitySpace& space) {
  if (cfg.meanfield.n_max > 0) return cfg.meanfield.n_max;
  FixedPointOptions opt;
  opt.n_max = 0;
  const FixedPointResult fp = fixed_point(cfg.params, space, opt);
  return fp.x_star.n_max;
}

inline SimConfig make_sim_config(const ExperimentConfig& cfg, const ActivitySpace& space,
                                 int n_nodes) {
  SimConfig sc;
  sc.params = cfg.params;
  sc.space = space;
  sc.total_nodes = n_nodes;
  sc.seed = cfg.sim.seed;
  sc.t_end = cfg.sim.t_end;
  sc.burn_in_fraction = cfg.sim.burn_in_frac;
  sc.burn_in_time = cfg.sim.burn_in_time;
  sc.sample_interval = cfg.sim.sample_interval;
  sc.n_max = cfg.sim.n_max;
  sc.max_events = cfg.sim.max_events;
  return sc;
}

inline Json sim_summary_json(const ReplicateResult& pooled, const ExperimentConfig& cfg) {
  Json j;
  j["replicas"] = static_cast<int>(pooled.runs.size());
  Json runs = Json::array();
  for (const auto& r : pooled.runs) {
    Json rj;
    rj["seed"] = r.seed;
    rj["events"] = r.total_events;
    rj["snapshots"] = r.snapshots;
    rj["stable_config"] = r.stable_config;
    Json cls = Json::array();
    for (int c = 0; c < static_cast<int>(r.per_class.size()); ++c) {
      const auto& cs = r.per_class[c];
      Json cj;
      cj["arrivals"] = cs.counts.arrivals;
      cj["drops"] = cs.counts.drops;
      cj["backoffs"] = cs.counts.backoffs;
      cj["transmissions"] = cs.counts.transmissions;
      cj["blocked_opportunity"] = cs.counts.blocked_opportunity;
      cj["mean_wait"] = cs.mean_wait;
      cj["mean_sojourn"] = cs.mean_sojourn;
      cj["time_avg_queue"] = cs.time_avg_queue;
      cj["time_avg_active"] = cs.time_avg_active;
      cj["wait_samples"] = cs.wait_samples.size();
      cls.push_back(cj);
    }
    rj["classes"] = cls;
    runs.push_back(rj);
  }
  j["runs"] = runs;

  Json pooled_j;
  Json cls = Json::array();
  for (const auto& s : pooled.per_class) {
    Json cj;
    cj["mean_wait"] = s.mean_wait;
    cj["mean_wait_stderr"] = s.mean_wait_stderr;
    cj["mean_sojourn"] = s.mean_sojourn;
    cj["mean_sojourn_stderr"] = s.mean_sojourn_stderr;
    cj["time_avg_queue"] = s.time_avg_queue;
    cj["wait_count"] = s.wait_count;
    cls.push_back(cj);
  }
  pooled_j["classes"] = cls;
  Json xh = Json::array();
  for (int c = 0; c < pooled.x_hat.num_classes; ++c) {
    Json row = Json::array();
    for (int n = 0; n <= pooled.x_hat.n_max; ++n) row.push_back(pooled.x_hat.at(c, n));
    xh.push_back(row);
  }
  pooled_j["x_hat"] = xh;
  j["pooled"] = pooled_j;
  stamp(j, cfg);
  return j;
}

}  // namespace detail

/// `enumerate`: list the feasible activity states and per-class index sets.
inline Json cmd_enumerate(const ExperimentConfig& cfg, const std::string& out_dir = "") {
  const ActivitySpace space = enumerate_feasible_states(cfg.graph);
  Json j;
  j["num_classes"] = space.num_classes;
  j["num_states"] = static_cast<int>(space.size());
  Json states = Json::array();
  for (ActivityMask m : space.states)
    states.push_back(activity_state_string(m, space.num_classes));
  j["states"] = states;
  Json minus = Json::array(), plus = Json::array();
  for (int c = 0; c < space.num_classes; ++c) {
    minus.push_back(static_cast<int>(space.omega_minus[c].size()));
    plus.push_back(static_cast<int>(space.omega_plus[c].size()));
  }
  j["omega_minus_sizes"] = minus;
  j["omega_plus_sizes"] = plus;
  detail::stamp(j, cfg);
  detail::maybe_write_json(cfg, out_dir, "enumerate.json", j);
  return j;
}

/// `fixed-point`: activity factors, equilibrium, stability.
inline Json cmd_fixed_point(const ExperimentConfig& cfg, const std::string& out_dir = "") {
  const ActivitySpace space = enumerate_feasible_states(cfg.graph);
  FixedPointOptions opt;
  opt.n_max = cfg.meanfield.n_max;
  const FixedPointResult fp = fixed_point(cfg.params, space, opt);
  Json j = detail::fixed_point_json(fp);
  Json xs = Json::array();
  for (int c = 0; c < fp.x_star.num_classes; ++c) {
    Json row = Json::array();
    for (int n = 0; n <= fp.x_star.n_max; ++n) row.push_back(fp.x_star.at(c, n));
    xs.push_back(row);
  }
  j["x_star"] = xs;
  detail::stamp(j, cfg);
  detail::maybe_write_json(cfg, out_dir, "fixed_point.json", j);
  return j;
}

/// `ode`: integrate the mean-field dynamics; trajectory goes to CSV.
inline Json cmd_ode(const ExperimentConfig& cfg, const std::string& out_dir = "") {
  const ActivitySpace space = enumerate_feasible_states(cfg.graph);
  const int n_max = detail::resolved_meanfield_n_max(cfg, space);

  PopulationState x0 = PopulationState::empty_state(cfg.params.num_classes(), n_max);
  if (cfg.meanfield.x0 == "fixed_point") {
    FixedPointOptions opt;
    opt.n_max = n_max;
    x0 = fixed_point(cfg.params, space, opt).x_star;
  }

  IntegrateOptions iopt;
  iopt.step = cfg.meanfield.step;
  iopt.sample_stride = cfg.meanfield.sample_stride;
  const Trajectory traj = integrate(x0, cfg.params, space, cfg.meanfield.horizon, iopt);

  Json j;
  j["samples"] = static_cast<int>(traj.times.size());
  j["t_end"] = traj.times.back();
  j["final_drift_norm"] = traj.drift_norms.back();
  detail::stamp(j, cfg);

  if (!out_dir.empty() && detail::csv_enabled(cfg)) {
    CsvWriter csv("t,class,level,probability", cfg.hash(), cfg.sim.seed);
    for (std::size_t s = 0; s < traj.times.size(); ++s)
      for (int c = 0; c < traj.states[s].num_classes; ++c)
        for (int n = 0; n <= traj.states[s].n_max; ++n)
          csv.row(traj.times[s], c, n, traj.states[s].at(c, n));
    atomic_write(std::filesystem::path(out_dir) / "ode_trajectory.csv", csv.str());
  }
  detail::maybe_write_json(cfg, out_dir, "ode.json", j);
  return j;
}

/// `simulate`: replicated runs of the exact process at sim.n_nodes.
inline Json cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir = "") {
  if (cfg.sim.n_nodes < 1)
    throw ConfigError("simulate: sim.n_nodes must be set");
  const ActivitySpace space = enumerate_feasible_states(cfg.graph);
  const SimConfig sc = detail::make_sim_config(cfg, space, cfg.sim.n_nodes);
  const ReplicateResult pooled = replicate(sc, cfg.sim.replicas);
  const Json j = detail::sim_summary_json(pooled, cfg);

  if (!out_dir.empty() && detail::csv_enabled(cfg)) {
    CsvWriter waits("class,value", cfg.hash(), cfg.sim.seed);
    for (const auto& r : pooled.runs)
      for (int c = 0; c < static_cast<int>(r.per_class.size()); ++c)
        for (double w : r.per_class[c].wait_samples) waits.row(c, w);
    atomic_write(std::filesystem::path(out_dir) / "simulate_waits.csv", waits.str());

    // Snapshot time series from a dedicated recording run at the base seed,
    // thinned to a plottable number of time points.
    SimConfig rec = sc;
    rec.record_snapshots = true;
    const SimStats series = run(rec);
    const std::size_t total = series.snapshot_times.size();
    const std::size_t stride = std::max<std::size_t>(1, total / 200);
    CsvWriter pop("t,class,level,fraction", cfg.hash(), cfg.sim.seed);
    for (std::size_t i = 0; i < total; i += stride) {
      const PopulationState& x = series.snapshot_states[i];
      for (int c = 0; c < x.num_classes; ++c)
        for (int n = 0; n <= x.n_max; ++n)
          pop.row(series.snapshot_times[i], c, n, x.at(c, n));
    }
    atomic_write(std::filesystem::path(out_dir) / "simulate_population.csv", pop.str());
  }
  detail::maybe_write_json(cfg, out_dir, "simulate.json", j);
  return j;
}

/// `compare`: N-ladder of replicated simulations against the limit laws.
inline Json cmd_compare(const ExperimentConfig& cfg, const std::string& out_dir = "") {
  std::vector<int> ladder = cfg.sim.ladder;
  if (ladder.empty()) {
    if (cfg.sim.n_nodes < 1)
      throw ConfigError("compare: set sim.ladder or sim.n_nodes");
    ladder = {cfg.sim.n_nodes};
  }

  const ActivitySpace space = enumerate_feasible_states(cfg.graph);
  FixedPointOptions opt;
  opt.n_max = cfg.sim.n_max;
  const FixedPointResult fp = fixed_point(cfg.params, space, opt);
  const LimitLaws laws = limit_laws(fp);

  Json j;
  j["fixed_point"] = detail::fixed_point_json(fp);
  Json points = Json::array();
  CsvWriter csv("N,class,metric,value", cfg.hash(), cfg.sim.seed);

  for (int n_nodes : ladder) {
    const SimConfig sc = detail::make_sim_config(cfg, space, n_nodes);
    const ReplicateResult pooled = replicate(sc, cfg.sim.replicas);
    const ComparisonReport rep =
        compare(EmpiricalSummary::from(pooled), laws, fp, space, cfg.params);

    Json pj;
    pj["N"] = n_nodes;
    Json cls = Json::array();
    for (int c = 0; c < static_cast<int>(rep.per_class.size()); ++c) {
      const auto& rc = rep.per_class[c];
      Json cj;
      cj["distance"] = rc.distance;
      cj["tail_gap"] = rc.tail_gap;
      cj["scaled_wait_direct"] = rc.scaled_wait_direct;
      cj["scaled_wait_little"] = rc.scaled_wait_little;
      cj["scaled_wait_limit"] = rc.scaled_wait_limit;
      cj["wait_rel_error"] = rc.wait_rel_error;
      cj["estimators_consistent"] = rc.estimators_consistent;
      cls.push_back(cj);
      csv.row(n_nodes, c, std::string("distance"), rc.distance);
      csv.row(n_nodes, c, std::string("tail_gap"), rc.tail_gap);
      csv.row(n_nodes, c, std::string("scaled_wait_direct"), rc.scaled_wait_direct);
      csv.row(n_nodes, c, std::string("scaled_wait_little"), rc.scaled_wait_little);
      csv.row(n_nodes, c, std::string("wait_rel_error"), rc.wait_rel_error);
    }
    pj["classes"] = cls;
    if (rep.pseudo_conservation_residual >= 0.0) {
      pj["pseudo_conservation_residual"] = rep.pseudo_conservation_residual;
      csv.row(n_nodes, -1, std::string("pseudo_conservation_residual"),
              rep.pseudo_conservation_residual);
    }
    points.push_back(pj);
  }
  j["ladder"] = points;
  detail::stamp(j, cfg);

  if (!out_dir.empty() && detail::csv_enabled(cfg))
    atomic_write(std::filesystem::path(out_dir) / "compare.csv", csv.str());
  detail::maybe_write_json(cfg, out_dir, "compare.json", j);
  return j;
}

struct SweepSpec {
  std::string parameter;  // "lambda[0]", "nu[2]", "mu[1]"
  double from = 0.0;
  double to = 0.0;
  int steps = 2;  // number of grid points, endpoints included
};

/// `sweep`: fixed point and stability along a one-parameter grid.
inline Json cmd_sweep(const ExperimentConfig& cfg, const SweepSpec& spec,
                      const std::string& out_dir = "") {
  const auto lb = spec.parameter.find('[');
  const auto rb = spec.parameter.find(']');
  if (lb == std::string::npos || rb == std::string::npos || rb < lb)
    throw ConfigError("sweep: parameter must look like lambda[0]");
  const std::string name = spec.parameter.substr(0, lb);
  const int index = std::stoi(spec.parameter.substr(lb + 1, rb - lb - 1));
  if (spec.steps < 2) throw ConfigError("sweep: need at least two grid points");

  const ActivitySpace space = enumerate_feasible_states(cfg.graph);
  Json rows = Json::array();
  CsvWriter csv("value,varrho,stable,xi", cfg.hash(), cfg.sim.seed);

  for (int s = 0; s < spec.steps; ++s) {
    const double value = spec.from + (spec.to - spec.from) * s / (spec.steps - 1);
    NetworkParams p = cfg.params;
    std::vector<double>* target = nullptr;
    if (name == "lambda") target = &p.lambda;
    else if (name == "nu") target = &p.nu;
    else if (name == "mu") target = &p.mu;
    else throw ConfigError("sweep: unknown parameter '" + name + "'");
    if (index < 0 || index >= p.num_classes())
      throw ConfigError("sweep: class index out of range");
    (*target)[index] = value;

    Json row;
    row["value"] = value;
    const StabilityReport st = stability_condition(p, space);
    row["varrho"] = st.varrho;
    std::string xi_str;
    try {
      FixedPointOptions opt;
      opt.n_max = cfg.meanfield.n_max;
      const FixedPointResult fp = fixed_point(p, space, opt);
      row["stable"] = fp.stable;
      row["xi"] = fp.xi;
      for (std::size_t c = 0; c < fp.xi.size(); ++c)
        xi_str += (c ? ";" : "") + format_double(fp.xi[c]);
      csv.row(value, st.varrho, std::string(fp.stable ? "true" : "false"), xi_str);
    } catch (const InfeasibleError&) {
      row["stable"] = false;
      row["xi"] = nullptr;
      csv.row(value, st.varrho, std::string("false"), std::string(""));
    }
    rows.push_back(row);
  }

  Json j;
  j["parameter"] = spec.parameter;
  j["rows"] = rows;
  detail::stamp(j, cfg);
  if (!out_dir.empty() && detail::csv_enabled(cfg))
    atomic_write(std::filesystem::path(out_dir) / "sweep.csv", csv.str());
  detail::maybe_write_json(cfg, out_dir, "sweep.json", j);
  return j;
}

}  // namespace csmamf
