// Acceptance suite: one line per criterion, [PASS]/[FAIL], nonzero exit code
// when anything fails. Criterion 12 exercises the real CLI binary when its
// path is supplied as argv[1] (argv[2] = scratch directory).

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "csmamf/csmamf.hpp"

#include "../oracles.hpp"

using namespace csmamf;

namespace {

int g_failures = 0;

void criterion(const std::string& name, double budget_seconds,
               const std::function<std::string()>& body) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool threw = false;
  try {
    detail = body();
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
    threw = true;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool time_ok = secs <= budget_seconds;
  const bool ok = !threw && detail.empty() && time_ok;
  std::ostringstream line;
  line << (ok ? "[PASS] " : "[FAIL] ") << name;
  if (!detail.empty()) line << ": " << detail;
  if (!time_ok) line << " [runtime " << secs << "s exceeds " << budget_seconds << "s]";
  line.setf(std::ios::fixed);
  line.precision(1);
  line << " (" << secs << "s)";
  std::cout << line.str() << "\n" << std::flush;
  if (!ok) ++g_failures;
}

NetworkParams square_params() {
  NetworkParams p;
  p.lambda = {0.4, 0.2, 0.3, 0.4};
  p.nu = {4, 3, 3, 5};
  p.mu = {1, 1, 1, 1};
  p.p = {0.25, 0.25, 0.25, 0.25};
  return p;
}

InterferenceGraph square_graph() {
  return InterferenceGraph(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
}

NetworkParams random_stable_complete(int C, Rng& rng) {
  NetworkParams p;
  p.p.assign(C, 1.0 / C);
  for (int c = 0; c < C; ++c) {
    p.nu.push_back(0.5 + 2.0 * rng.uniform());
    p.mu.push_back(0.5 + 2.0 * rng.uniform());
  }
  for (int c = 0; c < C; ++c)
    p.lambda.push_back(0.45 / C * (0.2 + 0.8 * rng.uniform()) * std::min(p.mu[c], p.nu[c]));
  return p;
}

PopulationState random_state(int C, int n_max, Rng& rng) {
  PopulationState x(C, n_max);
  for (int c = 0; c < C; ++c) {
    double sum = 0.0;
    for (int n = 0; n <= n_max; ++n) {
      x.at(c, n) = rng.uniform() * std::pow(0.6, n);
      sum += x.at(c, n);
    }
    for (int n = 0; n <= n_max; ++n) x.at(c, n) /= sum;
  }
  return x;
}

std::string check_square_fixed_point() {
  const ActivitySpace s = enumerate_feasible_states(square_graph());
  const FixedPointResult fp = fixed_point(square_params(), s);
  const std::vector<double> expected = {0.4302, 0.2635, 0.6537, 0.3442};
  for (int c = 0; c < 4; ++c)
    if (std::abs(fp.xi[c] - expected[c]) > 1e-3) {
      std::ostringstream os;
      os << "xi[" << c << "] = " << fp.xi[c] << " vs " << expected[c];
      return os.str();
    }
  return {};
}

std::string check_complete_closed_form() {
  Rng rng(1001);
  for (int trial = 0; trial < 50; ++trial) {
    const int C = 1 + static_cast<int>(rng.below(5));
    const NetworkParams p = random_stable_complete(C, rng);
    const ActivitySpace s = enumerate_feasible_states(InterferenceGraph::complete(C));
    const std::vector<double> closed = complete_graph_activity_factors(p);
    InvertOptions opt;
    opt.tol = 1e-13;
    const std::vector<double> inverted = invert_throughput(s, p, p.rho_vector(), opt);
    for (int c = 0; c < C; ++c)
      if (std::abs(closed[c] - inverted[c]) > 1e-10) {
        std::ostringstream os;
        os << "trial " << trial << " class " << c << ": |closed - inverted| = "
           << std::abs(closed[c] - inverted[c]);
        return os.str();
      }
  }
  return {};
}

std::string check_round_trip() {
  Rng rng(1002);
  int done = 0;
  while (done < 100) {
    const int C = 1 + static_cast<int>(rng.below(6));
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < C; ++a)
      for (int b = a + 1; b < C; ++b)
        if (rng.uniform() < 0.5) edges.emplace_back(a, b);
    const ActivitySpace s = enumerate_feasible_states(InterferenceGraph(C, edges));

    NetworkParams p;
    p.p.assign(C, 1.0 / C);
    for (int c = 0; c < C; ++c) {
      p.lambda.push_back(0.1);
      p.nu.push_back(0.5 + 2.0 * rng.uniform());
      p.mu.push_back(0.5 + 2.0 * rng.uniform());
    }

    std::vector<double> gamma(C, 0.0);
    std::vector<double> a(s.size());
    double total = 0.0;
    for (auto& v : a) total += (v = rng.uniform());
    const double scale = 0.1 + 0.75 * rng.uniform();
    for (std::size_t k = 0; k < s.size(); ++k)
      for (int c = 0; c < C; ++c)
        if (s.states[k] & (1u << c)) gamma[c] += scale * a[k] / total;
    if (capacity_region_contains(s, gamma).position != RegionPosition::inside_interior)
      continue;

    const std::vector<double> eta = invert_throughput(s, p, gamma);
    const std::vector<double> th = throughput(s, p, eta);
    for (int c = 0; c < C; ++c)
      if (std::abs(th[c] - gamma[c]) > 1e-8) {
        std::ostringstream os;
        os << "round trip residual " << std::abs(th[c] - gamma[c]) << " at trial " << done;
        return os.str();
      }
    ++done;
  }
  return {};
}

std::string check_ode_attraction() {
  const ActivitySpace s = enumerate_feasible_states(square_graph());
  const NetworkParams p = square_params();
  FixedPointOptions fopt;
  fopt.n_max = 64;
  const FixedPointResult fp = fixed_point(p, s, fopt);
  const PopulationState x0 = PopulationState::empty_state(4, 64);
  IntegrateOptions iopt;
  iopt.step = 0.01;
  iopt.sample_stride = 50;  // samples every 0.5 fluid time units
  const Trajectory t = integrate(x0, p, s, 200.0, iopt);

  const double final_dist = distance_l2(t.states.back(), fp.x_star);
  if (final_dist > 1e-4) {
    std::ostringstream os;
    os << "distance at T=200 is " << final_dist;
    return os.str();
  }

  std::vector<double> d;
  for (const auto& st : t.states) d.push_back(distance_l2(st, fp.x_star));
  std::size_t last_rise = 0;
  for (std::size_t i = 1; i < d.size(); ++i)
    if (d[i] > d[i - 1] + 1e-6) last_rise = i;
  for (std::size_t i = last_rise; i + 1 < d.size(); ++i)
    if (d[i + 1] > d[i] + 1e-6) {
      std::ostringstream os;
      os << "distance rises after its last local maximum (sample " << i << ")";
      return os.str();
    }
  return {};
}

std::string check_dominance_invariance() {
  Rng rng(1005);
  for (int trial = 0; trial < 100; ++trial) {
    const int C = 1 + static_cast<int>(rng.below(3));
    const NetworkParams p = random_stable_complete(C, rng);
    const ActivitySpace s = enumerate_feasible_states(InterferenceGraph::complete(C));
    const int n_max = 32;

    const PopulationState xu = random_state(C, n_max, rng);
    PopulationState xl = xu;
    for (int c = 0; c < C; ++c)
      for (int n = n_max; n >= 1; --n) {
        const double move = rng.uniform() * xl.at(c, n);
        const int dest = static_cast<int>(rng.below(n));
        xl.at(c, n) -= move;
        xl.at(c, dest) += move;
      }

    IntegrateOptions iopt;
    iopt.step = 0.01;
    iopt.sample_stride = 25;
    const Trajectory tl = integrate(xl, p, s, 50.0, iopt);
    const Trajectory tu = integrate(xu, p, s, 50.0, iopt);
    for (std::size_t i = 0; i < tl.states.size(); ++i)
      if (!stochastically_dominated(tl.states[i], tu.states[i], 1e-9)) {
        std::ostringstream os;
        os << "dominance violated at trial " << trial << ", t = " << tl.times[i];
        return os.str();
      }
  }
  return {};
}

std::string check_mass_drift_identity() {
  Rng rng(1006);
  for (int trial = 0; trial < 20; ++trial) {
    const int C = 1 + static_cast<int>(rng.below(3));
    const NetworkParams p = random_stable_complete(C, rng);
    const ActivitySpace s = enumerate_feasible_states(InterferenceGraph::complete(C));
    const PopulationState x0 = random_state(C, 32, rng);
    const double h = 0.01;
    IntegrateOptions iopt;
    iopt.step = h;
    iopt.sample_stride = 1;
    const Trajectory t = integrate(x0, p, s, 10.0, iopt);
    for (std::size_t i = 1; i + 1 < t.states.size(); ++i) {
      const std::vector<double> md = mass_drift(t.states[i], p, s);
      for (int c = 0; c < C; ++c) {
        const double fd = (t.states[i + 1].mass(c) - t.states[i - 1].mass(c)) / (2.0 * h);
        if (std::abs(fd - md[c]) > 10.0 * h * h) {
          std::ostringstream os;
          os << "trial " << trial << " t=" << t.times[i] << " class " << c
             << ": |fd - drift| = " << std::abs(fd - md[c]);
          return os.str();
        }
      }
    }
  }
  return {};
}

std::string check_ctmc_oracle() {
  const double lambda = 0.2, nu = 1.0, mu = 1.0;
  const int qmax = 60;

  for (int n_nodes : {1, 2}) {
    SimConfig cfg;
    cfg.params.lambda = {lambda};
    cfg.params.nu = {nu};
    cfg.params.mu = {mu};
    cfg.params.p = {1.0};
    cfg.space = enumerate_feasible_states(InterferenceGraph::complete(1));
    cfg.total_nodes = n_nodes;
    cfg.seed = 1007;
    cfg.t_end = 1e6;
    cfg.n_max = qmax;
    const ReplicateResult pooled = replicate(cfg, 4);

    const std::vector<double> oracle =
        n_nodes == 1 ? oracles::single_node_queue_pmf(lambda, nu, mu, qmax)
                     : oracles::two_node_queue_pmf(lambda, nu, mu, qmax);
    std::vector<double> sim_pmf(qmax + 1);
    for (int n = 0; n <= qmax; ++n) sim_pmf[n] = pooled.x_hat.at(0, n);
    const double tv = oracles::total_variation(sim_pmf, oracle);
    if (tv > 0.01) {
      std::ostringstream os;
      os << "N=" << n_nodes << ": total variation " << tv;
      return os.str();
    }
  }
  return {};
}

struct LadderData {
  std::vector<int> n_values;
  std::vector<std::vector<double>> distances;      // [point][class]
  std::vector<std::vector<double>> wait_rel_error; // [point][class]
};

LadderData run_square_ladder() {
  const ActivitySpace s = enumerate_feasible_states(square_graph());
  const NetworkParams p = square_params();
  FixedPointOptions fopt;
  fopt.n_max = 64;
  const FixedPointResult fp = fixed_point(p, s, fopt);
  const LimitLaws laws = limit_laws(fp);

  LadderData data;
  data.n_values = {4, 8, 16, 32, 64};
  for (int n_nodes : data.n_values) {
    SimConfig cfg;
    cfg.params = p;
    cfg.space = s;
    cfg.total_nodes = n_nodes;
    cfg.seed = 1008;
    cfg.t_end = 1e5;
    cfg.n_max = 64;
    const ReplicateResult pooled = replicate(cfg, 8);
    const ComparisonReport rep =
        compare(EmpiricalSummary::from(pooled), laws, fp, s, p);
    std::vector<double> d, w;
    for (const auto& rc : rep.per_class) {
      d.push_back(rc.distance);
      w.push_back(rc.wait_rel_error);
    }
    data.distances.push_back(d);
    data.wait_rel_error.push_back(w);
  }
  return data;
}

std::string check_interchange_trend(const LadderData& data) {
  const std::vector<double>& first = data.distances.front();
  const std::vector<double>& last = data.distances.back();
  for (int c = 0; c < 4; ++c) {
    if (!(last[c] < first[c])) {
      std::ostringstream os;
      os << "class " << c << ": d(N=64) = " << last[c] << " not below d(N=4) = " << first[c];
      return os.str();
    }
    if (last[c] > 0.05) {
      std::ostringstream os;
      os << "class " << c << ": d(N=64) = " << last[c] << " exceeds 0.05";
      return os.str();
    }
  }
  return {};
}

std::string check_waiting_time_law(const LadderData& data) {
  const std::vector<double>& rel = data.wait_rel_error.back();  // N = 64
  for (int c = 0; c < 4; ++c)
    if (rel[c] > 0.10) {
      std::ostringstream os;
      os << "class " << c << ": scaled mean wait off by " << 100.0 * rel[c] << "%";
      return os.str();
    }
  return {};
}

std::string check_pseudo_conservation() {
  NetworkParams p;
  p.lambda = {0.15, 0.2};
  p.nu = {1.0, 1.0};
  p.mu = {1.0, 1.0};
  p.p = {0.5, 0.5};
  SimConfig cfg;
  cfg.params = p;
  cfg.space = enumerate_feasible_states(InterferenceGraph::complete(2));
  cfg.total_nodes = 8;
  cfg.seed = 1010;
  cfg.t_end = 1e6;
  const SimStats st = run(cfg);
  const double res = pseudo_conservation_residual(st, p, cfg.space);
  if (res > 0.05) {
    std::ostringstream os;
    os << "relative residual " << res;
    return os.str();
  }
  return {};
}

std::string check_queue_based_example() {
  NetworkParams p;
  p.lambda = {0.3};
  p.nu = {1.0};
  p.mu = {1.0};
  p.p = {1.0};
  p.variant = ModelVariant::queue_based;
  p.backoff = {{{}, BackoffRateTable::Tail::linear}};
  const ActivitySpace s = enumerate_feasible_states(InterferenceGraph::complete(1));
  FixedPointOptions opt;
  opt.n_max = 48;
  const FixedPointResult fp = fixed_point(p, s, opt);

  std::string detail;
  const double pinned = 0.7 / (0.3 * std::exp(1.0));  // reference head probability
  if (std::abs(fp.x_star.at(0, 0) - pinned) > 1e-10) {
    std::ostringstream os;
    os << "x*_0 = " << fp.x_star.at(0, 0)
       << " (normalized level-weight cascade, zero drift) vs pinned reference " << pinned
       << " (unnormalized 1/(nu~ e) head, not a drift zero)";
    detail = os.str();
  }
  const double hnorm = drift_max_norm(drift(fp.x_star, p, s));
  if (hnorm > 1e-9) {
    if (!detail.empty()) detail += "; ";
    std::ostringstream os;
    os << "drift norm at x* is " << hnorm;
    detail += os.str();
  }
  return detail;
}

std::string check_finite_buffer_example() {
  NetworkParams p;
  p.lambda = {0.2};
  p.nu = {1.0};
  p.mu = {1.0};
  p.p = {1.0};
  p.variant = ModelVariant::finite_buffer;
  const ActivitySpace s = enumerate_feasible_states(InterferenceGraph::complete(1));

  for (int cap : {2, 8, 64}) {
    p.buffer_cap = {cap};
    const FixedPointResult fp = fixed_point(p, s, {64, {}});
    const double xi = fp.xi[0];
    double denom = 0.0, t = 1.0;
    for (int n = 0; n <= cap; ++n, t *= xi) denom += t;
    const double w = p.sigma(0) * (1.0 - 1.0 / denom);
    const double theta = w / (1.0 + w);
    const double load = p.rho(0) * (1.0 - std::pow(xi, cap) / denom);
    if (std::abs(theta - load) > 1e-12) {
      std::ostringstream os;
      os << "K=" << cap << ": |theta~ - rho~| = " << std::abs(theta - load);
      return os.str();
    }
  }

  p.buffer_cap = {64};
  const FixedPointResult fb = fixed_point(p, s, {64, {}});
  NetworkParams base = p;
  base.variant = ModelVariant::base;
  base.buffer_cap.clear();
  const FixedPointResult geo = fixed_point(base, s, {64, {}});
  const double dist = distance_l2(fb.x_star, geo.x_star);
  if (dist > 1e-6) {
    std::ostringstream os;
    os << "K=64 equilibrium is " << dist << " away from the geometric law";
    return os.str();
  }
  return {};
}

std::string check_multi_rate_single_mode() {
  Rng rng(1011);
  NetworkParams base;
  base.lambda = {0.3, 0.2};
  base.nu = {1.5, 1.0};
  base.mu = {1.2, 0.9};
  base.p = {0.5, 0.5};
  NetworkParams mtr = base;
  mtr.variant = ModelVariant::multi_rate;
  mtr.modes = {{{1.0, 1.0 / 1.2}}, {{1.0, 1.0 / 0.9}}};
  const ActivitySpace s = enumerate_feasible_states(InterferenceGraph::complete(2));

  for (int trial = 0; trial < 20; ++trial) {
    const PopulationState x = random_state(2, 24, rng);
    const PopulationState hb = drift(x, base, s);
    const PopulationState hm = drift(x, mtr, s);
    for (std::size_t i = 0; i < hb.data.size(); ++i)
      if (std::abs(hb.data[i] - hm.data[i]) > 1e-12) {
        std::ostringstream os;
        os << "drift entries differ by " << std::abs(hb.data[i] - hm.data[i]);
        return os.str();
      }
  }
  return {};
}

std::string check_cli_determinism(const std::string& cli, const std::string& scratch) {
  if (cli.empty()) return "CLI path not supplied";
  namespace fs = std::filesystem;
  fs::create_directories(scratch);
  const fs::path config_path = fs::path(scratch) / "det_config.json";
  {
    std::ofstream cfg(config_path);
    cfg << R"({
      "graph": {"classes": 4, "edges": [[0,1],[0,2],[1,3],[2,3]]},
      "params": {"lambda": [0.4,0.2,0.3,0.4], "nu": [4,3,3,5], "mu": [1,1,1,1]},
      "sim": {"n_nodes": 16, "seed": 99, "t_end": 2000.0, "replicas": 2}
    })";
  }
  auto run_once = [&](const std::string& tag) -> std::string {
    const fs::path out = fs::path(scratch) / tag;
    fs::remove_all(out);
    const std::string cmd = cli + " simulate --config " + config_path.string() + " --out " +
                            out.string() + " > " + (out.string() + ".stdout") + " 2>&1";
    if (std::system(cmd.c_str()) != 0) return "";
    std::ifstream in(out / "simulate.json", std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = run_once("det_a");
  const std::string b = run_once("det_b");
  if (a.empty() || b.empty()) return "CLI invocation failed";
  if (a != b) return "JSON summaries differ between identical invocations";
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::string scratch = argc > 2 ? argv[2] : "acceptance_scratch";

  criterion("criterion 1 (square-graph fixed point)", 1.0, check_square_fixed_point);
  criterion("criterion 2 (complete-graph closed form vs solver)", 10.0,
            check_complete_closed_form);
  criterion("criterion 3 (throughput round trip)", 30.0, check_round_trip);
  criterion("criterion 4 (ODE attraction)", 30.0, check_ode_attraction);
  criterion("criterion 5 (stochastic dominance invariance)", 120.0, check_dominance_invariance);
  criterion("criterion 6 (mass-drift identity)", 600.0, check_mass_drift_identity);
  criterion("criterion 7 (exact-CTMC oracle equivalence)", 120.0, check_ctmc_oracle);

  LadderData ladder;
  criterion("criterion 8 (interchange-of-limits trend)", 600.0, [&] {
    ladder = run_square_ladder();
    return check_interchange_trend(ladder);
  });
  criterion("criterion 9 (waiting-time law)", 600.0,
            [&] { return check_waiting_time_law(ladder); });
  criterion("criterion 10 (pseudo-conservation audit)", 600.0, check_pseudo_conservation);
  criterion("criterion 11a (queue-based example)", 600.0, check_queue_based_example);
  criterion("criterion 11b (finite-buffer fixed point)", 600.0, check_finite_buffer_example);
  criterion("criterion 11c (multi-rate single mode)", 600.0, check_multi_rate_single_mode);
  criterion("criterion 12 (simulate determinism)", 600.0,
            [&] { return check_cli_determinism(cli, scratch); });

  std::cout << (g_failures == 0 ? "all criteria passed"
                                : std::to_string(g_failures) + " criterion(s) failed")
            << "\n";
  return g_failures == 0 ? 0 : 1;
}
