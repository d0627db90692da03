// Command-line front end: every experiment is driven by a JSON config file;
// subcommands expose enumeration, fixed points, ODE integration, simulation,
// asymptotic comparison, and parameter sweeps.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "csmamf/csmamf.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;       // unexpected failure
constexpr int kExitConfig = 2;      // bad config or arguments
constexpr int kExitInfeasible = 3;  // target outside the feasible region
constexpr int kExitNumerical = 4;   // solver or simulation failure

struct GlobalOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int replicas = 0;
};

csmamf::ExperimentConfig load(const GlobalOpts& g) {
  csmamf::ExperimentConfig cfg = csmamf::load_config(g.config_path);
  if (g.seed_set) cfg.sim.seed = g.seed;
  if (g.replicas > 0) cfg.sim.replicas = g.replicas;
  return cfg;
}

void add_common(CLI::App* cmd, GlobalOpts& g) {
  cmd->add_option("--config", g.config_path, "experiment config file (JSON)")->required();
  cmd->add_option("--out", g.out_dir, "output directory (default: config output.dir)");
  cmd->add_option("--seed", g.seed, "override the config seed")
      ->each([&g](const std::string&) { g.seed_set = true; });
  cmd->add_option("--replicas", g.replicas, "override the replica count");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mean-field analysis and exact simulation of unsaturated CSMA networks"};
  app.require_subcommand(1);

  GlobalOpts g;
  csmamf::SweepSpec sweep;

  CLI::App* c_enum = app.add_subcommand("enumerate", "list the feasible activity states");
  CLI::App* c_fp = app.add_subcommand("fixed-point", "solve for the mean-field equilibrium");
  CLI::App* c_ode = app.add_subcommand("ode", "integrate the mean-field dynamics");
  CLI::App* c_sim = app.add_subcommand("simulate", "run the exact N-node simulation");
  CLI::App* c_cmp = app.add_subcommand("compare", "simulate an N-ladder and compare to the limit laws");
  CLI::App* c_sweep = app.add_subcommand("sweep", "fixed points along a one-parameter grid");
  for (CLI::App* c : {c_enum, c_fp, c_ode, c_sim, c_cmp, c_sweep}) add_common(c, g);
  c_sweep->add_option("--param", sweep.parameter, "parameter to vary, e.g. lambda[0]")->required();
  c_sweep->add_option("--from", sweep.from, "grid start")->required();
  c_sweep->add_option("--to", sweep.to, "grid end")->required();
  c_sweep->add_option("--steps", sweep.steps, "number of grid points")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    const csmamf::ExperimentConfig cfg = load(g);
    const std::string out = g.out_dir.empty() ? cfg.output.dir : g.out_dir;

    csmamf::Json result;
    if (app.got_subcommand(c_enum)) result = csmamf::cmd_enumerate(cfg, out);
    if (app.got_subcommand(c_fp)) result = csmamf::cmd_fixed_point(cfg, out);
    if (app.got_subcommand(c_ode)) result = csmamf::cmd_ode(cfg, out);
    if (app.got_subcommand(c_sim)) result = csmamf::cmd_simulate(cfg, out);
    if (app.got_subcommand(c_cmp)) result = csmamf::cmd_compare(cfg, out);
    if (app.got_subcommand(c_sweep)) result = csmamf::cmd_sweep(cfg, sweep, out);

    std::cout << result.dump(2) << "\n";
    return kExitOk;
  } catch (const csmamf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const csmamf::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const csmamf::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
