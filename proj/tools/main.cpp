// Command-line front end: simulate state-switching Hawkes data, fit it with
// the Gibbs sampler or mean-field inference, and export goodness-of-fit
// tables.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fshawkes/evaluation.hpp"
#include "fshawkes/gibbs.hpp"
#include "fshawkes/io.hpp"
#include "fshawkes/meanfield.hpp"
#include "fshawkes/simulator.hpp"

namespace {

using namespace fshawkes;

struct CommonArgs {
  std::string config_path;
  std::string data_path;
  std::string out_path;
  std::string posterior_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations;
  std::optional<int> threads;
};

RunConfig effective_config(const CommonArgs& args) {
  RunConfig config = load_config(args.config_path);
  if (args.seed) config.seed = *args.seed;
  if (args.iterations) config.iterations = *args.iterations;
  if (args.threads) config.threads = *args.threads;
  return config;
}

void cmd_fixture(const std::string& out_path) {
  save_config(fixture_config(), out_path);
}

void cmd_simulate(const CommonArgs& args, double horizon_override) {
  RunConfig config = effective_config(args);
  if (!config.has_model) {
    throw std::runtime_error(
        "simulate: the config carries no `simulation` section");
  }
  SimConfig sim;
  sim.params = config.model;
  sim.basis = config.basis();
  sim.horizon = horizon_override > 0.0 ? horizon_override : config.horizon;
  sim.initial_state = config.initial_state;
  sim.seed = config.seed;
  const Realization data = simulate(sim);
  save_events(data, args.out_path);
  std::cout << "simulated " << data.events.size() << " events on [0, "
            << sim.horizon << "], " << data.states.switches().size()
            << " state switches\n";
}

void cmd_fit_gibbs(const CommonArgs& args, int burn_in, int thin) {
  const RunConfig config = effective_config(args);
  const Realization data = load_events(args.data_path);
  const BasisSet basis = config.basis();
  GibbsOptions opts;
  opts.iterations = config.iterations;
  opts.burn_in = burn_in >= 0 ? burn_in : config.burn_in;
  opts.thin = thin >= 1 ? thin : config.thin;
  opts.seed = config.seed;
  opts.ll_grid_points = config.ll_grid_points;
  opts.threads = config.threads;
  const GibbsChain chain =
      run_gibbs(data, basis, config.priors(data.num_states), opts);
  save_posterior(chain, config_hash(config), args.out_path);
  std::cout << "kept " << chain.samples.size() << " posterior samples; final "
            << "train log-likelihood " << std::setprecision(10)
            << chain.train_loglik.back() << "\n";
}

void cmd_fit_mf(const CommonArgs& args, int nodes, double tol, int draws) {
  const RunConfig config = effective_config(args);
  const Realization data = load_events(args.data_path);
  const BasisSet basis = config.basis();
  MeanFieldOptions opts;
  opts.max_iterations = config.iterations;
  opts.tol = tol > 0.0 ? tol : config.tol;
  opts.nodes_per_interval =
      nodes >= 1 ? nodes : config.nodes_per_interval;
  opts.threads = config.threads;
  const MeanFieldState state =
      run_meanfield(data, basis, config.priors(data.num_states), opts);
  save_posterior(state, draws, config.seed, config_hash(config),
                 args.out_path);
  std::cout << (state.converged ? "converged" : "stopped") << " after "
            << state.iterations_run << " iterations; train log-likelihood "
            << std::setprecision(10) << state.train_loglik.back() << "\n";
}

ModelParams resolve_params(const CommonArgs& args, const RunConfig& config,
                           bool ground_truth) {
  if (ground_truth) {
    if (!config.has_model) {
      throw std::runtime_error("evaluate: config carries no model");
    }
    return config.model;
  }
  if (args.posterior_path.empty()) {
    throw std::runtime_error("evaluate: need --posterior or --ground-truth");
  }
  return posterior_mean(load_posterior(args.posterior_path));
}

void cmd_evaluate(const CommonArgs& args, bool ground_truth,
                  const std::string& curves_path, int curve_points) {
  const RunConfig config = effective_config(args);
  const Realization data = load_events(args.data_path);
  const BasisSet basis = config.basis();
  const ModelParams params = resolve_params(args, config, ground_truth);
  const FitReport report = log_likelihood(params, basis, data);

  std::ofstream out(args.out_path);
  if (!out) throw std::runtime_error("cannot write " + args.out_path);
  out << std::setprecision(17);
  out << "metric,value\n";
  out << "loglik_point_process," << report.loglik_point_process << "\n";
  out << "loglik_state," << report.loglik_state << "\n";
  out << "loglik_total," << report.loglik_total << "\n";
  out << "per_event_loglik," << report.per_event_loglik << "\n";
  out << "num_events," << data.events.size() << "\n";
  std::cout << "per-event log-likelihood " << std::setprecision(10)
            << report.per_event_loglik << " (point process "
            << report.loglik_point_process << ", state "
            << report.loglik_state << ")\n";

  if (!curves_path.empty()) {
    std::ofstream curves(curves_path);
    if (!curves) throw std::runtime_error("cannot write " + curves_path);
    curves << std::setprecision(17);
    curves << "dim,source,state,lag,value\n";
    std::vector<double> grid(static_cast<std::size_t>(curve_points));
    for (int g = 0; g < curve_points; ++g) {
      grid[static_cast<std::size_t>(g)] =
          basis.support_end() * g / (curve_points - 1);
    }
    for (int i = 1; i <= data.num_dims; ++i) {
      for (int j = 1; j <= data.num_dims; ++j) {
        for (int k = 1; k <= data.num_states; ++k) {
          const auto values = influence_curve(params, basis, i, j, k, grid);
          for (std::size_t g = 0; g < grid.size(); ++g) {
            curves << i << ',' << j << ',' << k << ',' << grid[g] << ','
                   << values[g] << "\n";
          }
        }
      }
    }
  }
}

void cmd_qq(const CommonArgs& args, bool ground_truth) {
  const RunConfig config = effective_config(args);
  const Realization data = load_events(args.data_path);
  const BasisSet basis = config.basis();
  const ModelParams params = resolve_params(args, config, ground_truth);

  std::ofstream out(args.out_path);
  if (!out) throw std::runtime_error("cannot write " + args.out_path);
  out << std::setprecision(17);
  out << "dim,theoretical,empirical\n";
  for (int i = 1; i <= data.num_dims; ++i) {
    const auto taus = rescale(params, basis, data, i);
    for (const auto& [theory, empirical] : qq_data(taus)) {
      out << i << ',' << theory << ',' << empirical << "\n";
    }
    const double d = ks_statistic_uniform([&] {
      std::vector<double> u;
      double prev = 0.0;
      for (double tau : taus) {
        u.push_back(1.0 - std::exp(-(tau - prev)));
        prev = tau;
      }
      return u;
    }());
    std::cout << "dim " << i << ": KS statistic " << std::setprecision(6) << d
              << " (1% critical "
              << ks_critical_value(0.01, taus.size()) << ")\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flexible state-switching Hawkes processes"};
  app.require_subcommand(1);

  CommonArgs args;
  std::uint64_t seed_flag = 0;
  int iter_flag = -1, threads_flag = -1;

  auto add_common = [&](CLI::App* cmd, bool needs_data) {
    cmd->add_option("--config", args.config_path, "run configuration (JSON)")
        ->required();
    if (needs_data) {
      cmd->add_option("--data", args.data_path, "event file (CSV)")->required();
    }
    cmd->add_option("--out", args.out_path, "output path")->required();
    cmd->add_option("--seed", seed_flag, "override the config seed")
        ->each([&](const std::string&) { args.seed = seed_flag; });
    cmd->add_option("--iterations", iter_flag, "override iteration budget")
        ->each([&](const std::string&) { args.iterations = iter_flag; });
    cmd->add_option("--threads", threads_flag, "parallelism cap")
        ->each([&](const std::string&) { args.threads = threads_flag; });
  };

  auto* fixture = app.add_subcommand(
      "fixture", "write the built-in simulation configuration");
  std::string fixture_out;
  fixture->add_option("--out", fixture_out, "config path")->required();

  auto* sim = app.add_subcommand("simulate", "simulate a realization");
  double horizon_override = -1.0;
  add_common(sim, false);
  sim->add_option("--horizon", horizon_override, "override the horizon");

  auto* gibbs = app.add_subcommand("fit-gibbs", "run the Gibbs sampler");
  int burn_in = -2, thin = 0;
  add_common(gibbs, true);
  gibbs->add_option("--burn-in", burn_in, "burn-in iterations");
  gibbs->add_option("--thin", thin, "thinning stride");

  auto* mf = app.add_subcommand("fit-mf", "run mean-field inference");
  int nodes = 0, draws = 100;
  double tol = -1.0;
  add_common(mf, true);
  mf->add_option("--nodes", nodes, "quadrature nodes per state interval");
  mf->add_option("--tol", tol, "relative log-likelihood tolerance");
  mf->add_option("--draws", draws, "posterior draws to store");

  auto* eval = app.add_subcommand("evaluate", "log-likelihood report");
  bool ground_truth = false;
  std::string curves_path;
  int curve_points = 121;
  add_common(eval, true);
  eval->add_option("--posterior", args.posterior_path, "posterior file");
  eval->add_flag("--ground-truth", ground_truth,
                 "evaluate the config's embedded model instead");
  eval->add_option("--curves-out", curves_path,
                   "also export influence-function curves (CSV)");
  eval->add_option("--curve-points", curve_points, "grid size for curves");

  auto* qq = app.add_subcommand("qq", "time-rescaling Q-Q table");
  bool qq_ground_truth = false;
  add_common(qq, true);
  qq->add_option("--posterior", args.posterior_path, "posterior file");
  qq->add_flag("--ground-truth", qq_ground_truth,
               "use the config's embedded model instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (fixture->parsed()) {
      cmd_fixture(fixture_out);
    } else if (sim->parsed()) {
      cmd_simulate(args, horizon_override);
    } else if (gibbs->parsed()) {
      cmd_fit_gibbs(args, burn_in >= -1 ? burn_in : -1, thin);
    } else if (mf->parsed()) {
      cmd_fit_mf(args, nodes, tol, draws);
    } else if (eval->parsed()) {
      cmd_evaluate(args, ground_truth, curves_path, curve_points);
    } else if (qq->parsed()) {
      cmd_qq(args, qq_ground_truth);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
