#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "fshawkes/evaluation.hpp"
#include "fshawkes/io.hpp"
#include "fshawkes/meanfield.hpp"
#include "fshawkes/simulator.hpp"

using namespace fshawkes;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("fshawkes_test_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_CASE("event files round-trip exactly") {
  TempDir tmp;
  SimConfig cfg = builtin_sim_fixture();
  cfg.horizon = 120.0;
  const Realization data = simulate(cfg);
  REQUIRE(!data.states.switches().empty());

  const std::string path = tmp.file("events.csv");
  save_events(data, path);
  const Realization back = load_events(path);

  CHECK(back.num_dims == data.num_dims);
  CHECK(back.num_states == data.num_states);
  CHECK(back.horizon == data.horizon);
  REQUIRE(back.events.size() == data.events.size());
  for (std::size_t n = 0; n < data.events.size(); ++n) {
    CHECK(back.events[n].time == data.events[n].time);
    CHECK(back.events[n].dim == data.events[n].dim);
  }
  REQUIRE(back.states.switches().size() == data.states.switches().size());
  for (std::size_t s = 0; s < data.states.switches().size(); ++s) {
    CHECK(back.states.switches()[s].first ==
          data.states.switches()[s].first);
    CHECK(back.states.switches()[s].second ==
          data.states.switches()[s].second);
  }
  CHECK(back.states.initial_state() == data.states.initial_state());
}

TEST_CASE("event file edge cases") {
  TempDir tmp;

  SUBCASE("empty event list with a terminal record is valid") {
    const std::string path = tmp.file("empty.csv");
    std::ofstream(path) << "time,dim,state\n100,0,2\n";
    const Realization d = load_events(path);
    CHECK(d.events.empty());
    CHECK(d.horizon == 100.0);
    CHECK(d.states.state_at(50.0) == 2);
  }
  SUBCASE("a one-dim two-state file in the external-data layout") {
    // Same shape as a small/large-magnitude event feed: 2100 training
    // events, one dimension, two states.
    const std::string path = tmp.file("sce_like.csv");
    {
      std::ofstream out(path);
      out << "time,dim,state\n";
      std::mt19937_64 rng(15);
      std::exponential_distribution<double> gap(2.1);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      double t = 0.0;
      int state = 1;
      out.precision(17);
      for (int n = 0; n < 2100; ++n) {
        t += gap(rng);
        out << t << ",1," << state << "\n";
        if (unif(rng) < 0.15) state = 3 - state;
      }
      out << t + 1.0 << ",0," << state << "\n";
    }
    const Realization d = load_events(path);
    CHECK(d.num_dims == 1);
    CHECK(d.num_states == 2);
    CHECK(d.events.size() == 2100);
    CHECK_NOTHROW(d.validate());
  }
  SUBCASE("non-monotone times fail with the row number") {
    const std::string path = tmp.file("bad.csv");
    std::ofstream(path) << "time,dim,state\n2,1,1\n1,1,1\n10,0,1\n";
    CHECK_THROWS_WITH_AS(load_events(path), doctest::Contains(":3:"),
                         std::runtime_error);
  }
  SUBCASE("missing terminal record fails") {
    const std::string path = tmp.file("noterm.csv");
    std::ofstream(path) << "time,dim,state\n2,1,1\n";
    CHECK_THROWS_AS(load_events(path), std::runtime_error);
  }
  SUBCASE("bad state index fails") {
    const std::string path = tmp.file("badstate.csv");
    std::ofstream(path) << "time,dim,state\n2,1,0\n10,0,1\n";
    CHECK_THROWS_AS(load_events(path), std::runtime_error);
  }
  SUBCASE("conflicting labels at a tied time fail") {
    const std::string path = tmp.file("tie.csv");
    std::ofstream(path) << "time,dim,state\n2,1,1\n2,2,2\n10,0,2\n";
    CHECK_THROWS_AS(load_events(path), std::runtime_error);
  }
}

TEST_CASE("config round-trip and hashing") {
  TempDir tmp;
  RunConfig config = fixture_config();
  const std::string path = tmp.file("config.json");
  save_config(config, path);
  const RunConfig back = load_config(path);

  CHECK(back.basis_functions.size() == config.basis_functions.size());
  CHECK(back.basis_functions[0].shift == -2.0);
  CHECK(back.support_end == 6.0);
  CHECK(back.sigma2 == 1.0);
  CHECK(back.iterations == 200);
  CHECK(back.has_model);
  CHECK(back.model.lambda_bar[1] == 2.0);
  CHECK(back.model.weights[1][0][0] == 1.0);
  CHECK(back.horizon == 2000.0);
  CHECK(config_hash(back) == config_hash(config));

  SUBCASE("semantic changes move the hash, thread caps do not") {
    RunConfig changed = config;
    changed.threads = 16;
    CHECK(config_hash(changed) == config_hash(config));
    changed.seed = config.seed + 1;
    CHECK(config_hash(changed) != config_hash(config));
    RunConfig changed2 = config;
    changed2.basis_functions[0].shift = -1.5;
    CHECK(config_hash(changed2) != config_hash(config));
    RunConfig changed3 = config;
    changed3.nodes_per_interval = 50;
    CHECK(config_hash(changed3) != config_hash(config));
  }
}

TEST_CASE("posterior files round-trip") {
  TempDir tmp;
  SimConfig cfg = builtin_sim_fixture();
  cfg.horizon = 100.0;
  const Realization data = simulate(cfg);

  SUBCASE("gibbs chains") {
    GibbsOptions opts;
    opts.iterations = 8;
    opts.burn_in = 4;
    opts.seed = 3;
    opts.ll_grid_points = 10000;
    const GibbsChain chain =
        run_gibbs(data, cfg.basis, Priors::uniform(2, 1.0), opts);
    const std::string path = tmp.file("gibbs.txt");
    save_posterior(chain, 0xabcdef, path);
    const PosteriorFile pf = load_posterior(path);

    CHECK(pf.kind == "gibbs");
    CHECK(pf.config_hash == 0xabcdef);
    CHECK(!pf.has_factors);
    REQUIRE(pf.samples.size() == chain.samples.size());
    for (std::size_t s = 0; s < pf.samples.size(); ++s) {
      CHECK((pf.samples[s].lambda_bar - chain.samples[s].lambda_bar)
                .cwiseAbs()
                .maxCoeff() < 1e-12);
      CHECK((pf.samples[s].weights[1][1] - chain.samples[s].weights[1][1])
                .cwiseAbs()
                .maxCoeff() < 1e-12);
      CHECK((pf.samples[s].transition[0] - chain.samples[s].transition[0])
                .cwiseAbs()
                .maxCoeff() < 1e-12);
    }

    // Reloaded posterior mean re-evaluates to the identical likelihood.
    const ModelParams mean_direct = [&] {
      PosteriorFile direct;
      direct.samples = chain.samples;
      return posterior_mean(direct);
    }();
    const ModelParams mean_loaded = posterior_mean(pf);
    const FitReport a = log_likelihood(mean_direct, cfg.basis, data);
    const FitReport b = log_likelihood(mean_loaded, cfg.basis, data);
    CHECK(a.loglik_total == doctest::Approx(b.loglik_total).epsilon(1e-12));
  }

  SUBCASE("mean-field factors and draws") {
    MeanFieldOptions opts;
    opts.max_iterations = 25;
    opts.nodes_per_interval = 10;
    const MeanFieldState state =
        run_meanfield(data, cfg.basis, Priors::uniform(2, 1.0), opts);
    const std::string path = tmp.file("mf.txt");
    save_posterior(state, 50, 9, 0x1234, path);
    const PosteriorFile pf = load_posterior(path);

    CHECK(pf.kind == "meanfield");
    CHECK(pf.has_factors);
    CHECK(pf.samples.size() == 50);
    CHECK((pf.factors.gamma_shape - state.gamma_shape).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK(pf.factors.gamma_rate == state.gamma_rate);
    for (int i = 0; i < 2; ++i) {
      for (int k = 0; k < 2; ++k) {
        const auto iu = static_cast<std::size_t>(i);
        const auto ku = static_cast<std::size_t>(k);
        CHECK((pf.factors.weight_mean[iu][ku] - state.weight_mean[iu][ku])
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
        CHECK((pf.factors.weight_cov[iu][ku] - state.weight_cov[iu][ku])
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
      }
    }
    // Factor-based posterior mean survives the round trip in the
    // evaluation.
    const FitReport a =
        log_likelihood(posterior_mean_params(state), cfg.basis, data);
    const FitReport b = log_likelihood(posterior_mean(pf), cfg.basis, data);
    CHECK(a.loglik_total == doctest::Approx(b.loglik_total).epsilon(1e-12));
  }
}
