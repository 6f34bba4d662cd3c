#include <doctest.h>

#include <cmath>
#include <set>

#include "fshawkes/math_util.hpp"
#include "fshawkes/simulator.hpp"
#include "test_util.hpp"

using namespace fshawkes;

namespace {

// One-state, zero-influence configuration: a homogeneous Poisson process
// with rate lambda_bar * sigmoid(mu).
SimConfig constant_rate_config(double lambda_bar, double mu, double horizon,
                               std::uint64_t seed) {
  SimConfig cfg;
  cfg.basis = BasisSet({BasisFunction{50.0, 50.0, 6.0, 0.0}}, 6.0);
  cfg.horizon = horizon;
  cfg.initial_state = 1;
  cfg.seed = seed;
  ModelParams p;
  p.lambda_bar = Eigen::VectorXd::Constant(1, lambda_bar);
  p.transition = {Eigen::MatrixXd::Ones(1, 1)};
  Eigen::VectorXd w(2);
  w << mu, 0.0;
  p.weights = {{w}};
  cfg.params = p;
  return cfg;
}

}  // namespace

TEST_CASE("zero weights reduce to a homogeneous Poisson process") {
  // lambda_bar = 2, sigma(0) = 1/2, T = 1000 -> mean count 1000.
  const SimConfig cfg = constant_rate_config(2.0, 0.0, 1000.0, 99);
  const Realization data = simulate(cfg);
  const double n = static_cast<double>(data.events.size());
  CHECK(std::fabs(n - 1000.0) < 3.0 * std::sqrt(1000.0));
  CHECK(data.states.switches().empty());  // K = 1
}

TEST_CASE("thinning calibration at constant activation") {
  // Empirical rate over repeated runs matches lambda_bar * sigmoid(mu).
  for (double mu : {-1.0, 0.7}) {
    double total = 0.0;
    const int runs = 20;
    const double horizon = 500.0;
    for (int r = 0; r < runs; ++r) {
      const SimConfig cfg = constant_rate_config(
          2.0, mu, horizon, 1000 + static_cast<std::uint64_t>(r));
      total += static_cast<double>(simulate(cfg).events.size());
    }
    const double expect = 2.0 * sigmoid(mu) * horizon * runs;
    CHECK(std::fabs(total - expect) < 4.0 * std::sqrt(expect));
  }
}

TEST_CASE("identity transitions never switch state") {
  SimConfig cfg = builtin_sim_fixture();
  cfg.horizon = 200.0;
  cfg.params.transition = {Eigen::MatrixXd::Identity(2, 2),
                           Eigen::MatrixXd::Identity(2, 2)};
  const Realization data = simulate(cfg);
  CHECK(data.states.switches().empty());
}

TEST_CASE("switch times coincide with event times") {
  SimConfig cfg = builtin_sim_fixture();
  cfg.horizon = 300.0;
  const Realization data = simulate(cfg);
  std::set<double> times;
  for (const Event& ev : data.events) times.insert(ev.time);
  for (const auto& [t, s] : data.states.switches()) {
    CHECK(times.count(t) == 1);
  }
  CHECK(!data.states.switches().empty());
}

TEST_CASE("seed determinism") {
  SimConfig cfg = builtin_sim_fixture();
  cfg.horizon = 150.0;
  const Realization a = simulate(cfg);
  const Realization b = simulate(cfg);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t n = 0; n < a.events.size(); ++n) {
    CHECK(a.events[n].time == b.events[n].time);
    CHECK(a.events[n].dim == b.events[n].dim);
  }
  REQUIRE(a.states.switches().size() == b.states.switches().size());

  cfg.seed = cfg.seed + 1;
  const Realization c = simulate(cfg);
  CHECK(a.events.size() != c.events.size());
}

TEST_CASE("built-in configuration matches its published parameter set") {
  const SimConfig cfg = builtin_sim_fixture();
  CHECK(cfg.params.lambda_bar[0] == 2.0);
  CHECK(cfg.params.lambda_bar[1] == 2.0);
  CHECK(cfg.params.transition[0](0, 0) == 0.99);
  CHECK(cfg.params.transition[1](1, 0) == 0.01);
  // Influence mixtures: dim 1 <- dim 2 in state 1 is -0.5 f1 - 0.25 f2.
  CHECK(cfg.params.weights[0][0][feature_index(2, 1, 2)] == -0.5);
  CHECK(cfg.params.weights[0][0][feature_index(2, 2, 2)] == -0.25);
  // Base activations per state.
  CHECK(cfg.params.weights[0][0][0] == 1.0);
  CHECK(cfg.params.weights[1][0][0] == 1.0);
  CHECK(cfg.params.weights[0][1][0] == 0.0);
  CHECK(cfg.params.weights[1][1][0] == 0.0);
  // Bases: Beta(50, 50) scaled to 6, shifts -2 and 0.
  CHECK(cfg.basis.functions()[0].shift == -2.0);
  CHECK(cfg.basis.functions()[1].shift == 0.0);
  CHECK(cfg.basis.support_end() == 6.0);
  CHECK(cfg.horizon == 2000.0);
}

TEST_CASE("events carry the pre-transition state label") {
  SimConfig cfg = builtin_sim_fixture();
  cfg.horizon = 400.0;
  const Realization data = simulate(cfg);
  // At every switch time the path still reports the old state (left
  // continuity); the right limit is the recorded new state.
  for (const auto& [t, new_state] : data.states.switches()) {
    CHECK(data.states.state_at(t) != new_state);
    CHECK(data.states.state_after(t) == new_state);
  }
}

TEST_CASE("invalid configurations are rejected") {
  SimConfig cfg = builtin_sim_fixture();
  SUBCASE("non-stochastic transition row") {
    cfg.params.transition[0](0, 0) = 0.5;
    CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);
  }
  SUBCASE("non-positive intensity bound") {
    cfg.params.lambda_bar[0] = -1.0;
    CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);
  }
  SUBCASE("initial state out of range") {
    cfg.initial_state = 3;
    CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);
  }
}
