#include "fshawkes/simulator.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "fshawkes/math_util.hpp"

namespace fshawkes {

namespace {

// Pick an index with probability proportional to the (positive) entries of
// the vector expression `row`, consuming one uniform draw.
template <typename Derived>
int pick_proportional(std::mt19937_64& rng,
                      const Eigen::MatrixBase<Derived>& row, double total) {
  const double u =
      std::uniform_real_distribution<double>(0.0, total)(rng);
  double acc = 0.0;
  const int n = static_cast<int>(row.size());
  for (int j = 0; j < n; ++j) {
    acc += row(j);
    if (u < acc) return j;
  }
  return n - 1;
}

}  // namespace

Realization simulate(const SimConfig& config) {
  config.params.validate();
  const ModelParams& p = config.params;
  const int m = p.num_dims();
  const int k = p.num_states();
  const int nb = config.basis.size();
  if (p.feature_dim() != m * nb + 1) {
    throw std::invalid_argument(
        "simulate: weight length does not match the basis set");
  }
  if (config.initial_state < 0 || config.initial_state > k) {
    throw std::invalid_argument("simulate: initial state out of range");
  }
  if (!(config.horizon > 0.0)) {
    throw std::invalid_argument("simulate: horizon must be positive");
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  int state = config.initial_state;
  if (state == 0) {
    state = 1 + static_cast<int>(std::uniform_int_distribution<int>(0, k - 1)(rng));
  }
  const int initial_state = state;

  const double total_rate = p.lambda_bar.sum();
  const double t_f = config.basis.support_end();

  std::vector<Event> events;
  std::vector<std::pair<double, int>> switches;
  std::size_t window_lo = 0;

  double t = 0.0;
  while (true) {
    t += std::exponential_distribution<double>(total_rate)(rng);
    if (t > config.horizon) break;
    const int dim = 1 + pick_proportional(rng, p.lambda_bar, total_rate);

    // Activation from the strictly-past events within the influence window.
    while (window_lo < events.size() && events[window_lo].time < t - t_f) {
      ++window_lo;
    }
    const Eigen::VectorXd& w = p.weights[static_cast<std::size_t>(dim - 1)]
                                        [static_cast<std::size_t>(state - 1)];
    double h = w[0];
    for (std::size_t n = window_lo; n < events.size(); ++n) {
      const double lag = t - events[n].time;
      if (!(lag > 0.0)) continue;
      for (int b = 1; b <= nb; ++b) {
        h += w[feature_index(events[n].dim, b, nb)] * config.basis.eval(b, lag);
      }
    }

    if (unif(rng) >= sigmoid(h)) continue;  // thinned; no state transition

    events.push_back(Event{t, dim});
    const int next = 1 + pick_proportional(
        rng, p.transition[static_cast<std::size_t>(dim - 1)].row(state - 1),
        1.0);
    if (next != state) {
      switches.emplace_back(t, next);
      state = next;
    }
  }

  Realization out;
  out.events = std::move(events);
  out.states = StatePath(initial_state, std::move(switches), config.horizon);
  out.num_dims = m;
  out.num_states = k;
  out.horizon = config.horizon;
  out.validate();
  return out;
}

SimConfig builtin_sim_fixture() {
  constexpr int m = 2, k = 2, nb = 2;
  SimConfig cfg;
  cfg.basis = BasisSet({BasisFunction{50.0, 50.0, 6.0, -2.0},
                        BasisFunction{50.0, 50.0, 6.0, 0.0}},
                       6.0);
  cfg.horizon = 2000.0;
  cfg.initial_state = 1;
  cfg.seed = 5;

  ModelParams p;
  p.lambda_bar = Eigen::Vector2d(2.0, 2.0);
  Eigen::MatrixXd phi(k, k);
  phi << 0.99, 0.01, 0.01, 0.99;
  p.transition = {phi, phi};

  // Mixture weights per (target dim, state): rows below are
  // (source dim j, basis b) pairs in the [mu, w_11, w_12, w_21, w_22] layout.
  const auto wvec = [](double mu, double w11, double w12, double w21,
                       double w22) {
    Eigen::VectorXd w(1 + m * nb);
    w << mu, w11, w12, w21, w22;
    return w;
  };
  p.weights = {
      {wvec(1.0, 1.0, 0.5, -0.5, -0.25),    // dim 1, state 1
       wvec(0.0, 0.5, 1.0, -0.25, -0.5)},   // dim 1, state 2
      {wvec(1.0, -0.25, -0.5, 0.5, 1.0),    // dim 2, state 1
       wvec(0.0, -0.5, -0.25, 1.0, 0.5)},   // dim 2, state 2
  };
  cfg.params = std::move(p);
  return cfg;
}

}  // namespace fshawkes
