#include "fshawkes/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fshawkes/linalg.hpp"
#include "fshawkes/math_util.hpp"
#include "fshawkes/polya_gamma.hpp"

namespace fshawkes {

std::vector<Eigen::MatrixXd> transition_counts(const Realization& data) {
  std::vector<Eigen::MatrixXd> counts(
      static_cast<std::size_t>(data.num_dims),
      Eigen::MatrixXd::Zero(data.num_states, data.num_states));
  for (const Event& ev : data.events) {
    const int pre = data.states.state_at(ev.time);
    const int post = data.states.state_after(ev.time);
    counts[static_cast<std::size_t>(ev.dim - 1)](pre - 1, post - 1) += 1.0;
  }
  return counts;
}

GibbsSampler::GibbsSampler(const Realization& data, const BasisSet& basis,
                           Priors priors, GibbsOptions options)
    : data_(data), basis_(basis), priors_(std::move(priors)), opts_(options) {
  data_.validate();
  priors_.validate();
  if (data_.events.empty()) {
    throw std::invalid_argument("GibbsSampler: empty dataset");
  }
  if (priors_.dirichlet_alpha.size() != data_.num_states) {
    throw std::invalid_argument(
        "GibbsSampler: Dirichlet alpha length must equal the state count");
  }
  const int m = data_.num_dims;
  const int k = data_.num_states;

  std::vector<double> event_times;
  event_times.reserve(data_.events.size());
  for (const Event& ev : data_.events) event_times.push_back(ev.time);
  event_features_ = precompute_features(basis_, data_.events, m, event_times);
  event_state_.reserve(data_.events.size());
  events_of_dim_.assign(static_cast<std::size_t>(m), {});
  for (std::size_t n = 0; n < data_.events.size(); ++n) {
    event_state_.push_back(data_.states.state_at(data_.events[n].time));
    events_of_dim_[static_cast<std::size_t>(data_.events[n].dim - 1)].push_back(
        n);
  }
  counts_ = fshawkes::transition_counts(data_);

  // Fixed midpoint grid for the diagnostic log-likelihood.
  long long grid_n = opts_.ll_grid_points;
  if (grid_n <= 0) grid_n = std::llround(100.0 * data_.horizon);
  grid_n = std::max<long long>(grid_n, 10);
  grid_cell_ = data_.horizon / static_cast<double>(grid_n);
  std::vector<double> grid_times(static_cast<std::size_t>(grid_n));
  grid_state_.resize(static_cast<std::size_t>(grid_n));
  for (long long g = 0; g < grid_n; ++g) {
    const double t = (static_cast<double>(g) + 0.5) * grid_cell_;
    grid_times[static_cast<std::size_t>(g)] = t;
    grid_state_[static_cast<std::size_t>(g)] = data_.states.state_at(t);
  }
  grid_features_ = precompute_features(basis_, data_.events, m, grid_times);

  // Independent stream per dimension.
  rngs_.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(opts_.seed),
                      static_cast<std::uint32_t>(opts_.seed >> 32),
                      static_cast<std::uint32_t>(i + 1)};
    rngs_.emplace_back(seq);
  }

  // Initial state: moment-matched base activations, empirical intensity
  // bounds, posterior-mean transitions. Marks and latent processes are
  // filled by the first sweep. Starting the base activation at the logit of
  // the per-state empirical rate removes most of the equilibration
  // transient that a zero-weight start produces.
  std::vector<double> state_duration(static_cast<std::size_t>(k), 0.0);
  {
    double prev_t = 0.0;
    int cur = data_.states.initial_state();
    for (const auto& [t, s] : data_.states.switches()) {
      state_duration[static_cast<std::size_t>(cur - 1)] += t - prev_t;
      prev_t = t;
      cur = s;
    }
    state_duration[static_cast<std::size_t>(cur - 1)] +=
        data_.horizon - prev_t;
  }
  const int d = m * basis_.size() + 1;
  state_.params.lambda_bar.resize(m);
  state_.params.transition.resize(static_cast<std::size_t>(m));
  state_.params.weights.assign(
      static_cast<std::size_t>(m),
      std::vector<Eigen::VectorXd>(static_cast<std::size_t>(k),
                                   Eigen::VectorXd::Zero(d)));
  for (int i = 1; i <= m; ++i) {
    const double n_i = static_cast<double>(data_.count_of_dim(i));
    const double lambda0 = std::max(2.0 * n_i / data_.horizon, 1e-3);
    state_.params.lambda_bar[i - 1] = lambda0;
    Eigen::VectorXd per_state = Eigen::VectorXd::Zero(k);
    for (const std::size_t g : events_of_dim_[static_cast<std::size_t>(i - 1)]) {
      per_state[event_state_[g] - 1] += 1.0;
    }
    for (int s = 0; s < k; ++s) {
      const double duration = state_duration[static_cast<std::size_t>(s)];
      if (duration <= 0.0) continue;
      const double frac =
          std::clamp(per_state[s] / duration / lambda0, 0.05, 0.95);
      state_.params.weights[static_cast<std::size_t>(i - 1)]
                           [static_cast<std::size_t>(s)][0] =
          std::log(frac / (1.0 - frac));
    }
    Eigen::MatrixXd rows(k, k);
    for (int r = 0; r < k; ++r) {
      const Eigen::VectorXd conc =
          counts_[static_cast<std::size_t>(i - 1)].row(r).transpose() +
          priors_.dirichlet_alpha;
      rows.row(r) = (conc / conc.sum()).transpose();
    }
    state_.params.transition[static_cast<std::size_t>(i - 1)] = rows;
  }
  state_.pg_marks.assign(static_cast<std::size_t>(m), {});
  state_.latents.assign(static_cast<std::size_t>(m), {});
  latent_features_.assign(static_cast<std::size_t>(m), Eigen::MatrixXd(d, 0));
  for (int i = 1; i <= m; ++i) {
    state_.pg_marks[static_cast<std::size_t>(i - 1)].assign(
        events_of_dim_[static_cast<std::size_t>(i - 1)].size(), 0.25);
  }
}

double GibbsSampler::activation_at_event(std::size_t global_index,
                                         int dim) const {
  const Eigen::VectorXd& w =
      state_.params.weights[static_cast<std::size_t>(dim - 1)]
                           [static_cast<std::size_t>(
                               event_state_[global_index] - 1)];
  return w.dot(event_features_.col(static_cast<Eigen::Index>(global_index)));
}

void GibbsSampler::sample_pg_marks(int dim) {
  auto& rng = rngs_[static_cast<std::size_t>(dim - 1)];
  auto& marks = state_.pg_marks[static_cast<std::size_t>(dim - 1)];
  const auto& idx = events_of_dim_[static_cast<std::size_t>(dim - 1)];
  for (std::size_t j = 0; j < idx.size(); ++j) {
    marks[j] = pg_sample(rng, activation_at_event(idx[j], dim));
  }
}

void GibbsSampler::sample_latent_process(int dim) {
  auto& rng = rngs_[static_cast<std::size_t>(dim - 1)];
  const double lambda = state_.params.lambda_bar[dim - 1];
  const double horizon = data_.horizon;

  std::poisson_distribution<long long> pois(lambda * horizon);
  const long long n_cand = pois(rng);
  std::vector<double> times(static_cast<std::size_t>(n_cand));
  std::uniform_real_distribution<double> unif_t(0.0, horizon);
  for (auto& t : times) t = unif_t(rng);
  std::sort(times.begin(), times.end());

  const Eigen::MatrixXd cand_features =
      precompute_features(basis_, data_.events, data_.num_dims, times);

  auto& latents = state_.latents[static_cast<std::size_t>(dim - 1)];
  latents.clear();
  std::vector<Eigen::Index> kept;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t c = 0; c < times.size(); ++c) {
    const int st = data_.states.state_at(times[c]);
    const Eigen::VectorXd& w =
        state_.params.weights[static_cast<std::size_t>(dim - 1)]
                             [static_cast<std::size_t>(st - 1)];
    const double h = w.dot(cand_features.col(static_cast<Eigen::Index>(c)));
    if (unif(rng) < sigmoid(-h)) {
      latents.push_back(LatentPoint{times[c], pg_sample(rng, h), st});
      kept.push_back(static_cast<Eigen::Index>(c));
    }
  }
  Eigen::MatrixXd& feats = latent_features_[static_cast<std::size_t>(dim - 1)];
  feats.resize(cand_features.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    feats.col(static_cast<Eigen::Index>(j)) = cand_features.col(kept[j]);
  }
}

void GibbsSampler::sample_transition(int dim) {
  auto& rng = rngs_[static_cast<std::size_t>(dim - 1)];
  const Eigen::MatrixXd& counts = counts_[static_cast<std::size_t>(dim - 1)];
  Eigen::MatrixXd& phi =
      state_.params.transition[static_cast<std::size_t>(dim - 1)];
  for (int r = 0; r < counts.rows(); ++r) {
    const Eigen::VectorXd conc =
        counts.row(r).transpose() + priors_.dirichlet_alpha;
    phi.row(r) = dirichlet_draw(rng, conc).transpose();
  }
}

double GibbsSampler::sample_lambda_bar(int dim) {
  auto& rng = rngs_[static_cast<std::size_t>(dim - 1)];
  const double n_i =
      static_cast<double>(events_of_dim_[static_cast<std::size_t>(dim - 1)].size());
  const double r_i =
      static_cast<double>(state_.latents[static_cast<std::size_t>(dim - 1)].size());
  const double shape = n_i + r_i;
  if (shape < 1.0) {
    throw std::runtime_error(
        "sample_lambda_bar: N_i + R_i = 0 leaves an improper posterior");
  }
  std::gamma_distribution<double> gamma(shape, 1.0 / data_.horizon);
  const double draw = gamma(rng);
  state_.params.lambda_bar[dim - 1] = draw;
  return draw;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> GibbsSampler::weight_conditional(
    const Eigen::MatrixXd& event_features, const Eigen::VectorXd& event_marks,
    const Eigen::MatrixXd& latent_features,
    const Eigen::VectorXd& latent_marks, double prior_variance) {
  const Eigen::Index d = event_features.rows() > 0 ? event_features.rows()
                                                   : latent_features.rows();
  Eigen::MatrixXd precision =
      Eigen::MatrixXd::Identity(d, d) / prior_variance;
  Eigen::VectorXd linear = Eigen::VectorXd::Zero(d);
  if (event_features.cols() > 0) {
    precision.noalias() += event_features *
                           event_marks.asDiagonal() *
                           event_features.transpose();
    linear.noalias() += 0.5 * event_features.rowwise().sum();
  }
  if (latent_features.cols() > 0) {
    precision.noalias() += latent_features *
                           latent_marks.asDiagonal() *
                           latent_features.transpose();
    linear.noalias() -= 0.5 * latent_features.rowwise().sum();
  }
  Eigen::MatrixXd jittered = precision;
  const auto llt = cholesky_with_jitter(jittered);
  Eigen::VectorXd mean = llt.solve(linear);
  return {std::move(mean), std::move(jittered)};
}

void GibbsSampler::sample_weights(int dim) {
  auto& rng = rngs_[static_cast<std::size_t>(dim - 1)];
  const auto& idx = events_of_dim_[static_cast<std::size_t>(dim - 1)];
  const auto& marks = state_.pg_marks[static_cast<std::size_t>(dim - 1)];
  const auto& latents = state_.latents[static_cast<std::size_t>(dim - 1)];
  const Eigen::MatrixXd& lat_feats =
      latent_features_[static_cast<std::size_t>(dim - 1)];
  const Eigen::Index d = event_features_.rows();

  for (int k = 1; k <= data_.num_states; ++k) {
    std::vector<Eigen::Index> ev_in_state;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (event_state_[idx[j]] == k) {
        ev_in_state.push_back(static_cast<Eigen::Index>(j));
      }
    }
    std::vector<Eigen::Index> lat_in_state;
    for (std::size_t r = 0; r < latents.size(); ++r) {
      if (latents[r].state == k) {
        lat_in_state.push_back(static_cast<Eigen::Index>(r));
      }
    }
    Eigen::MatrixXd fe(d, static_cast<Eigen::Index>(ev_in_state.size()));
    Eigen::VectorXd me(static_cast<Eigen::Index>(ev_in_state.size()));
    for (std::size_t j = 0; j < ev_in_state.size(); ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      fe.col(col) = event_features_.col(
          static_cast<Eigen::Index>(idx[static_cast<std::size_t>(ev_in_state[j])]));
      me[col] = marks[static_cast<std::size_t>(ev_in_state[j])];
    }
    Eigen::MatrixXd fl(d, static_cast<Eigen::Index>(lat_in_state.size()));
    Eigen::VectorXd ml(static_cast<Eigen::Index>(lat_in_state.size()));
    for (std::size_t r = 0; r < lat_in_state.size(); ++r) {
      const auto col = static_cast<Eigen::Index>(r);
      fl.col(col) = lat_feats.col(lat_in_state[r]);
      ml[col] = latents[static_cast<std::size_t>(lat_in_state[r])].mark;
    }
    auto [mean, precision] =
        weight_conditional(fe, me, fl, ml, priors_.weight_variance);
    Eigen::MatrixXd prec = precision;  // already jittered if needed
    const auto llt = cholesky_with_jitter(prec);
    state_.params.weights[static_cast<std::size_t>(dim - 1)]
                         [static_cast<std::size_t>(k - 1)] =
        gaussian_from_precision(rng, mean, llt);
  }
}

void GibbsSampler::step() {
  parallel_for(data_.num_dims, opts_.threads, [this](int i0) {
    const int dim = i0 + 1;
    sample_pg_marks(dim);
    sample_latent_process(dim);
    sample_transition(dim);
    sample_lambda_bar(dim);
    sample_weights(dim);
  });
}

double GibbsSampler::train_loglik() const {
  const ModelParams& p = state_.params;
  double ll = 0.0;
  // Event terms.
  for (std::size_t n = 0; n < data_.events.size(); ++n) {
    const Event& ev = data_.events[n];
    const double h = activation_at_event(n, ev.dim);
    ll += std::log(p.lambda_bar[ev.dim - 1]) + log_sigmoid(h);
  }
  // Compensator on the fixed grid.
  for (int i = 1; i <= data_.num_dims; ++i) {
    double acc = 0.0;
    for (Eigen::Index g = 0; g < grid_features_.cols(); ++g) {
      const Eigen::VectorXd& w =
          p.weights[static_cast<std::size_t>(i - 1)]
                   [static_cast<std::size_t>(
                       grid_state_[static_cast<std::size_t>(g)] - 1)];
      acc += sigmoid(w.dot(grid_features_.col(g)));
    }
    ll -= p.lambda_bar[i - 1] * grid_cell_ * acc;
  }
  // State-transition terms via the fixed counts.
  for (int i = 0; i < data_.num_dims; ++i) {
    const Eigen::MatrixXd& counts = counts_[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd& phi = p.transition[static_cast<std::size_t>(i)];
    for (int r = 0; r < counts.rows(); ++r) {
      for (int c = 0; c < counts.cols(); ++c) {
        if (counts(r, c) > 0.0) ll += counts(r, c) * std::log(phi(r, c));
      }
    }
  }
  return ll;
}

GibbsChain GibbsSampler::run() {
  const int burn_in =
      opts_.burn_in >= 0 ? opts_.burn_in : opts_.iterations / 2;
  if (opts_.iterations <= burn_in) {
    throw std::invalid_argument("run_gibbs: iterations must exceed burn-in");
  }
  if (opts_.thin < 1) {
    throw std::invalid_argument("run_gibbs: thin must be >= 1");
  }
  GibbsChain chain;
  chain.train_loglik.reserve(static_cast<std::size_t>(opts_.iterations));
  for (int it = 0; it < opts_.iterations; ++it) {
    step();
    chain.train_loglik.push_back(train_loglik());
    if (it >= burn_in && (it - burn_in) % opts_.thin == 0) {
      chain.samples.push_back(state_.params);
    }
  }
  return chain;
}

GibbsChain run_gibbs(const Realization& data, const BasisSet& basis,
                     const Priors& priors, const GibbsOptions& options) {
  GibbsSampler sampler(data, basis, priors, options);
  return sampler.run();
}

}  // namespace fshawkes
