#include "fshawkes/meanfield.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "fshawkes/gibbs.hpp"  // transition_counts
#include "fshawkes/linalg.hpp"
#include "fshawkes/math_util.hpp"
#include "fshawkes/polya_gamma.hpp"

namespace fshawkes {

namespace {

std::atomic<bool> warned_negative_variance{false};

void warn_negative_variance() {
  if (!warned_negative_variance.exchange(true)) {
    std::cerr << "warning: negative activation variance clamped to zero\n";
  }
}

// Column-wise quadratic forms F_c' cov F_c, clamped at zero.
Eigen::VectorXd column_quadforms(const Eigen::MatrixXd& features,
                                 const Eigen::MatrixXd& cov) {
  if (features.cols() == 0) return Eigen::VectorXd(0);
  const Eigen::MatrixXd tmp = cov.selfadjointView<Eigen::Lower>() * features;
  Eigen::VectorXd out =
      (features.array() * tmp.array()).colwise().sum().transpose();
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    if (out[j] < 0.0) {
      warn_negative_variance();
      out[j] = 0.0;
    }
  }
  return out;
}

}  // namespace

std::pair<double, double> activation_moments(const Eigen::VectorXd& features,
                                             const Eigen::VectorXd& mean,
                                             const Eigen::MatrixXd& cov) {
  const double hbar = features.dot(mean);
  double var = features.dot(cov * features);
  if (var < 0.0) {
    warn_negative_variance();
    var = 0.0;
  }
  return {hbar, std::sqrt(hbar * hbar + var)};
}

double gamma_log_mean_exp(double shape, double rate) {
  return std::exp(digamma(shape) - std::log(rate));
}

double marginal_latent_rate(double lambda1, double hbar, double htilde) {
  return lambda1 * std::exp(-0.5 * hbar - log_two_cosh(0.5 * htilde));
}

double integrate_latent_rate(double lambda1, const Eigen::VectorXd& hbar,
                             const Eigen::VectorXd& htilde,
                             const Eigen::VectorXd& weights) {
  double total = 0.0;
  for (Eigen::Index q = 0; q < weights.size(); ++q) {
    total += weights[q] * marginal_latent_rate(lambda1, hbar[q], htilde[q]);
  }
  return total;
}

std::vector<Eigen::MatrixXd> transition_posterior(
    const Realization& data, const Eigen::VectorXd& alpha) {
  if (alpha.size() != data.num_states || alpha.minCoeff() <= 0.0) {
    throw std::invalid_argument(
        "transition_posterior: alpha must be positive with one entry per "
        "state");
  }
  std::vector<Eigen::MatrixXd> out = transition_counts(data);
  for (Eigen::MatrixXd& counts : out) {
    counts.rowwise() += alpha.transpose();
  }
  return out;
}

MeanFieldEngine::MeanFieldEngine(const Realization& data,
                                 const BasisSet& basis, Priors priors,
                                 MeanFieldOptions options)
    : data_(data),
      basis_(basis),
      priors_(std::move(priors)),
      opts_(options) {
  data_.validate();
  priors_.validate();
  if (priors_.dirichlet_alpha.size() != data_.num_states) {
    throw std::invalid_argument(
        "MeanFieldEngine: Dirichlet alpha length must equal the state count");
  }
  if (opts_.nodes_per_interval < 1 || opts_.max_iterations < 1) {
    throw std::invalid_argument("MeanFieldEngine: invalid budgets");
  }
  const int m = data_.num_dims;
  const int k = data_.num_states;
  const int d = m * basis_.size() + 1;

  quad_ = PiecewiseQuadrature::build(data_, opts_.nodes_per_interval);
  const Eigen::MatrixXd node_features = precompute_features(
      basis_, data_.events, m,
      std::span<const double>(quad_.nodes.data(),
                              static_cast<std::size_t>(quad_.nodes.size())));

  // Group nodes by state once; every per-dimension update reuses the blocks.
  std::vector<std::vector<Eigen::Index>> nodes_in_state(
      static_cast<std::size_t>(k));
  for (Eigen::Index q = 0; q < quad_.nodes.size(); ++q) {
    nodes_in_state[static_cast<std::size_t>(
                       quad_.node_state[static_cast<std::size_t>(q)] - 1)]
        .push_back(q);
  }
  node_features_by_state_.resize(static_cast<std::size_t>(k));
  node_weights_by_state_.resize(static_cast<std::size_t>(k));
  for (int s = 0; s < k; ++s) {
    const auto& idx = nodes_in_state[static_cast<std::size_t>(s)];
    Eigen::MatrixXd f(d, static_cast<Eigen::Index>(idx.size()));
    Eigen::VectorXd w(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
      f.col(static_cast<Eigen::Index>(j)) = node_features.col(idx[j]);
      w[static_cast<Eigen::Index>(j)] = quad_.weights[idx[j]];
    }
    node_features_by_state_[static_cast<std::size_t>(s)] = std::move(f);
    node_weights_by_state_[static_cast<std::size_t>(s)] = std::move(w);
  }

  // Event features grouped by (dimension, state).
  std::vector<double> event_times;
  event_times.reserve(data_.events.size());
  for (const Event& ev : data_.events) event_times.push_back(ev.time);
  const Eigen::MatrixXd event_features =
      precompute_features(basis_, data_.events, m, event_times);
  std::vector<std::vector<std::vector<Eigen::Index>>> ev_in(
      static_cast<std::size_t>(m),
      std::vector<std::vector<Eigen::Index>>(static_cast<std::size_t>(k)));
  event_count_ = Eigen::VectorXd::Zero(m);
  for (std::size_t n = 0; n < data_.events.size(); ++n) {
    const Event& ev = data_.events[n];
    const int st = data_.states.state_at(ev.time);
    ev_in[static_cast<std::size_t>(ev.dim - 1)]
         [static_cast<std::size_t>(st - 1)]
             .push_back(static_cast<Eigen::Index>(n));
    event_count_[ev.dim - 1] += 1.0;
  }
  event_features_.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    event_features_[static_cast<std::size_t>(i)].resize(
        static_cast<std::size_t>(k));
    for (int s = 0; s < k; ++s) {
      const auto& idx = ev_in[static_cast<std::size_t>(i)]
                             [static_cast<std::size_t>(s)];
      Eigen::MatrixXd f(d, static_cast<Eigen::Index>(idx.size()));
      for (std::size_t j = 0; j < idx.size(); ++j) {
        f.col(static_cast<Eigen::Index>(j)) = event_features.col(idx[j]);
      }
      event_features_[static_cast<std::size_t>(i)]
                     [static_cast<std::size_t>(s)] = std::move(f);
    }
  }

  // The transition posterior is exact and computed once.
  factors_.transition_dirichlet =
      transition_posterior(data_, priors_.dirichlet_alpha);
  factors_.num_dims = m;
  factors_.num_states = k;
  factors_.feature_dim = d;
  factors_.gamma_rate = data_.horizon;
  factors_.gamma_shape = 2.0 * event_count_;  // R~ initialized to N_i
  factors_.weight_mean.assign(
      static_cast<std::size_t>(m),
      std::vector<Eigen::VectorXd>(static_cast<std::size_t>(k),
                                   Eigen::VectorXd::Zero(d)));
  factors_.weight_cov.assign(
      static_cast<std::size_t>(m),
      std::vector<Eigen::MatrixXd>(
          static_cast<std::size_t>(k),
          priors_.weight_variance * Eigen::MatrixXd::Identity(d, d)));
  latent_mass_.assign(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    latent_mass_[static_cast<std::size_t>(i)] = event_count_[i];
  }

  // State-process part of the mean-evaluated log-likelihood, constant
  // across iterations.
  const std::vector<Eigen::MatrixXd> counts = transition_counts(data_);
  state_loglik_ = 0.0;
  for (int i = 0; i < m; ++i) {
    const Eigen::MatrixXd& dir =
        factors_.transition_dirichlet[static_cast<std::size_t>(i)];
    for (int r = 0; r < k; ++r) {
      const double row_sum = dir.row(r).sum();
      for (int c = 0; c < k; ++c) {
        const double n_rc = counts[static_cast<std::size_t>(i)](r, c);
        if (n_rc > 0.0) state_loglik_ += n_rc * std::log(dir(r, c) / row_sum);
      }
    }
  }
}

double MeanFieldEngine::latent_mass(int dim) const {
  return latent_mass_[static_cast<std::size_t>(dim - 1)];
}

void MeanFieldEngine::update_dimension(int dim) {
  const std::size_t i = static_cast<std::size_t>(dim - 1);
  const int k = data_.num_states;
  const Eigen::Index d = factors_.feature_dim;
  // A dimension with no events and a collapsed latent process has shape 0;
  // the floor keeps digamma finite and the rate underflows to exactly 0.
  const double lambda1 = gamma_log_mean_exp(
      std::max(factors_.gamma_shape[dim - 1], 1e-12), factors_.gamma_rate);

  // Activation moments under the current weight factors, then the
  // omega-marginalized latent rate at every node.
  std::vector<Eigen::VectorXd> ev_htilde(static_cast<std::size_t>(k));
  std::vector<Eigen::VectorXd> node_htilde(static_cast<std::size_t>(k));
  std::vector<Eigen::VectorXd> node_rate(static_cast<std::size_t>(k));
  double latent_total = 0.0;
  for (int s = 0; s < k; ++s) {
    const auto su = static_cast<std::size_t>(s);
    const Eigen::VectorXd& mean = factors_.weight_mean[i][su];
    const Eigen::MatrixXd& cov = factors_.weight_cov[i][su];

    const Eigen::MatrixXd& fe = event_features_[i][su];
    if (fe.cols() > 0) {
      const Eigen::VectorXd hbar = fe.transpose() * mean;
      const Eigen::VectorXd var = column_quadforms(fe, cov);
      ev_htilde[su] = (hbar.array().square() + var.array()).sqrt().matrix();
    } else {
      ev_htilde[su] = Eigen::VectorXd(0);
    }

    const Eigen::MatrixXd& fq = node_features_by_state_[su];
    const Eigen::VectorXd& wq = node_weights_by_state_[su];
    if (fq.cols() > 0) {
      const Eigen::VectorXd hbar = fq.transpose() * mean;
      const Eigen::VectorXd var = column_quadforms(fq, cov);
      const Eigen::VectorXd htilde =
          (hbar.array().square() + var.array()).sqrt().matrix();
      Eigen::VectorXd rate(hbar.size());
      for (Eigen::Index q = 0; q < hbar.size(); ++q) {
        rate[q] = marginal_latent_rate(lambda1, hbar[q], htilde[q]);
      }
      latent_total += wq.dot(rate);
      node_htilde[su] = htilde;
      node_rate[su] = std::move(rate);
    } else {
      node_htilde[su] = Eigen::VectorXd(0);
      node_rate[su] = Eigen::VectorXd(0);
    }
  }

  latent_mass_[i] = latent_total;
  factors_.gamma_shape[dim - 1] = event_count_[dim - 1] + latent_total;

  // Weight factors, one Gaussian per state.
  for (int s = 0; s < k; ++s) {
    const auto su = static_cast<std::size_t>(s);
    const Eigen::MatrixXd& fe = event_features_[i][su];
    const Eigen::MatrixXd& fq = node_features_by_state_[su];
    const Eigen::VectorXd& wq = node_weights_by_state_[su];

    Eigen::MatrixXd precision =
        Eigen::MatrixXd::Identity(d, d) / priors_.weight_variance;
    Eigen::VectorXd linear = Eigen::VectorXd::Zero(d);
    if (fe.cols() > 0) {
      Eigen::VectorXd a_e(ev_htilde[su].size());
      for (Eigen::Index j = 0; j < a_e.size(); ++j) {
        a_e[j] = pg_mean(1.0, ev_htilde[su][j]);
      }
      precision.noalias() += fe * a_e.asDiagonal() * fe.transpose();
      linear.noalias() += 0.5 * fe.rowwise().sum();
    }
    if (fq.cols() > 0) {
      const Eigen::VectorXd mass = wq.cwiseProduct(node_rate[su]);
      Eigen::VectorXd a_q(mass.size());
      for (Eigen::Index q = 0; q < a_q.size(); ++q) {
        a_q[q] = mass[q] * pg_mean(1.0, node_htilde[su][q]);
      }
      precision.noalias() += fq * a_q.asDiagonal() * fq.transpose();
      linear.noalias() -= 0.5 * (fq * mass);
    }
    const auto llt = cholesky_with_jitter(precision);
    factors_.weight_mean[i][su] = llt.solve(linear);
    Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(d, d));
    factors_.weight_cov[i][su] = 0.5 * (cov + cov.transpose());
  }
}

double MeanFieldEngine::mean_train_loglik() const {
  double ll = state_loglik_;
  const int k = data_.num_states;
  for (int dim = 1; dim <= data_.num_dims; ++dim) {
    const std::size_t i = static_cast<std::size_t>(dim - 1);
    const double lambda =
        factors_.gamma_shape[dim - 1] / factors_.gamma_rate;
    const double log_lambda = std::log(lambda);
    for (int s = 0; s < k; ++s) {
      const auto su = static_cast<std::size_t>(s);
      const Eigen::VectorXd& mean = factors_.weight_mean[i][su];
      const Eigen::MatrixXd& fe = event_features_[i][su];
      if (fe.cols() > 0) {
        const Eigen::VectorXd h = fe.transpose() * mean;
        for (Eigen::Index j = 0; j < h.size(); ++j) {
          ll += log_lambda + log_sigmoid(h[j]);
        }
      }
      const Eigen::MatrixXd& fq = node_features_by_state_[su];
      if (fq.cols() > 0) {
        const Eigen::VectorXd h = fq.transpose() * mean;
        const Eigen::VectorXd& wq = node_weights_by_state_[su];
        double acc = 0.0;
        for (Eigen::Index q = 0; q < h.size(); ++q) {
          acc += wq[q] * sigmoid(h[q]);
        }
        ll -= lambda * acc;
      }
    }
  }
  return ll;
}

MeanFieldState MeanFieldEngine::run() {
  double prev_ll = 0.0;
  for (int it = 0; it < opts_.max_iterations; ++it) {
    parallel_for(data_.num_dims, opts_.threads,
                 [this](int i0) { update_dimension(i0 + 1); });
    const double ll = mean_train_loglik();
    factors_.train_loglik.push_back(ll);
    factors_.iterations_run = it + 1;
    if (it > 0 && std::fabs(ll - prev_ll) <= opts_.tol * std::fabs(prev_ll)) {
      factors_.converged = true;
      break;
    }
    prev_ll = ll;
  }
  return factors_;
}

MeanFieldState run_meanfield(const Realization& data, const BasisSet& basis,
                             const Priors& priors,
                             const MeanFieldOptions& options) {
  MeanFieldEngine engine(data, basis, priors, options);
  return engine.run();
}

ModelParams posterior_mean_params(const MeanFieldState& state) {
  ModelParams p;
  p.lambda_bar = state.gamma_shape / state.gamma_rate;
  p.weights = state.weight_mean;
  p.transition.reserve(state.transition_dirichlet.size());
  for (const Eigen::MatrixXd& dir : state.transition_dirichlet) {
    Eigen::MatrixXd phi = dir;
    for (int r = 0; r < phi.rows(); ++r) phi.row(r) /= phi.row(r).sum();
    p.transition.push_back(std::move(phi));
  }
  return p;
}

ModelParams sample_params(const MeanFieldState& state, std::mt19937_64& rng) {
  ModelParams p;
  const int m = state.num_dims;
  p.lambda_bar.resize(m);
  for (int i = 0; i < m; ++i) {
    std::gamma_distribution<double> gamma(state.gamma_shape[i],
                                          1.0 / state.gamma_rate);
    p.lambda_bar[i] = gamma(rng);
  }
  p.weights.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    auto& per_state = p.weights[static_cast<std::size_t>(i)];
    per_state.reserve(static_cast<std::size_t>(state.num_states));
    for (int s = 0; s < state.num_states; ++s) {
      per_state.push_back(gaussian_from_covariance(
          rng, state.weight_mean[static_cast<std::size_t>(i)]
                                [static_cast<std::size_t>(s)],
          state.weight_cov[static_cast<std::size_t>(i)]
                          [static_cast<std::size_t>(s)]));
    }
  }
  p.transition.reserve(static_cast<std::size_t>(m));
  for (const Eigen::MatrixXd& dir : state.transition_dirichlet) {
    Eigen::MatrixXd phi(dir.rows(), dir.cols());
    for (int r = 0; r < dir.rows(); ++r) {
      phi.row(r) = dirichlet_draw(rng, dir.row(r).transpose()).transpose();
    }
    p.transition.push_back(std::move(phi));
  }
  return p;
}

}  // namespace fshawkes
