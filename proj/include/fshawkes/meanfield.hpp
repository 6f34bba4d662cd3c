#ifndef FSHAWKES_MEANFIELD_HPP
#define FSHAWKES_MEANFIELD_HPP

#include <Eigen/Dense>
#include <random>
#include <utility>
#include <vector>

#include "fshawkes/basis.hpp"
#include "fshawkes/quadrature.hpp"
#include "fshawkes/types.hpp"

namespace fshawkes {

struct MeanFieldOptions {
  int max_iterations = 200;
  double tol = 1e-6;          // relative change of the mean-evaluated LL
  int nodes_per_interval = 100;
  int threads = 1;
};

// Variational factor parameters after a mean-field run. The weight factors
// are Gaussians N(m, Sigma) per (dimension, state), the intensity bounds
// are Gamma(shape, rate) per dimension, and the transition posterior is the
// exact row-wise Dirichlet.
struct MeanFieldState {
  Eigen::VectorXd gamma_shape;  // per dim: N_i + latent mass R~_i
  double gamma_rate = 0.0;      // the horizon T
  std::vector<std::vector<Eigen::VectorXd>> weight_mean;   // [M][K]
  std::vector<std::vector<Eigen::MatrixXd>> weight_cov;    // [M][K]
  std::vector<Eigen::MatrixXd> transition_dirichlet;       // per dim, K x K
  std::vector<double> train_loglik;  // mean-evaluated, one per iteration
  int iterations_run = 0;
  bool converged = false;
  int num_dims = 0;
  int num_states = 0;
  int feature_dim = 0;
};

// E[h] = F.m and sqrt(E[h^2]) = sqrt((F.m)^2 + F' Sigma F) for one feature
// vector under a Gaussian weight factor. A negative quadratic form from
// numeric loss is clamped at zero.
std::pair<double, double> activation_moments(const Eigen::VectorXd& features,
                                             const Eigen::VectorXd& mean,
                                             const Eigen::MatrixXd& cov);

// exp(E[log lambda]) for a Gamma(shape, rate) factor:
// exp(psi(shape) - log(rate)).
double gamma_log_mean_exp(double shape, double rate);

// The omega-marginalized optimal latent-process rate
//   lambda1 * sigma(-htilde) * exp((htilde - hbar)/2)
// computed in the stable form lambda1 * exp(-hbar/2) / (2 cosh(htilde/2)).
double marginal_latent_rate(double lambda1, double hbar, double htilde);

// Quadrature mass of the marginal latent rate: sum_q w_q Lambda1(t_q).
double integrate_latent_rate(double lambda1, const Eigen::VectorXd& hbar,
                             const Eigen::VectorXd& htilde,
                             const Eigen::VectorXd& weights);

// Exact transition posterior: Dirichlet(counts row + alpha) per row, no
// iteration required.
std::vector<Eigen::MatrixXd> transition_posterior(
    const Realization& data, const Eigen::VectorXd& alpha);

// Coordinate-ascent mean-field engine. Per-dimension updates are
// independent within an iteration and may run in parallel; the iteration
// barrier is the shared log-likelihood evaluation.
class MeanFieldEngine {
 public:
  MeanFieldEngine(const Realization& data, const BasisSet& basis,
                  Priors priors, MeanFieldOptions options);

  // One coordinate update for a dimension: refresh the Polya-Gamma tilts,
  // integrate the latent rate into the Gamma factor, then refresh the
  // weight factors.
  void update_dimension(int dim);

  // Training log-likelihood at the factor means, on the quadrature grid.
  double mean_train_loglik() const;

  MeanFieldState run();

  const PiecewiseQuadrature& quadrature() const { return quad_; }
  double latent_mass(int dim) const;  // current R~_i
  const MeanFieldState& factors() const { return factors_; }

 private:
  const Realization& data_;
  const BasisSet& basis_;
  Priors priors_;
  MeanFieldOptions opts_;

  PiecewiseQuadrature quad_;
  // Node features grouped by state for dense per-state updates.
  std::vector<Eigen::MatrixXd> node_features_by_state_;   // [K], d x Q_k
  std::vector<Eigen::VectorXd> node_weights_by_state_;    // [K]
  // Event features grouped by (dimension, state).
  std::vector<std::vector<Eigen::MatrixXd>> event_features_;  // [M][K]
  Eigen::VectorXd event_count_;  // N_i per dim
  double state_loglik_ = 0.0;    // constant given the exact posterior mean

  MeanFieldState factors_;
  std::vector<double> latent_mass_;  // R~_i per dim
};

MeanFieldState run_meanfield(const Realization& data, const BasisSet& basis,
                             const Priors& priors,
                             const MeanFieldOptions& options);

// Factor means assembled as a ModelParams (Gamma mean shape/rate, Gaussian
// means, Dirichlet row means).
ModelParams posterior_mean_params(const MeanFieldState& state);

// One joint draw from the factorized posterior.
ModelParams sample_params(const MeanFieldState& state, std::mt19937_64& rng);

}  // namespace fshawkes

#endif
