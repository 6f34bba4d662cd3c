#ifndef FSHAWKES_GIBBS_HPP
#define FSHAWKES_GIBBS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "fshawkes/basis.hpp"
#include "fshawkes/types.hpp"

namespace fshawkes {

struct GibbsOptions {
  int iterations = 200;
  int burn_in = -1;  // -1: iterations / 2
  int thin = 1;
  std::uint64_t seed = 0;
  // Fixed-grid points for the in-chain training log-likelihood; -1 scales
  // as 100 points per unit of horizon.
  long long ll_grid_points = -1;
  int threads = 1;
};

// One latent marked-Poisson point: time, its Polya-Gamma mark, and the
// observed state in force at that time.
struct LatentPoint {
  double time = 0.0;
  double mark = 0.0;
  int state = 1;
};

struct GibbsState {
  std::vector<std::vector<double>> pg_marks;       // [dim][event within dim]
  std::vector<std::vector<LatentPoint>> latents;   // [dim]
  ModelParams params;
};

struct GibbsChain {
  std::vector<ModelParams> samples;  // post burn-in, thinned
  std::vector<double> train_loglik;  // one entry per iteration
};

// Augmented Gibbs sampler. Every conditional update for dimension i depends
// only on the data and dimension-i variables, so dimensions own independent
// random streams and may be updated in parallel; replay is deterministic in
// the seed regardless of thread count.
class GibbsSampler {
 public:
  GibbsSampler(const Realization& data, const BasisSet& basis, Priors priors,
               GibbsOptions options);

  // Conditional updates for one dimension, in within-iteration order.
  void sample_pg_marks(int dim);
  void sample_latent_process(int dim);
  void sample_transition(int dim);
  double sample_lambda_bar(int dim);
  void sample_weights(int dim);

  // One full sweep over all dimensions.
  void step();

  GibbsChain run();

  const GibbsState& state() const { return state_; }
  GibbsState& mutable_state() { return state_; }
  const Eigen::MatrixXd& transition_counts(int dim) const {
    return counts_[static_cast<std::size_t>(dim - 1)];
  }

  // Training log-likelihood of the current parameters on the fixed grid.
  double train_loglik() const;

  // Gaussian conditional of one (dimension, state) weight block given the
  // marks: mean and precision. Events carry +1/2 targets, latent points
  // -1/2. Exposed so tests can compare against an independent oracle.
  static std::pair<Eigen::VectorXd, Eigen::MatrixXd> weight_conditional(
      const Eigen::MatrixXd& event_features,
      const Eigen::VectorXd& event_marks,
      const Eigen::MatrixXd& latent_features,
      const Eigen::VectorXd& latent_marks, double prior_variance);

 private:
  double activation_at_event(std::size_t global_index, int dim) const;

  const Realization& data_;
  const BasisSet& basis_;
  Priors priors_;
  GibbsOptions opts_;

  Eigen::MatrixXd event_features_;              // (MB+1) x N, global order
  std::vector<int> event_state_;                // per global event
  std::vector<std::vector<std::size_t>> events_of_dim_;  // global indices
  std::vector<Eigen::MatrixXd> counts_;         // transition counts per dim

  // Fixed evaluation grid for the in-chain log-likelihood.
  Eigen::MatrixXd grid_features_;
  std::vector<int> grid_state_;
  double grid_cell_ = 0.0;

  std::vector<Eigen::MatrixXd> latent_features_;  // per dim, (MB+1) x R_i
  std::vector<std::mt19937_64> rngs_;             // one stream per dim
  GibbsState state_;
};

// Transition counts s_k^i(k'): number of type-dim events at which the state
// moves from k to k' (self-transitions included).
std::vector<Eigen::MatrixXd> transition_counts(const Realization& data);

GibbsChain run_gibbs(const Realization& data, const BasisSet& basis,
                     const Priors& priors, const GibbsOptions& options);

}  // namespace fshawkes

#endif
