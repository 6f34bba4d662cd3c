#ifndef FSHAWKES_TYPES_HPP
#define FSHAWKES_TYPES_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <utility>
#include <vector>

// Core domain types for state-switching Hawkes processes.
//
// Index conventions: dimensions, states and basis functions are 1-based in
// the public API (matching the on-disk formats); containers are indexed
// internally with the usual 0-based offsets.

namespace fshawkes {

// One observed event: a timestamp and the dimension (type) it occurred on.
struct Event {
  double time = 0.0;
  int dim = 1;  // in [1, M]
};

// Piecewise-constant, left-continuous state trajectory on [0, horizon].
// Stored sparsely as an initial state plus a list of (time, new_state)
// switch records; a record whose new_state equals the state already in
// force is allowed (redundant, but representable).
class StatePath {
 public:
  StatePath() = default;
  StatePath(int initial_state, std::vector<std::pair<double, int>> switches,
            double horizon);

  // z(t): left-continuous evaluation; at a switch time this is the
  // pre-switch state. Throws std::out_of_range for t outside [0, horizon].
  int state_at(double t) const;

  // z(t+): the right limit; at a switch time this is the new state.
  int state_after(double t) const;

  int initial_state() const { return initial_state_; }
  const std::vector<std::pair<double, int>>& switches() const {
    return switches_;
  }
  double horizon() const { return horizon_; }

  // Largest state index referenced by the path.
  int max_state() const;

 private:
  int initial_state_ = 1;
  std::vector<std::pair<double, int>> switches_;
  double horizon_ = 0.0;
};

// An observed dataset: events of all dimensions merged in ascending time
// order, the observed state path, and the window [0, horizon].
struct Realization {
  std::vector<Event> events;
  StatePath states;
  int num_dims = 1;
  int num_states = 1;
  double horizon = 0.0;

  // Throws std::invalid_argument if any structural invariant is violated:
  // events out of [0, horizon] or not ascending, duplicate times within a
  // dimension, indices out of range, switch times that match no event time,
  // or a horizon mismatch with the state path.
  void validate() const;

  std::size_t count_of_dim(int dim) const;
  std::vector<double> times_of_dim(int dim) const;
};

// Model parameters: per-dimension transition matrices (rows are probability
// vectors), intensity upper-bounds, and per-(dimension, state) weight
// vectors of length M*B+1 laid out as
//   [mu, w_{i,1,1}, ..., w_{i,1,B}, w_{i,2,1}, ..., w_{i,M,B}].
struct ModelParams {
  std::vector<Eigen::MatrixXd> transition;             // M matrices, K x K
  Eigen::VectorXd lambda_bar;                          // length M, positive
  std::vector<std::vector<Eigen::VectorXd>> weights;   // [M][K], length M*B+1

  int num_dims() const { return static_cast<int>(lambda_bar.size()); }
  int num_states() const {
    return transition.empty() ? 0 : static_cast<int>(transition[0].rows());
  }
  int feature_dim() const {
    return (weights.empty() || weights[0].empty())
               ? 0
               : static_cast<int>(weights[0][0].size());
  }
  int num_basis() const;

  void validate() const;
};

// Position of the cumulative-influence entry (source dim j, basis b) in a
// feature vector; entry 0 is the constant 1. j and b are 1-based.
inline int feature_index(int j, int b, int num_basis) {
  return 1 + (j - 1) * num_basis + (b - 1);
}

// h_i(t, k) = w_i^k . F(t). Throws std::invalid_argument on a length
// mismatch between the weight vector and the feature vector.
double activation(const ModelParams& params, const Eigen::VectorXd& features,
                  int dim, int state);

// lambda_i(t, k) = lambda_bar_i * sigmoid(h_i(t, k)); always in
// (0, lambda_bar_i) for finite activations.
double intensity(const ModelParams& params, const Eigen::VectorXd& features,
                 int dim, int state);

// Prior hyperparameters: a Dirichlet concentration vector for each
// transition-matrix row and the scale of the isotropic Gaussian weight
// prior N(0, sigma^2 I).
struct Priors {
  Eigen::VectorXd dirichlet_alpha;  // length K, entries > 0
  double weight_variance = 1.0;     // sigma^2 > 0

  static Priors uniform(int num_states, double weight_variance = 1.0);
  void validate() const;
};

}  // namespace fshawkes

#endif
