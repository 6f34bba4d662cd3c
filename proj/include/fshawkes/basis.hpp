#ifndef FSHAWKES_BASIS_HPP
#define FSHAWKES_BASIS_HPP

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "fshawkes/types.hpp"

namespace fshawkes {

// A scaled shifted Beta density: lag -> BetaPDF((lag - shift)/scale) / scale.
// Raw support is [shift, shift + scale]; evaluation additionally clips to
// the influence window [0, support_end] without renormalizing the clipped
// mass.
struct BasisFunction {
  double alpha_shape = 1.0;  // > 0
  double beta_shape = 1.0;   // > 0
  double scale = 1.0;        // > 0
  double shift = 0.0;
};

// Evaluate one basis function at a lag, clipping to
// [max(0, shift), min(shift + scale, support_end)]. The Beta pdf is
// evaluated through log-gamma so large shape parameters do not overflow.
// Throws std::invalid_argument for non-finite lags.
double basis_eval(const BasisFunction& f, double lag, double support_end);

// B basis functions sharing the influence window [0, support_end].
class BasisSet {
 public:
  BasisSet() = default;
  BasisSet(std::vector<BasisFunction> functions, double support_end);

  // b is 1-based.
  double eval(int b, double lag) const {
    return basis_eval(functions_[static_cast<std::size_t>(b - 1)], lag,
                      support_end_);
  }

  int size() const { return static_cast<int>(functions_.size()); }
  double support_end() const { return support_end_; }
  const std::vector<BasisFunction>& functions() const { return functions_; }

 private:
  std::vector<BasisFunction> functions_;
  double support_end_ = 0.0;
};

// F(t) = [1, F_{1,1}(t), ..., F_{M,B}(t)] where F_{j,b}(t) sums basis b over
// the lags to strictly-past dimension-j events; only lags in
// (0, support_end] contribute. `events` must be ascending in time.
Eigen::VectorXd cumulative_features(const BasisSet& basis,
                                    std::span<const Event> events,
                                    int num_dims, double t);

Eigen::VectorXd cumulative_features(const BasisSet& basis,
                                    const Realization& data, double t);

// cumulative_features evaluated at many sorted times with a sliding window
// over the event list; one column per time. Throws std::invalid_argument if
// `times` is not ascending.
Eigen::MatrixXd precompute_features(const BasisSet& basis,
                                    std::span<const Event> events,
                                    int num_dims,
                                    std::span<const double> times);

}  // namespace fshawkes

#endif
