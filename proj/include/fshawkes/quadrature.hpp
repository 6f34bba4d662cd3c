#ifndef FSHAWKES_QUADRATURE_HPP
#define FSHAWKES_QUADRATURE_HPP

#include <Eigen/Dense>
#include <vector>

#include "fshawkes/types.hpp"

namespace fshawkes {

// Gauss-Legendre nodes and weights on [-1, 1], exact for polynomials of
// degree 2n-1. Newton iteration on the Legendre recurrence.
void gauss_legendre_rule(int n, Eigen::VectorXd& nodes,
                         Eigen::VectorXd& weights);

// A quadrature grid over [0, T] partitioned at every event time (the state
// is constant between events), with Gauss-Legendre nodes per sub-interval
// and a state label per node.
struct PiecewiseQuadrature {
  Eigen::VectorXd nodes;        // ascending evaluation times
  Eigen::VectorXd weights;      // matching quadrature weights
  std::vector<int> node_state;  // state in force at each node (1-based)
  std::vector<double> boundaries;  // interval edges, 0 and T included

  static PiecewiseQuadrature build(const Realization& data,
                                   int nodes_per_interval);

  // sum_q w_q f(node_q) for an arbitrary integrand sampled at the nodes.
  double integrate(const Eigen::VectorXd& values) const {
    return weights.dot(values);
  }
};

}  // namespace fshawkes

#endif
