#include "fshawkes/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fshawkes {

void gauss_legendre_rule(int n, Eigen::VectorXd& nodes,
                         Eigen::VectorXd& weights) {
  if (n < 1) {
    throw std::invalid_argument("gauss_legendre_rule: n must be >= 1");
  }
  nodes.resize(n);
  weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-based initial guess for the i-th root.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre P_n(x) and derivative by recurrence.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

PiecewiseQuadrature PiecewiseQuadrature::build(const Realization& data,
                                               int nodes_per_interval) {
  if (nodes_per_interval < 1) {
    throw std::invalid_argument(
        "PiecewiseQuadrature: need at least one node per interval");
  }
  PiecewiseQuadrature q;
  q.boundaries.reserve(data.events.size() + 2);
  q.boundaries.push_back(0.0);
  for (const Event& ev : data.events) {
    if (ev.time > 0.0 && ev.time < data.horizon) q.boundaries.push_back(ev.time);
  }
  q.boundaries.push_back(data.horizon);
  q.boundaries.erase(std::unique(q.boundaries.begin(), q.boundaries.end()),
                     q.boundaries.end());
  if (q.boundaries.size() < 2) return q;  // degenerate zero-length window

  Eigen::VectorXd ref_nodes, ref_weights;
  gauss_legendre_rule(nodes_per_interval, ref_nodes, ref_weights);

  const std::size_t n_intervals = q.boundaries.size() - 1;
  const Eigen::Index total =
      static_cast<Eigen::Index>(n_intervals) * nodes_per_interval;
  q.nodes.resize(total);
  q.weights.resize(total);
  q.node_state.resize(static_cast<std::size_t>(total));

  Eigen::Index pos = 0;
  for (std::size_t iv = 0; iv < n_intervals; ++iv) {
    const double a = q.boundaries[iv];
    const double b = q.boundaries[iv + 1];
    const double mid = 0.5 * (a + b);
    const double halfw = 0.5 * (b - a);
    // Gauss-Legendre nodes are interior, so the left-continuous state at
    // any of them equals the state in force on (a, b].
    const int state = data.states.state_at(mid);
    for (int j = 0; j < nodes_per_interval; ++j, ++pos) {
      q.nodes[pos] = mid + halfw * ref_nodes[j];
      q.weights[pos] = halfw * ref_weights[j];
      q.node_state[static_cast<std::size_t>(pos)] = state;
    }
  }
  return q;
}

}  // namespace fshawkes
