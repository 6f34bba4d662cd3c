#include "fshawkes/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "fshawkes/math_util.hpp"
#include "fshawkes/quadrature.hpp"

namespace fshawkes {

FitReport log_likelihood(const ModelParams& params, const BasisSet& basis,
                         const Realization& data, int nodes_per_interval) {
  if (nodes_per_interval < 2) {
    throw std::invalid_argument(
        "log_likelihood: need at least 2 quadrature nodes per interval");
  }
  params.validate();
  const int m = data.num_dims;

  FitReport report;

  const PiecewiseQuadrature quad =
      PiecewiseQuadrature::build(data, nodes_per_interval);
  const Eigen::MatrixXd node_features = precompute_features(
      basis, data.events, m,
      std::span<const double>(quad.nodes.data(),
                              static_cast<std::size_t>(quad.nodes.size())));

  // Compensator integrals, all dimensions in one pass over the nodes.
  Eigen::VectorXd integral = Eigen::VectorXd::Zero(m);
  for (Eigen::Index q = 0; q < quad.nodes.size(); ++q) {
    const int state = quad.node_state[static_cast<std::size_t>(q)];
    for (int i = 1; i <= m; ++i) {
      integral[i - 1] +=
          quad.weights[q] *
          intensity(params, node_features.col(q), i, state);
    }
  }
  report.loglik_point_process = -integral.sum();

  // Event terms and the state-transition term.
  std::vector<double> event_times;
  event_times.reserve(data.events.size());
  for (const Event& ev : data.events) event_times.push_back(ev.time);
  const Eigen::MatrixXd event_features =
      precompute_features(basis, data.events, m, event_times);

  bool zero_transition = false;
  for (std::size_t n = 0; n < data.events.size(); ++n) {
    const Event& ev = data.events[n];
    const int pre = data.states.state_at(ev.time);
    const int post = data.states.state_after(ev.time);
    const double h = activation(
        params, event_features.col(static_cast<Eigen::Index>(n)), ev.dim, pre);
    report.loglik_point_process +=
        std::log(params.lambda_bar[ev.dim - 1]) + log_sigmoid(h);
    const double phi =
        params.transition[static_cast<std::size_t>(ev.dim - 1)](pre - 1,
                                                                post - 1);
    if (phi <= 0.0) {
      zero_transition = true;
      report.loglik_state = -std::numeric_limits<double>::infinity();
    } else if (std::isfinite(report.loglik_state)) {
      report.loglik_state += std::log(phi);
    }
  }
  if (zero_transition) {
    std::cerr << "warning: observed state transition with zero probability; "
                 "state log-likelihood is -inf\n";
  }
  report.loglik_total = report.loglik_point_process + report.loglik_state;
  report.per_event_loglik =
      data.events.empty()
          ? 0.0
          : report.loglik_total / static_cast<double>(data.events.size());
  return report;
}

std::vector<double> rescale(const ModelParams& params, const BasisSet& basis,
                            const Realization& data, int dim,
                            int nodes_per_interval) {
  const PiecewiseQuadrature quad =
      PiecewiseQuadrature::build(data, nodes_per_interval);
  const Eigen::MatrixXd node_features = precompute_features(
      basis, data.events, data.num_dims,
      std::span<const double>(quad.nodes.data(),
                              static_cast<std::size_t>(quad.nodes.size())));

  // Cumulative integral of the dim intensity at every interval boundary.
  // Boundaries are exactly the event times, so tau at an event is a prefix
  // sum of whole intervals.
  std::vector<double> cum(quad.boundaries.size(), 0.0);
  Eigen::Index pos = 0;
  for (std::size_t iv = 0; iv + 1 < quad.boundaries.size(); ++iv) {
    double acc = 0.0;
    for (int j = 0; j < nodes_per_interval; ++j, ++pos) {
      acc += quad.weights[pos] *
             intensity(params, node_features.col(pos), dim,
                       quad.node_state[static_cast<std::size_t>(pos)]);
    }
    cum[iv + 1] = cum[iv] + acc;
  }

  std::vector<double> taus;
  for (const Event& ev : data.events) {
    if (ev.dim != dim) continue;
    const auto it = std::lower_bound(quad.boundaries.begin(),
                                     quad.boundaries.end(), ev.time);
    taus.push_back(cum[static_cast<std::size_t>(it - quad.boundaries.begin())]);
  }
  return taus;
}

std::vector<std::pair<double, double>> qq_data(std::span<const double> taus) {
  std::vector<std::pair<double, double>> out;
  if (taus.size() < 2) return out;
  std::vector<double> u;
  u.reserve(taus.size());
  double prev = 0.0;
  for (double tau : taus) {
    u.push_back(1.0 - std::exp(-(tau - prev)));
    prev = tau;
  }
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  out.reserve(u.size());
  for (std::size_t r = 0; r < u.size(); ++r) {
    out.emplace_back((static_cast<double>(r) + 0.5) / n, u[r]);
  }
  return out;
}

std::vector<double> influence_curve(const ModelParams& params,
                                    const BasisSet& basis, int dim, int source,
                                    int state, std::span<const double> grid) {
  const int nb = basis.size();
  const Eigen::VectorXd& w = params.weights[static_cast<std::size_t>(dim - 1)]
                                           [static_cast<std::size_t>(state - 1)];
  std::vector<double> out;
  out.reserve(grid.size());
  for (double x : grid) {
    double v = 0.0;
    for (int b = 1; b <= nb; ++b) {
      v += w[feature_index(source, b, nb)] * basis.eval(b, x);
    }
    out.push_back(v);
  }
  return out;
}

double ks_statistic_uniform(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t r = 0; r < u.size(); ++r) {
    const double hi = (static_cast<double>(r) + 1.0) / n - u[r];
    const double lo = u[r] - static_cast<double>(r) / n;
    d = std::max(d, std::max(hi, lo));
  }
  return d;
}

double ks_critical_value(double alpha, std::size_t n) {
  const double k_alpha = std::sqrt(-0.5 * std::log(0.5 * alpha));
  return k_alpha / std::sqrt(static_cast<double>(n));
}

FitReport evaluate_fit(const ModelParams& params, const BasisSet& basis,
                       const Realization& data, int nodes_per_interval) {
  FitReport report = log_likelihood(params, basis, data, nodes_per_interval);
  report.rescaled_times.resize(static_cast<std::size_t>(data.num_dims));
  report.qq_points.resize(static_cast<std::size_t>(data.num_dims));
  for (int i = 1; i <= data.num_dims; ++i) {
    auto taus = rescale(params, basis, data, i, nodes_per_interval);
    report.qq_points[static_cast<std::size_t>(i - 1)] = qq_data(taus);
    report.rescaled_times[static_cast<std::size_t>(i - 1)] = std::move(taus);
  }
  return report;
}

}  // namespace fshawkes
