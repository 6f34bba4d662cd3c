#include "fshawkes/basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fshawkes {

namespace {

// log Beta(alpha, beta) normalizing constant.
double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double scaled_beta_pdf(const BasisFunction& f, double lag) {
  const double u = (lag - f.shift) / f.scale;
  if (u <= 0.0 || u >= 1.0) {
    // Finite endpoint limits exist only when the adjacent shape equals 1.
    if (u == 0.0 && f.alpha_shape == 1.0) {
      return std::exp(-log_beta(1.0, f.beta_shape)) / f.scale;
    }
    if (u == 1.0 && f.beta_shape == 1.0) {
      return std::exp(-log_beta(f.alpha_shape, 1.0)) / f.scale;
    }
    return 0.0;
  }
  const double logpdf = (f.alpha_shape - 1.0) * std::log(u) +
                        (f.beta_shape - 1.0) * std::log1p(-u) -
                        log_beta(f.alpha_shape, f.beta_shape);
  return std::exp(logpdf) / f.scale;
}

}  // namespace

double basis_eval(const BasisFunction& f, double lag, double support_end) {
  if (!std::isfinite(lag)) {
    throw std::invalid_argument("basis_eval: lag must be finite");
  }
  const double lo = std::max(0.0, f.shift);
  const double hi = std::min(f.shift + f.scale, support_end);
  if (lag < lo || lag > hi) return 0.0;
  return scaled_beta_pdf(f, lag);
}

BasisSet::BasisSet(std::vector<BasisFunction> functions, double support_end)
    : functions_(std::move(functions)), support_end_(support_end) {
  if (functions_.empty()) {
    throw std::invalid_argument("BasisSet: need at least one basis function");
  }
  if (!(support_end_ > 0.0)) {
    throw std::invalid_argument("BasisSet: support end must be positive");
  }
  for (const BasisFunction& f : functions_) {
    if (!(f.alpha_shape > 0.0) || !(f.beta_shape > 0.0) || !(f.scale > 0.0)) {
      throw std::invalid_argument(
          "BasisSet: shape and scale parameters must be positive");
    }
  }
}

Eigen::VectorXd cumulative_features(const BasisSet& basis,
                                    std::span<const Event> events,
                                    int num_dims, double t) {
  const int nb = basis.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(num_dims * nb + 1);
  out[0] = 1.0;
  // Only lags in (0, support_end] contribute: times in [t - T_f, t).
  auto lo = std::lower_bound(
      events.begin(), events.end(), t - basis.support_end(),
      [](const Event& e, double v) { return e.time < v; });
  auto hi = std::lower_bound(events.begin(), events.end(), t,
                             [](const Event& e, double v) { return e.time < v; });
  for (auto it = lo; it != hi; ++it) {
    const double lag = t - it->time;
    for (int b = 1; b <= nb; ++b) {
      out[feature_index(it->dim, b, nb)] += basis.eval(b, lag);
    }
  }
  return out;
}

Eigen::VectorXd cumulative_features(const BasisSet& basis,
                                    const Realization& data, double t) {
  return cumulative_features(basis, std::span<const Event>(data.events),
                             data.num_dims, t);
}

Eigen::MatrixXd precompute_features(const BasisSet& basis,
                                    std::span<const Event> events,
                                    int num_dims,
                                    std::span<const double> times) {
  const int nb = basis.size();
  const Eigen::Index d = num_dims * nb + 1;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, static_cast<Eigen::Index>(times.size()));
  std::size_t lo = 0, hi = 0;
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < times.size(); ++c) {
    const double t = times[c];
    if (t < prev) {
      throw std::invalid_argument("precompute_features: times must ascend");
    }
    prev = t;
    while (hi < events.size() && events[hi].time < t) ++hi;
    while (lo < hi && events[lo].time < t - basis.support_end()) ++lo;
    out(0, static_cast<Eigen::Index>(c)) = 1.0;
    for (std::size_t n = lo; n < hi; ++n) {
      const double lag = t - events[n].time;
      for (int b = 1; b <= nb; ++b) {
        out(feature_index(events[n].dim, b, nb),
            static_cast<Eigen::Index>(c)) += basis.eval(b, lag);
      }
    }
  }
  return out;
}

}  // namespace fshawkes
