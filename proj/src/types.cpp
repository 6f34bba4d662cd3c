#include "fshawkes/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fshawkes/math_util.hpp"

namespace fshawkes {

StatePath::StatePath(int initial_state,
                     std::vector<std::pair<double, int>> switches,
                     double horizon)
    : initial_state_(initial_state),
      switches_(std::move(switches)),
      horizon_(horizon) {
  if (initial_state_ < 1) {
    throw std::invalid_argument("StatePath: initial state must be >= 1");
  }
  if (!(horizon_ >= 0.0) || !std::isfinite(horizon_)) {
    throw std::invalid_argument("StatePath: horizon must be finite and >= 0");
  }
  double prev = 0.0;
  for (const auto& [t, s] : switches_) {
    if (!(t > prev) || t > horizon_) {
      throw std::invalid_argument(
          "StatePath: switch times must be strictly increasing within "
          "(0, horizon]");
    }
    if (s < 1) {
      throw std::invalid_argument("StatePath: switch state must be >= 1");
    }
    prev = t;
  }
}

int StatePath::state_at(double t) const {
  if (!(t >= 0.0) || t > horizon_) {
    throw std::out_of_range("StatePath::state_at: t outside [0, horizon]");
  }
  // Last switch strictly before t decides; a switch exactly at t does not
  // (left continuity).
  auto it = std::lower_bound(
      switches_.begin(), switches_.end(), t,
      [](const std::pair<double, int>& sw, double v) { return sw.first < v; });
  if (it == switches_.begin()) return initial_state_;
  return std::prev(it)->second;
}

int StatePath::state_after(double t) const {
  if (!(t >= 0.0) || t > horizon_) {
    throw std::out_of_range("StatePath::state_after: t outside [0, horizon]");
  }
  auto it = std::upper_bound(
      switches_.begin(), switches_.end(), t,
      [](double v, const std::pair<double, int>& sw) { return v < sw.first; });
  if (it == switches_.begin()) return initial_state_;
  return std::prev(it)->second;
}

int StatePath::max_state() const {
  int m = initial_state_;
  for (const auto& [t, s] : switches_) m = std::max(m, s);
  return m;
}

void Realization::validate() const {
  if (num_dims < 1 || num_states < 1) {
    throw std::invalid_argument("Realization: need num_dims, num_states >= 1");
  }
  if (horizon != states.horizon()) {
    throw std::invalid_argument(
        "Realization: horizon differs from the state path horizon");
  }
  std::vector<double> last_time(static_cast<std::size_t>(num_dims),
                                -std::numeric_limits<double>::infinity());
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < events.size(); ++n) {
    const Event& ev = events[n];
    if (!(ev.time >= 0.0) || ev.time > horizon) {
      throw std::invalid_argument("Realization: event " + std::to_string(n) +
                                  " outside [0, horizon]");
    }
    if (ev.time < prev) {
      throw std::invalid_argument("Realization: events not in ascending order");
    }
    if (ev.dim < 1 || ev.dim > num_dims) {
      throw std::invalid_argument("Realization: event " + std::to_string(n) +
                                  " has dimension out of range");
    }
    // Duplicate times across dimensions are fine; within a dimension the
    // marks must be distinguishable.
    if (ev.time <= last_time[static_cast<std::size_t>(ev.dim - 1)]) {
      throw std::invalid_argument(
          "Realization: event times must be strictly increasing within "
          "dimension " +
          std::to_string(ev.dim));
    }
    last_time[static_cast<std::size_t>(ev.dim - 1)] = ev.time;
    prev = ev.time;
  }
  if (states.max_state() > num_states) {
    throw std::invalid_argument("Realization: state index exceeds num_states");
  }
  // State switches happen only when an event occurs.
  for (const auto& [t, s] : states.switches()) {
    auto it = std::lower_bound(
        events.begin(), events.end(), t,
        [](const Event& e, double v) { return e.time < v; });
    const bool found = it != events.end() && it->time == t;
    if (!found) {
      throw std::invalid_argument(
          "Realization: state switch at t=" + std::to_string(t) +
          " coincides with no event time");
    }
  }
}

std::size_t Realization::count_of_dim(int dim) const {
  std::size_t n = 0;
  for (const Event& ev : events) n += (ev.dim == dim);
  return n;
}

std::vector<double> Realization::times_of_dim(int dim) const {
  std::vector<double> out;
  for (const Event& ev : events) {
    if (ev.dim == dim) out.push_back(ev.time);
  }
  return out;
}

int ModelParams::num_basis() const {
  const int d = feature_dim();
  const int m = num_dims();
  if (d <= 1 || m == 0) return 0;
  return (d - 1) / m;
}

void ModelParams::validate() const {
  const int m = num_dims();
  const int k = num_states();
  if (m < 1 || k < 1) {
    throw std::invalid_argument("ModelParams: empty parameter set");
  }
  if (static_cast<int>(transition.size()) != m ||
      static_cast<int>(weights.size()) != m) {
    throw std::invalid_argument("ModelParams: inconsistent dimension count");
  }
  for (int i = 0; i < m; ++i) {
    const Eigen::MatrixXd& phi = transition[static_cast<std::size_t>(i)];
    if (phi.rows() != k || phi.cols() != k) {
      throw std::invalid_argument("ModelParams: transition matrix shape");
    }
    for (int r = 0; r < k; ++r) {
      if (phi.row(r).minCoeff() < 0.0) {
        throw std::invalid_argument(
            "ModelParams: negative transition probability");
      }
      if (std::fabs(phi.row(r).sum() - 1.0) > 1e-12) {
        throw std::invalid_argument(
            "ModelParams: transition row does not sum to 1");
      }
    }
    if (!(lambda_bar[i] > 0.0)) {
      throw std::invalid_argument("ModelParams: lambda_bar must be positive");
    }
    if (static_cast<int>(weights[static_cast<std::size_t>(i)].size()) != k) {
      throw std::invalid_argument("ModelParams: weights state count");
    }
  }
  const Eigen::Index d = weights[0][0].size();
  if (d < 1 || (d - 1) % m != 0) {
    throw std::invalid_argument("ModelParams: weight length must be M*B+1");
  }
  for (const auto& per_state : weights) {
    for (const auto& w : per_state) {
      if (w.size() != d) {
        throw std::invalid_argument("ModelParams: ragged weight vectors");
      }
    }
  }
}

double activation(const ModelParams& params, const Eigen::VectorXd& features,
                  int dim, int state) {
  const Eigen::VectorXd& w =
      params.weights[static_cast<std::size_t>(dim - 1)]
                    [static_cast<std::size_t>(state - 1)];
  if (w.size() != features.size()) {
    throw std::invalid_argument(
        "activation: weight/feature length mismatch (" +
        std::to_string(w.size()) + " vs " + std::to_string(features.size()) +
        ")");
  }
  return w.dot(features);
}

double intensity(const ModelParams& params, const Eigen::VectorXd& features,
                 int dim, int state) {
  return params.lambda_bar[dim - 1] *
         sigmoid(activation(params, features, dim, state));
}

Priors Priors::uniform(int num_states, double weight_variance) {
  Priors p;
  p.dirichlet_alpha = Eigen::VectorXd::Ones(num_states);
  p.weight_variance = weight_variance;
  return p;
}

void Priors::validate() const {
  if (dirichlet_alpha.size() < 1 || dirichlet_alpha.minCoeff() <= 0.0) {
    throw std::invalid_argument("Priors: Dirichlet alpha entries must be > 0");
  }
  if (!(weight_variance > 0.0)) {
    throw std::invalid_argument("Priors: weight variance must be > 0");
  }
}

}  // namespace fshawkes
