#ifndef FSHAWKES_EVALUATION_HPP
#define FSHAWKES_EVALUATION_HPP

#include <span>
#include <utility>
#include <vector>

#include "fshawkes/basis.hpp"
#include "fshawkes/types.hpp"

namespace fshawkes {

// Goodness-of-fit summary for one parameter set on one dataset.
struct FitReport {
  double loglik_total = 0.0;
  double loglik_point_process = 0.0;
  double loglik_state = 0.0;
  double per_event_loglik = 0.0;
  // Filled by rescale()/qq_data() helpers when requested.
  std::vector<std::vector<double>> rescaled_times;
  std::vector<std::vector<std::pair<double, double>>> qq_points;
};

// Data log-likelihood: per-dimension event terms log(lambda_bar sigma(h))
// minus the compensator integral (per-state-interval Gauss-Legendre with
// `nodes_per_interval` >= 2 nodes), plus the state-transition term
// sum_n log phi_i(z(t_n), z(t_n+)). A zero transition probability on an
// observed transition yields -inf with a warning on stderr rather than a
// crash.
FitReport log_likelihood(const ModelParams& params, const BasisSet& basis,
                         const Realization& data, int nodes_per_interval = 10);

// Time-rescaled event times for one dimension:
// tau_n = integral_0^{t_n} lambda_bar_i sigma(h_i(u, z(u))) du, by
// cumulative per-interval quadrature.
std::vector<double> rescale(const ModelParams& params, const BasisSet& basis,
                            const Realization& data, int dim,
                            int nodes_per_interval = 10);

// Exponential-to-uniform Q-Q pairs: interarrivals of the rescaled times are
// mapped through u = 1 - exp(-dtau) and the order statistics are paired
// with plotting positions (r - 0.5)/n. Fewer than 2 rescaled times yield
// an empty list.
std::vector<std::pair<double, double>> qq_data(std::span<const double> taus);

// Pointwise values of f_ij^k(x) = sum_b w_ijb^k basis_b(x) on `grid`.
std::vector<double> influence_curve(const ModelParams& params,
                                    const BasisSet& basis, int dim, int source,
                                    int state, std::span<const double> grid);

// One-sample Kolmogorov-Smirnov statistic of `u` against Uniform(0, 1).
double ks_statistic_uniform(std::vector<double> u);

// Asymptotic critical value K_alpha / sqrt(n) with
// K_alpha = sqrt(-ln(alpha/2) / 2).
double ks_critical_value(double alpha, std::size_t n);

// Full report: log-likelihood plus rescaled times and Q-Q pairs for every
// dimension.
FitReport evaluate_fit(const ModelParams& params, const BasisSet& basis,
                       const Realization& data, int nodes_per_interval = 10);

}  // namespace fshawkes

#endif
