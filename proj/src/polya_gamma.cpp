#include "fshawkes/polya_gamma.hpp"

#include <cmath>

namespace fshawkes {

namespace {

constexpr double kTrunc = 2.0 / M_PI;  // proposal split point for J*(1, z)
constexpr double kPi2 = M_PI * M_PI;

double unit_uniform(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double unit_exponential(std::mt19937_64& rng) {
  return std::exponential_distribution<double>(1.0)(rng);
}

double std_normal(std::mt19937_64& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// Piecewise series coefficient a_n(x) of the J*(1, z) density
// (Polson, Scott & Windle 2013, eqs. 12-13).
double series_coef(int n, double x) {
  const double np = n + 0.5;
  double logf;
  if (x <= kTrunc) {
    logf = std::log(M_PI) + std::log(np) +
           1.5 * (std::log(2.0 / M_PI) - std::log(x)) - 2.0 * np * np / x;
  } else {
    logf = std::log(M_PI) + std::log(np) - 0.5 * x * kPi2 * np * np;
  }
  return std::exp(logf);
}

// Probability of proposing from the shifted-exponential branch
// (Windle 2013, Algorithm 6).
double exponential_branch_prob(double z) {
  const double t = kTrunc;
  const double rate = 0.5 * z * z + 0.125 * kPi2;
  const double log_a = std::log(4.0) - std::log(M_PI) - z;
  const double sqrt_inv_t = std::sqrt(1.0 / t);
  const double common = log_a + std::log(rate) + rate * t;
  const double logf1 = common + std::log(normal_cdf(sqrt_inv_t * (t * z - 1.0)));
  const double logf2 =
      common + 2.0 * z + std::log(normal_cdf(-sqrt_inv_t * (t * z + 1.0)));
  const double q_over_p = std::exp(logf1) + std::exp(logf2);
  return 1.0 / (1.0 + q_over_p);
}

// Inverse Gaussian IG(mu, 1) draw (Michael, Schucany & Haas 1976).
double inverse_gaussian(std::mt19937_64& rng, double mu) {
  const double nu = std_normal(rng);
  const double y = nu * nu;
  double x = mu + 0.5 * mu * (mu * y - std::sqrt(4.0 * mu * y + mu * mu * y * y));
  if (unit_uniform(rng) > mu / (mu + x)) {
    x = mu * mu / x;
  }
  return x;
}

// Unit Gamma(1/2)-type rejection used by the right-truncated inverse
// Gaussian sampler (Windle 2013, Algorithm 3; Chung 1998).
double truncated_gamma(std::mt19937_64& rng) {
  while (true) {
    const double x = 2.0 * unit_exponential(rng) + 0.5 * M_PI;
    if (unit_uniform(rng) <= std::sqrt(0.5 * M_PI / x)) return x;
  }
}

// Inverse Gaussian IG(1/z, 1) truncated to (0, t].
double truncated_inverse_gaussian(std::mt19937_64& rng, double z, double t) {
  const double mu = 1.0 / z;
  if (mu > t) {
    while (true) {
      const double x = 1.0 / truncated_gamma(rng);
      if (std::log(unit_uniform(rng)) < -0.5 * z * z * x) return x;
    }
  }
  while (true) {
    const double x = inverse_gaussian(rng, mu);
    if (x < t) return x;
  }
}

}  // namespace

double pg_mean(double b, double c) {
  const double ac = std::fabs(c);
  if (ac < 1e-6) {
    return 0.25 * b * (1.0 - c * c / 12.0);
  }
  return 0.5 * b / c * std::tanh(0.5 * c);
}

double g_kernel(double omega, double x) {
  return 0.5 * x - 0.5 * x * x * omega - std::log(2.0);
}

double pg_sample(std::mt19937_64& rng, double c) {
  const double z = 0.5 * std::fabs(c);
  const double p_exp = exponential_branch_prob(z);
  const double rate = 0.5 * z * z + 0.125 * kPi2;
  while (true) {
    double x;
    if (unit_uniform(rng) < p_exp) {
      x = kTrunc + unit_exponential(rng) / rate;
    } else {
      x = truncated_inverse_gaussian(rng, z, kTrunc);
    }
    // Squeeze on the alternating partial sums until a decision is possible.
    double partial = series_coef(0, x);
    const double u = unit_uniform(rng) * partial;
    int n = 1;
    bool odd = true;
    while (true) {
      partial += (odd ? -1.0 : 1.0) * series_coef(n, x);
      if (odd && u <= partial) return 0.25 * x;
      if (!odd && u > partial) break;  // rejected, repropose
      odd = !odd;
      ++n;
    }
  }
}

}  // namespace fshawkes
