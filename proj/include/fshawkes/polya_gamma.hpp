#ifndef FSHAWKES_POLYA_GAMMA_HPP
#define FSHAWKES_POLYA_GAMMA_HPP

#include <random>

namespace fshawkes {

// Mean of the tilted Polya-Gamma distribution PG(b, c):
// E[omega] = b/(2c) * tanh(c/2), with the c -> 0 limit b/4 taken through a
// short Taylor expansion for |c| < 1e-6.
double pg_mean(double b, double c);

// g(omega, x) = x/2 - x^2 omega / 2 - log 2, the log of the Gaussian-form
// integrand in the logistic-function augmentation identity
// sigma(x) = E_{PG(1,0)}[exp(g(omega, x))].
double g_kernel(double omega, double x);

// One exact draw from PG(1, c).
//
// Implements the alternating-series accept/reject scheme for the
// Jacobi-theta representation (Devroye 2009; Polson, Scott & Windle 2013;
// Windle 2013, Algorithm 6): J*(1, z) with z = |c|/2 is proposed from a
// mixture of a truncated inverse Gaussian and a shifted exponential, the
// series partial sums decide acceptance, and the accepted value is divided
// by 4.
double pg_sample(std::mt19937_64& rng, double c);

}  // namespace fshawkes

#endif
