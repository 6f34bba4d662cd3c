#ifndef FSHAWKES_LINALG_HPP
#define FSHAWKES_LINALG_HPP

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <thread>
#include <vector>

namespace fshawkes {

// Cholesky of a symmetric positive (semi-)definite matrix with adaptive
// diagonal jitter: starts at 1e-10, grows tenfold up to 1e-4, then throws
// std::runtime_error. The jitter actually applied is added to `a`.
Eigen::LLT<Eigen::MatrixXd> cholesky_with_jitter(Eigen::MatrixXd& a);

// Draw from N(mean, precision^{-1}) given the Cholesky factor of the
// precision matrix.
Eigen::VectorXd gaussian_from_precision(std::mt19937_64& rng,
                                        const Eigen::VectorXd& mean,
                                        const Eigen::LLT<Eigen::MatrixXd>& llt);

// Draw from N(mean, cov) via the Cholesky factor of the covariance.
Eigen::VectorXd gaussian_from_covariance(std::mt19937_64& rng,
                                         const Eigen::VectorXd& mean,
                                         const Eigen::MatrixXd& cov);

// Dirichlet draw by normalized Gamma variates.
Eigen::VectorXd dirichlet_draw(std::mt19937_64& rng,
                               const Eigen::VectorXd& concentration);

// Run fn(0), ..., fn(n-1), split over at most `threads` workers. Each index
// is processed exactly once; with threads <= 1 the loop is serial. Callers
// must keep per-index work independent.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace fshawkes

#endif
