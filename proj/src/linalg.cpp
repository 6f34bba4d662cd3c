#include "fshawkes/linalg.hpp"

#include <stdexcept>

namespace fshawkes {

Eigen::LLT<Eigen::MatrixXd> cholesky_with_jitter(Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return llt;
  const Eigen::Index n = a.rows();
  for (double jitter = 1e-10; jitter <= 1e-4; jitter *= 10.0) {
    Eigen::MatrixXd trial = a + jitter * Eigen::MatrixXd::Identity(n, n);
    llt.compute(trial);
    if (llt.info() == Eigen::Success) {
      a = std::move(trial);
      return llt;
    }
  }
  throw std::runtime_error(
      "cholesky_with_jitter: matrix not positive definite after max jitter");
}

Eigen::VectorXd gaussian_from_precision(
    std::mt19937_64& rng, const Eigen::VectorXd& mean,
    const Eigen::LLT<Eigen::MatrixXd>& llt) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  // precision = L L^T  =>  cov = L^{-T} L^{-1}; x = mean + L^{-T} z.
  return mean + llt.matrixU().solve(z);
}

Eigen::VectorXd gaussian_from_covariance(std::mt19937_64& rng,
                                         const Eigen::VectorXd& mean,
                                         const Eigen::MatrixXd& cov) {
  Eigen::MatrixXd c = cov;
  const Eigen::LLT<Eigen::MatrixXd> llt = cholesky_with_jitter(c);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  return mean + llt.matrixL() * z;
}

Eigen::VectorXd dirichlet_draw(std::mt19937_64& rng,
                               const Eigen::VectorXd& concentration) {
  Eigen::VectorXd out(concentration.size());
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    std::gamma_distribution<double> gamma(concentration[j], 1.0);
    out[j] = gamma(rng);
  }
  const double total = out.sum();
  if (total <= 0.0) {
    // All-zero Gamma draws can only happen by catastrophic underflow.
    return Eigen::VectorXd::Constant(out.size(),
                                     1.0 / static_cast<double>(out.size()));
  }
  return out / total;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace fshawkes
