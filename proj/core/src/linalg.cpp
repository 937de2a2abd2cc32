#include "recbayes/linalg.hpp"

#include <exception>
#include <mutex>
#include <thread>

#include "recbayes/errors.hpp"

namespace rb {

Eigen::LLT<Eigen::MatrixXd> chol_with_jitter(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt;

  const double mean_diag = m.diagonal().mean();
  if (!(mean_diag > 0.0)) {
    throw SingularError("covariance has non-positive mean diagonal; cannot jitter");
  }
  double eps = 1e-10 * mean_diag;
  for (int attempt = 0; attempt < 3; ++attempt, eps *= 10.0) {
    Eigen::MatrixXd jittered = m;
    jittered.diagonal().array() += eps;
    llt.compute(jittered);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw SingularError("covariance not positive definite after jitter escalation");
}

double log_det_from_chol(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m,
                          const std::vector<Eigen::Index>& rows,
                          const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

Eigen::VectorXd subvector(const Eigen::VectorXd& v,
                          const std::vector<Eigen::Index>& idx) {
  Eigen::VectorXd out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

Eigen::MatrixXd subrows(const Eigen::MatrixXd& m,
                        const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = m.row(rows[i]);
  return out;
}

void parallel_for(Eigen::Index n, int workers,
                  const std::function<void(Eigen::Index)>& fn) {
  if (n <= 0) return;
  if (workers < 1) throw ConfigError("parallel_for: workers must be >= 1");
  const Eigen::Index nthreads = std::min<Eigen::Index>(workers, n);
  if (nthreads == 1) {
    for (Eigen::Index i = 0; i < n; ++i) fn(i);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(nthreads);
  for (Eigen::Index t = 0; t < nthreads; ++t) {
    const Eigen::Index lo = t * n / nthreads;
    const Eigen::Index hi = (t + 1) * n / nthreads;
    threads.emplace_back([&, lo, hi] {
      try {
        for (Eigen::Index i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace rb
