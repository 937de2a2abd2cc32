#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace rb {

// Cholesky factorization with the escalating jitter policy: on failure add
// 1e-10 * mean(diag) to the diagonal and retry, escalating 10x, at most 3
// jittered attempts; still failing is a SingularError. Near-singular Matern
// matrices at close spatial pairs are the expected trigger.
Eigen::LLT<Eigen::MatrixXd> chol_with_jitter(const Eigen::MatrixXd& m);

// log |A| from its lower-triangular Cholesky factor.
double log_det_from_chol(const Eigen::LLT<Eigen::MatrixXd>& llt);

// Rows/cols of m restricted to the given indices.
Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m,
                          const std::vector<Eigen::Index>& rows,
                          const std::vector<Eigen::Index>& cols);

Eigen::VectorXd subvector(const Eigen::VectorXd& v,
                          const std::vector<Eigen::Index>& idx);

Eigen::MatrixXd subrows(const Eigen::MatrixXd& m,
                        const std::vector<Eigen::Index>& rows);

// Static contiguous partition of [0, n) over `workers` threads; fn(i) must be
// independent across i. Results are scheduling-independent by construction.
// Exceptions are captured and rethrown on the calling thread.
void parallel_for(Eigen::Index n, int workers,
                  const std::function<void(Eigen::Index)>& fn);

}  // namespace rb
