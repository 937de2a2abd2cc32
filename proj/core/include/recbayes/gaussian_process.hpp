#pragma once

#include <Eigen/Dense>
#include <vector>

#include "recbayes/distributions.hpp"

namespace rb::gp {

// Spatial locations scaled into [0,1]^2. Both axes share one scale factor
// (the larger coordinate span) so Euclidean distances stay isotropic; the
// affine map from raw coordinates is recorded for reporting.
struct SpatialDomain {
  Eigen::MatrixX2d coords;  // scaled
  struct Scaling {
    double x_offset = 0.0;
    double y_offset = 0.0;
    double scale = 1.0;  // raw = scaled * scale + offset
  };
  Scaling scaling;
  Eigen::MatrixXd dist;  // pairwise Euclidean distances on scaled coords

  Eigen::Index size() const { return coords.rows(); }

  static SpatialDomain from_raw(const Eigen::MatrixX2d& raw);
  // Coordinates already in [0,1]^2; identity scaling.
  static SpatialDomain from_scaled(const Eigen::MatrixX2d& scaled);
  SpatialDomain restricted(const std::vector<Eigen::Index>& idx) const;
};

// Sill sigma2, range phi, nugget proportion tau2; Matern smoothness fixed at 3/2.
struct CovarianceSpec {
  double sigma2 = 1.0;  // > 0
  double phi = 0.1;     // > 0
  double tau2 = 0.2;    // in (0,1)

  void validate() const;
};

// Ordered disjoint index blocks covering 0..n-1; block 0 is fit first.
struct PartitionIndex {
  std::vector<std::vector<Eigen::Index>> blocks;

  Eigen::Index total() const;
  void validate(Eigen::Index n) const;
  // Indices of blocks [0, j) concatenated in recursion order.
  std::vector<Eigen::Index> before(std::size_t j) const;

  static PartitionIndex consecutive(Eigen::Index n, int j_blocks);
  static PartitionIndex random(Eigen::Index n, int j_blocks, Rng& rng);
};

// Matern 3/2 correlation (1 + d/phi) exp(-d/phi).
double matern32_correlation(double d, double phi);

// sigma2 * ((1 - tau2) R(phi) + tau2 I); diagonal entries exactly sigma2.
Eigen::MatrixXd build_covariance(const SpatialDomain& domain, const CovarianceSpec& spec);
// Same, restricted to a subset of locations.
Eigen::MatrixXd build_covariance(const SpatialDomain& domain, const CovarianceSpec& spec,
                                 const std::vector<Eigen::Index>& subset);

// Gaussian conditional of block j given observed values on blocks 0..j-1
// (concatenated in block order). One Cholesky solve of the conditioning
// block; no explicit inverse.
dist::MvnParams conditional_gaussian(const Eigen::VectorXd& full_mean,
                                     const Eigen::MatrixXd& full_cov,
                                     const PartitionIndex& partition, std::size_t block_j,
                                     const Eigen::VectorXd& y_given);

// (log[y_1 | th], log[y_2 | th, y_1], ..., log[y_J | th, y_{1:(J-1)}]).
// Summing the entries recovers the joint log density.
Eigen::VectorXd partition_log_likelihoods(const SpatialDomain& domain,
                                          const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                          const PartitionIndex& partition,
                                          const Eigen::VectorXd& beta,
                                          const CovarianceSpec& spec);

// Single conditional term log[y_j | beta, spec, y_{1:(j-1)}], building the
// covariance only on the blocks involved. This is the prefetch workhorse.
double conditional_log_likelihood(const SpatialDomain& domain, const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y, const PartitionIndex& partition,
                                  std::size_t block_j, const Eigen::VectorXd& beta,
                                  const CovarianceSpec& spec);

}  // namespace rb::gp
