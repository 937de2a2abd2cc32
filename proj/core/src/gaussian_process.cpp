#include "recbayes/gaussian_process.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "recbayes/errors.hpp"
#include "recbayes/linalg.hpp"

namespace rb::gp {

namespace {

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixX2d& c) {
  const Eigen::Index n = c.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = (c.row(i) - c.row(j)).norm();
    }
  }
  return d;
}

}  // namespace

SpatialDomain SpatialDomain::from_raw(const Eigen::MatrixX2d& raw) {
  if (raw.rows() < 1) throw DataError("spatial domain: need at least one location");
  SpatialDomain d;
  d.scaling.x_offset = raw.col(0).minCoeff();
  d.scaling.y_offset = raw.col(1).minCoeff();
  const double span_x = raw.col(0).maxCoeff() - d.scaling.x_offset;
  const double span_y = raw.col(1).maxCoeff() - d.scaling.y_offset;
  d.scaling.scale = std::max({span_x, span_y, 0.0});
  if (d.scaling.scale == 0.0) d.scaling.scale = 1.0;  // single point / degenerate extent
  d.coords.resize(raw.rows(), 2);
  d.coords.col(0) = (raw.col(0).array() - d.scaling.x_offset) / d.scaling.scale;
  d.coords.col(1) = (raw.col(1).array() - d.scaling.y_offset) / d.scaling.scale;
  d.dist = pairwise_distances(d.coords);
  return d;
}

SpatialDomain SpatialDomain::from_scaled(const Eigen::MatrixX2d& scaled) {
  if (scaled.rows() < 1) throw DataError("spatial domain: need at least one location");
  if (scaled.minCoeff() < 0.0 || scaled.maxCoeff() > 1.0)
    throw DataError("spatial domain: scaled coordinates must lie in [0,1]^2");
  SpatialDomain d;
  d.coords = scaled;
  d.dist = pairwise_distances(d.coords);
  return d;
}

SpatialDomain SpatialDomain::restricted(const std::vector<Eigen::Index>& idx) const {
  SpatialDomain d;
  d.scaling = scaling;
  d.coords.resize(idx.size(), 2);
  for (std::size_t i = 0; i < idx.size(); ++i) d.coords.row(i) = coords.row(idx[i]);
  d.dist = submatrix(dist, idx, idx);
  return d;
}

void CovarianceSpec::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("sigma2 must be > 0");
  if (!(phi > 0.0) || !std::isfinite(phi)) throw DomainError("phi must be > 0");
  if (!(tau2 > 0.0) || !(tau2 < 1.0)) throw DomainError("tau2 must lie in (0,1)");
}

Eigen::Index PartitionIndex::total() const {
  Eigen::Index n = 0;
  for (const auto& b : blocks) n += static_cast<Eigen::Index>(b.size());
  return n;
}

void PartitionIndex::validate(Eigen::Index n) const {
  if (blocks.empty()) throw ConfigError("partition: need at least one block");
  std::vector<char> seen(n, 0);
  for (const auto& b : blocks) {
    if (b.empty()) throw ConfigError("partition: empty block");
    for (const auto i : b) {
      if (i < 0 || i >= n) throw ConfigError("partition: index out of range");
      if (seen[i]) throw ConfigError("partition: blocks are not disjoint");
      seen[i] = 1;
    }
  }
  if (total() != n) throw ConfigError("partition: blocks do not cover all indices");
}

std::vector<Eigen::Index> PartitionIndex::before(std::size_t j) const {
  std::vector<Eigen::Index> idx;
  for (std::size_t b = 0; b < j && b < blocks.size(); ++b)
    idx.insert(idx.end(), blocks[b].begin(), blocks[b].end());
  return idx;
}

PartitionIndex PartitionIndex::consecutive(Eigen::Index n, int j_blocks) {
  if (j_blocks < 1 || j_blocks > n) throw ConfigError("partition: invalid block count");
  PartitionIndex p;
  p.blocks.resize(j_blocks);
  for (int b = 0; b < j_blocks; ++b) {
    const Eigen::Index lo = b * n / j_blocks;
    const Eigen::Index hi = (b + 1) * n / j_blocks;
    for (Eigen::Index i = lo; i < hi; ++i) p.blocks[b].push_back(i);
  }
  return p;
}

PartitionIndex PartitionIndex::random(Eigen::Index n, int j_blocks, Rng& rng) {
  if (j_blocks < 1 || j_blocks > n) throw ConfigError("partition: invalid block count");
  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.integer(i + 1));
    std::swap(perm[i], perm[j]);
  }
  PartitionIndex p;
  p.blocks.resize(j_blocks);
  for (int b = 0; b < j_blocks; ++b) {
    const Eigen::Index lo = b * n / j_blocks;
    const Eigen::Index hi = (b + 1) * n / j_blocks;
    p.blocks[b].assign(perm.begin() + lo, perm.begin() + hi);
    std::sort(p.blocks[b].begin(), p.blocks[b].end());
  }
  return p;
}

double matern32_correlation(double d, double phi) {
  if (!(phi > 0.0) || !std::isfinite(phi)) throw DomainError("phi must be > 0");
  if (d < 0.0 || !std::isfinite(d)) throw DomainError("distance must be >= 0");
  const double u = d / phi;
  return (1.0 + u) * std::exp(-u);
}

namespace {

Eigen::MatrixXd covariance_from_dist(const Eigen::MatrixXd& dist,
                                     const CovarianceSpec& spec) {
  spec.validate();
  const Eigen::Index n = dist.rows();
  Eigen::MatrixXd cov(n, n);
  const double off_scale = spec.sigma2 * (1.0 - spec.tau2);
  for (Eigen::Index i = 0; i < n; ++i) {
    cov(i, i) = spec.sigma2;  // (1 - tau2) * 1 + tau2, times sigma2
    for (Eigen::Index j = i + 1; j < n; ++j) {
      cov(i, j) = cov(j, i) = off_scale * matern32_correlation(dist(i, j), spec.phi);
    }
  }
  return cov;
}

}  // namespace

Eigen::MatrixXd build_covariance(const SpatialDomain& domain, const CovarianceSpec& spec) {
  return covariance_from_dist(domain.dist, spec);
}

Eigen::MatrixXd build_covariance(const SpatialDomain& domain, const CovarianceSpec& spec,
                                 const std::vector<Eigen::Index>& subset) {
  return covariance_from_dist(submatrix(domain.dist, subset, subset), spec);
}

dist::MvnParams conditional_gaussian(const Eigen::VectorXd& full_mean,
                                     const Eigen::MatrixXd& full_cov,
                                     const PartitionIndex& partition, std::size_t block_j,
                                     const Eigen::VectorXd& y_given) {
  if (block_j >= partition.blocks.size())
    throw ConfigError("conditional_gaussian: block index out of range");
  const auto& cur = partition.blocks[block_j];
  const auto prev = partition.before(block_j);

  dist::MvnParams out;
  out.mean = subvector(full_mean, cur);
  out.covariance = submatrix(full_cov, cur, cur);
  if (prev.empty()) return out;  // empty conditioning set: marginal unchanged

  if (y_given.size() != static_cast<Eigen::Index>(prev.size()))
    throw ConfigError("conditional_gaussian: observed vector does not match conditioning set");

  const Eigen::MatrixXd cov_pp = submatrix(full_cov, prev, prev);
  const Eigen::MatrixXd cov_cp = submatrix(full_cov, cur, prev);
  const auto llt = chol_with_jitter(cov_pp);
  const Eigen::VectorXd resid = y_given - subvector(full_mean, prev);
  out.mean += cov_cp * llt.solve(resid);
  out.covariance -= cov_cp * llt.solve(cov_cp.transpose());
  out.covariance = ((out.covariance + out.covariance.transpose()) / 2.0).eval();
  return out;
}

Eigen::VectorXd partition_log_likelihoods(const SpatialDomain& domain,
                                          const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                          const PartitionIndex& partition,
                                          const Eigen::VectorXd& beta,
                                          const CovarianceSpec& spec) {
  const Eigen::Index n = domain.size();
  partition.validate(n);
  if (X.rows() != n || y.size() != n || X.cols() != beta.size())
    throw DataError("partition_log_likelihoods: dimension mismatch");

  const Eigen::VectorXd mean = X * beta;
  const Eigen::MatrixXd cov = build_covariance(domain, spec);
  Eigen::VectorXd out(partition.blocks.size());
  for (std::size_t j = 0; j < partition.blocks.size(); ++j) {
    const Eigen::VectorXd y_prev = subvector(y, partition.before(j));
    const dist::MvnParams cond = conditional_gaussian(mean, cov, partition, j, y_prev);
    out(j) = dist::log_density_mvn(subvector(y, partition.blocks[j]), cond);
  }
  return out;
}

double conditional_log_likelihood(const SpatialDomain& domain, const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y, const PartitionIndex& partition,
                                  std::size_t block_j, const Eigen::VectorXd& beta,
                                  const CovarianceSpec& spec) {
  if (block_j >= partition.blocks.size())
    throw ConfigError("conditional_log_likelihood: block index out of range");
  // Work on prev + cur indices only; cost scales with n_{1:j}, not n.
  const auto prev = partition.before(block_j);
  const auto& cur = partition.blocks[block_j];
  std::vector<Eigen::Index> active = prev;
  active.insert(active.end(), cur.begin(), cur.end());

  const Eigen::MatrixXd cov = build_covariance(domain, spec, active);
  const Eigen::MatrixXd x_active = subrows(X, active);
  const Eigen::VectorXd mean = x_active * beta;

  PartitionIndex local;
  std::vector<Eigen::Index> local_prev(prev.size()), local_cur(cur.size());
  std::iota(local_prev.begin(), local_prev.end(), 0);
  std::iota(local_cur.begin(), local_cur.end(), static_cast<Eigen::Index>(prev.size()));
  if (!local_prev.empty()) local.blocks.push_back(local_prev);
  local.blocks.push_back(local_cur);
  const std::size_t local_j = local.blocks.size() - 1;

  const dist::MvnParams cond =
      conditional_gaussian(mean, cov, local, local_j, subvector(y, prev));
  return dist::log_density_mvn(subvector(y, cur), cond);
}

}  // namespace rb::gp
