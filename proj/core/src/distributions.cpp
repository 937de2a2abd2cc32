#include "recbayes/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "recbayes/errors.hpp"
#include "recbayes/linalg.hpp"

namespace rb::dist {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
}

void require_positive(double x, const char* what) {
  require_finite(x, what);
  if (!(x > 0.0)) throw DomainError(std::string(what) + " must be > 0");
}

void validate_mvn(const MvnParams& p) {
  const Eigen::Index n = p.mean.size();
  if (p.covariance.rows() != n || p.covariance.cols() != n)
    throw DomainError("mvn: covariance dimensions do not match mean");
  if (n == 0) throw DomainError("mvn: empty parameters");
  const double scale = p.covariance.cwiseAbs().maxCoeff();
  const double asym = (p.covariance - p.covariance.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(scale, 1.0))
    throw DomainError("mvn: covariance is not symmetric");
}

}  // namespace

InverseGammaParams to_inverse_gamma(const ScaledInvChiSqParams& p) {
  if (!(p.dof > 0.0) || !(p.scale > 0.0))
    throw DomainError("scaled-inv-chi-sq: dof and scale must be > 0 to convert");
  return {p.dof / 2.0, 2.0 / (p.dof * p.scale)};
}

double log_density_normal(double x, const GaussianParams& p) {
  require_finite(x, "x");
  require_finite(p.mean, "mean");
  require_positive(p.variance, "variance");
  const double d = x - p.mean;
  return -0.5 * (kLog2Pi + std::log(p.variance) + d * d / p.variance);
}

double log_density_mvn(const Eigen::VectorXd& y, const MvnParams& p) {
  validate_mvn(p);
  if (y.size() != p.mean.size())
    throw DomainError("mvn: data dimension does not match mean");
  const auto llt = chol_with_jitter(p.covariance);
  // Triangular solve; the quadratic form is ||L^{-1}(y - mu)||^2.
  const Eigen::VectorXd z =
      llt.matrixL().solve(y - p.mean);
  const double n = static_cast<double>(y.size());
  return -0.5 * (n * kLog2Pi + log_det_from_chol(llt) + z.squaredNorm());
}

double log_mass_poisson(long long y, double lambda) {
  if (y < 0) throw DomainError("poisson: y must be a nonnegative integer");
  require_finite(lambda, "lambda");
  if (!(lambda > 0.0)) throw DomainError("poisson: lambda must be > 0");
  const double yd = static_cast<double>(y);
  return yd * std::log(lambda) - lambda - std::lgamma(yd + 1.0);
}

double log_density_inverse_gamma(double x, const InverseGammaParams& p) {
  require_positive(p.shape, "shape");
  require_positive(p.scale, "scale");
  require_finite(x, "x");
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return -(p.shape + 1.0) * std::log(x) - 1.0 / (p.scale * x) -
         p.shape * std::log(p.scale) - std::lgamma(p.shape);
}

double log_density_scaled_inv_chi_sq(double x, const ScaledInvChiSqParams& p) {
  return log_density_inverse_gamma(x, to_inverse_gamma(p));
}

double log_density_half_normal(double x, double gamma) {
  require_positive(gamma, "gamma");
  require_finite(x, "x");
  if (x < 0.0) return -std::numeric_limits<double>::infinity();
  return std::numbers::ln2 - 0.5 * (kLog2Pi + 2.0 * std::log(gamma)) -
         x * x / (2.0 * gamma * gamma);
}

double sample_normal(const GaussianParams& p, Rng& rng) {
  require_finite(p.mean, "mean");
  require_positive(p.variance, "variance");
  return p.mean + std::sqrt(p.variance) * rng.normal();
}

double sample_inverse_gamma(const InverseGammaParams& p, Rng& rng) {
  require_positive(p.shape, "shape");
  require_positive(p.scale, "scale");
  // 1/X ~ Gamma(shape, scale) under this parameterization.
  return 1.0 / rng.gamma(p.shape, p.scale);
}

double sample_scaled_inv_chi_sq(const ScaledInvChiSqParams& p, Rng& rng) {
  return sample_inverse_gamma(to_inverse_gamma(p), rng);
}

double sample_beta(const BetaParams& p, Rng& rng) {
  require_positive(p.a, "a");
  require_positive(p.b, "b");
  const double g1 = rng.gamma(p.a, 1.0);
  const double g2 = rng.gamma(p.b, 1.0);
  return g1 / (g1 + g2);
}

double sample_uniform(double lo, double hi, Rng& rng) {
  require_finite(lo, "lo");
  require_finite(hi, "hi");
  if (!(lo < hi)) throw DomainError("uniform: need lo < hi");
  return rng.uniform(lo, hi);
}

double sample_half_normal(double gamma, Rng& rng) {
  require_positive(gamma, "gamma");
  return std::abs(gamma * rng.normal());
}

Eigen::VectorXd sample_mvn(const MvnParams& p, Rng& rng) {
  validate_mvn(p);
  const auto llt = chol_with_jitter(p.covariance);
  Eigen::VectorXd z(p.mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return p.mean + Eigen::MatrixXd(llt.matrixL()) * z;
}

}  // namespace rb::dist
