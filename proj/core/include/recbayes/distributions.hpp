#pragma once

#include <Eigen/Dense>

#include "recbayes/rng.hpp"

namespace rb::dist {

struct GaussianParams {
  double mean = 0.0;
  double variance = 1.0;  // > 0
};

// Inverse-gamma with density kernel (x)^{-(shape+1)} exp(-1 / (scale * x)).
// NOTE the second parameter: conventions for IG vary, and this codebase
// follows the conjugate-update convention where the posterior scale is
// scale_tilde = 1 / (sum_of_squares/2 + 1/scale). Equivalently,
// 1/X ~ Gamma(shape, scale) with the usual shape/scale Gamma. The analytic
// mean is 1 / (scale * (shape - 1)) for shape > 1.
struct InverseGammaParams {
  double shape = 1.0;  // > 0
  double scale = 1.0;  // > 0
};

// Scaled inverse chi-squared with degrees of freedom `dof` and scale `scale`:
// density kernel (x)^{-(dof/2+1)} exp(-dof*scale / (2x)). dof = scale = 0 is
// the improper 1/x prior flag; it may parameterize updates but is never
// sampled from directly.
struct ScaledInvChiSqParams {
  double dof = 1.0;    // >= 0
  double scale = 1.0;  // >= 0
};

struct BetaParams {
  double a = 1.0;  // > 0
  double b = 1.0;  // > 0
};

struct MvnParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // symmetric positive definite
};

// The two variance parameterizations are interconvertible:
// ScaledInvChiSq(dof, scale) == InverseGamma(dof/2, 2/(dof*scale)).
InverseGammaParams to_inverse_gamma(const ScaledInvChiSqParams& p);

double log_density_normal(double x, const GaussianParams& p);
double log_density_mvn(const Eigen::VectorXd& y, const MvnParams& p);
double log_mass_poisson(long long y, double lambda);
double log_density_inverse_gamma(double x, const InverseGammaParams& p);
double log_density_scaled_inv_chi_sq(double x, const ScaledInvChiSqParams& p);
// Half-normal with scale (standard-deviation-like) parameter gamma, support x >= 0.
double log_density_half_normal(double x, double gamma);

double sample_normal(const GaussianParams& p, Rng& rng);
double sample_inverse_gamma(const InverseGammaParams& p, Rng& rng);
double sample_scaled_inv_chi_sq(const ScaledInvChiSqParams& p, Rng& rng);
double sample_beta(const BetaParams& p, Rng& rng);
double sample_uniform(double lo, double hi, Rng& rng);
double sample_half_normal(double gamma, Rng& rng);
Eigen::VectorXd sample_mvn(const MvnParams& p, Rng& rng);

}  // namespace rb::dist
