#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "recbayes/engine.hpp"
#include "recbayes/gaussian_process.hpp"

namespace rb::models {

// Geostatistical model y ~ N(X beta, sigma2((1-tau2)R(phi) + tau2 I)) with a
// flat prior on beta (Sigma_beta^{-1} = 0), Jeffreys scaled-inv-chi-squared
// prior on sigma2 (alpha1 = alpha2 = 0), phi ~ half-N(gamma), tau2 ~ Unif(0,1).
// The improper priors enter only as limits inside the conjugate updates.
struct GeoModel {
  gp::SpatialDomain domain;
  Eigen::MatrixXd X;  // n x p design: intercept, easting, northing
  Eigen::VectorXd y;

  struct Priors {
    double alpha1 = 0.0;  // sigma2 ~ Inv-chi2(alpha1, alpha2); 0,0 = Jeffreys
    double alpha2 = 0.0;
    double gamma = 0.05;  // phi ~ half-N(gamma), scale parameterization
  };
  Priors priors;

  // Fix (phi, tau2) and skip their M-H update; used when the covariance
  // parameters are known.
  std::optional<std::pair<double, double>> fixed_phi_tau2;

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return X.cols(); }
  void validate() const;
  GeoModel restricted(const std::vector<Eigen::Index>& idx) const;
};

// Parameter column layout shared by every geostatistical SampleMatrix:
// beta_1..beta_p, sigma2, phi, tau2.
std::vector<std::string> geo_param_names(Eigen::Index p);

// Log joint density of data and parameters (improper prior terms included
// up to their defining kernels). Density-ratio oracle hook.
double geo_log_joint(const GeoModel& m, const Eigen::VectorXd& beta, double sigma2,
                     double phi, double tau2);

// Scaled-inv-chi-squared full conditional for sigma2 at the given state.
dist::ScaledInvChiSqParams geo_sigma2_full_conditional(const GeoModel& m,
                                                       const Eigen::VectorXd& beta,
                                                       double phi, double tau2);

// MCMC fit: conjugate beta and sigma2 updates, joint (phi, tau2) random-walk
// M-H with multiplicative step adaptation toward the target acceptance rate
// during burn-in only. Acceptance rate reported under "phi_tau2".
engine::StageResult geo_full_fit(const GeoModel& m, const engine::StageConfig& cfg);

// Conditional log likelihood of partition block j given earlier blocks, as a
// function of a (beta, sigma2, phi, tau2) sample row. Prefetch hook.
std::function<double(Eigen::Ref<const Eigen::RowVectorXd>)> geo_conditional_loglik_fn(
    const GeoModel& m, const gp::PartitionIndex& partition, std::size_t block_j);

struct GeoPprbOptions {
  engine::ResampleStrategy strategy = engine::ResampleStrategy::kWithReplacement;
  // Stage-j (j >= 2) chain length; 0 means cfg.iterations.
  Eigen::Index stage_iterations = 0;
};

// Six-step PP-RB pipeline: stage 1 fits block 1 with geo_full_fit, then for
// each later block prefetches the conditional log likelihood over the pool
// and runs a pool-indexed M-H chain. Returns every stage's posterior so
// interval narrowing across stages can be reported.
std::vector<engine::StageResult> geo_pprb_fit(const GeoModel& m,
                                              const gp::PartitionIndex& partition,
                                              const engine::StageConfig& cfg,
                                              const GeoPprbOptions& options = {});

struct GeoSyntheticSpec {
  int n = 120;
  Eigen::Vector3d beta{1.0, 2.0, -1.0};
  double sigma2 = 1.0;
  double phi = 0.1;
  double tau2 = 0.2;
};

// SST-like synthetic instance: a near-square grid of n locations in [0,1]^2
// with the response drawn from the model at the given truth.
GeoModel make_synthetic_geo(const GeoSyntheticSpec& spec, Rng& rng);

}  // namespace rb::models
