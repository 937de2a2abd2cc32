#pragma once

#include <optional>
#include <vector>

#include "recbayes/distributions.hpp"
#include "recbayes/engine.hpp"

namespace rb::models {

// Dynamic count model per site s: y_{s,t} ~ Pois(lambda_{s,t}),
// log lambda_{s,1} ~ N(mu1, sigma21),
// log lambda_{s,t} ~ N(phi_s + log lambda_{s,t-1}, sigma2_s),
// phi_s ~ N(0, sigma2_phi), sigma2_s ~ IG(alpha, beta).
// The likelihood factorizes over sites, so sites are fit independently;
// missing counts drop the observation factor from that year's
// full conditional.
struct PoissonDynModel {
  // counts[s][t], 0-based year index; nullopt marks a missing survey year.
  std::vector<std::vector<std::optional<long long>>> counts;

  struct Hyper {
    double mu1 = 8.7;
    double sigma21 = 1.69;
    double sigma2_phi = 1.0;
    double alpha = 1.0;
    double beta = 20.0;
  };
  Hyper hyper;

  // Random-walk proposal variance for the log-intensity updates; adapted
  // multiplicatively toward the target acceptance rate during burn-in.
  double tune_var = 0.1;

  std::size_t sites() const { return counts.size(); }
  Eigen::Index years(std::size_t s) const { return static_cast<Eigen::Index>(counts[s].size()); }
  void validate() const;
};

// Column names for one site: phi_s, sigma2_s, lambda_s_1 .. lambda_s_T.
std::vector<std::string> poisson_site_param_names(std::size_t site, Eigen::Index t_total);

// Log full conditional of log lambda_{s,t} evaluated at `value`, holding the
// rest of `ell` fixed: observation factor (when surveyed) times the one or
// two adjacent transition densities, with the initial-state prior at t = 0.
double poisson_latent_log_conditional(const PoissonDynModel& m, std::size_t site,
                                      Eigen::Index t, double value,
                                      const Eigen::VectorXd& ell, double phi, double sigma2);

dist::GaussianParams poisson_phi_full_conditional(const PoissonDynModel& m, std::size_t site,
                                                  const Eigen::VectorXd& ell, double sigma2);
dist::InverseGammaParams poisson_sigma2_full_conditional(const PoissonDynModel& m,
                                                         std::size_t site,
                                                         const Eigen::VectorXd& ell, double phi);

// Per-site log joint of counts, latent log intensities, and parameters.
double poisson_site_log_joint(const PoissonDynModel& m, std::size_t site,
                              const Eigen::VectorXd& ell, double phi, double sigma2);

// One site: conjugate phi_s and sigma2_s updates plus random-walk Metropolis
// sweeps over log lambda_{s,t}. Output columns per poisson_site_param_names
// (lambda on the natural scale).
engine::StageResult poisson_dyn_site_fit(const PoissonDynModel& m, std::size_t site,
                                         const engine::StageConfig& cfg);

// All sites, fit concurrently on per-site rng streams; columns concatenated.
engine::StageResult poisson_dyn_full_fit(const PoissonDynModel& m,
                                         const engine::StageConfig& cfg);

// Online update: for each site, extend every stage-1 draw with predictive
// lambda_{T+1}, lambda_{T+2} from that draw's (phi, sigma2), then run the
// pool-indexed chain whose M-H ratio is the Poisson mass of the new count.
// stage1 must hold the per-site columns produced by poisson_dyn_full_fit on
// t = 1..T; new_counts[s] is y_{s,T+2}.
engine::StageResult poisson_dyn_online_update(
    const PoissonDynModel& m, const SampleMatrix& stage1,
    const std::vector<long long>& new_counts, const engine::StageConfig& cfg,
    engine::ResampleStrategy strategy = engine::ResampleStrategy::kWithReplacement);

struct PoissonSyntheticSpec {
  int sites = 2;
  int t_obs = 36;       // years with survey effort before the update window
  int extra_years = 2;  // the unsurveyed year T+1 and the update year T+2
  int missing_year = 0; // 1-based; 0 means T+1
  double mu1 = 8.7;
  double sigma21 = 1.69;
  double phi_sd = 0.03;    // truth scale for the site trends
  double sigma2_s = 0.04;  // truth process variance
};

struct PoissonSyntheticTruth {
  Eigen::VectorXd phi;
  Eigen::VectorXd sigma2;
  Eigen::MatrixXd lambda;  // sites x total years
};

// Sea-lion-like series: S sites over t_obs + extra_years years with the
// designated year missing at every site.
PoissonDynModel make_synthetic_poisson(const PoissonSyntheticSpec& spec, Rng& rng,
                                       PoissonSyntheticTruth* truth = nullptr);

}  // namespace rb::models
