#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "recbayes/diagnostics.hpp"
#include "recbayes/errors.hpp"
#include "recbayes/models/poisson_dyn.hpp"

using namespace rb;
using namespace rb::models;

namespace {

PoissonDynModel toy_model() {
  PoissonDynModel m;
  m.counts = {{100, 120, std::nullopt, 140, 150},
              {200, std::nullopt, 210, 230, 220}};
  return m;
}

}  // namespace

TEST_CASE("model validation") {
  PoissonDynModel m = toy_model();
  CHECK_NOTHROW(m.validate());
  m.counts[0][0] = -3;
  CHECK_THROWS_AS(m.validate(), DataError);
  m = toy_model();
  m.counts[0] = {100};
  CHECK_THROWS_AS(m.validate(), DataError);
}

TEST_CASE("interior-t full conditional equals the hand-assembled three-factor product") {
  const PoissonDynModel m = toy_model();
  Eigen::VectorXd ell(5);
  ell << 4.6, 4.8, 4.9, 5.0, 5.05;
  const double phi = 0.05, sigma2 = 0.04;
  const double v = 4.85;

  const double lib = poisson_latent_log_conditional(m, 0, 1, v, ell, phi, sigma2);
  // observation factor, transition into t, transition out of t
  const double hand = dist::log_mass_poisson(120, std::exp(v)) +
                      dist::log_density_normal(v, {phi + ell(0), sigma2}) +
                      dist::log_density_normal(ell(2), {phi + v, sigma2});
  CHECK(lib == doctest::Approx(hand).epsilon(1e-12));

  SUBCASE("t = 1 uses the initial-state prior") {
    const double first = poisson_latent_log_conditional(m, 0, 0, v, ell, phi, sigma2);
    const double hand_first = dist::log_mass_poisson(100, std::exp(v)) +
                              dist::log_density_normal(v, {m.hyper.mu1, m.hyper.sigma21}) +
                              dist::log_density_normal(ell(1), {phi + v, sigma2});
    CHECK(first == doctest::Approx(hand_first).epsilon(1e-12));
  }
  SUBCASE("t = T has no forward factor") {
    const double last = poisson_latent_log_conditional(m, 0, 4, v, ell, phi, sigma2);
    const double hand_last = dist::log_mass_poisson(150, std::exp(v)) +
                             dist::log_density_normal(v, {phi + ell(3), sigma2});
    CHECK(last == doctest::Approx(hand_last).epsilon(1e-12));
  }
  SUBCASE("missing year drops the observation factor only") {
    const double missing = poisson_latent_log_conditional(m, 0, 2, v, ell, phi, sigma2);
    const double hand_missing = dist::log_density_normal(v, {phi + ell(1), sigma2}) +
                                dist::log_density_normal(ell(3), {phi + v, sigma2});
    CHECK(missing == doctest::Approx(hand_missing).epsilon(1e-12));
  }
}

TEST_CASE("conjugate full conditionals against the density-ratio oracle") {
  const PoissonDynModel m = toy_model();
  Eigen::VectorXd ell(5);
  ell << 4.6, 4.8, 4.9, 5.0, 5.05;
  const double phi = 0.04, sigma2 = 0.05;

  SUBCASE("phi") {
    const auto fc = poisson_phi_full_conditional(m, 0, ell, sigma2);
    const double cond_diff =
        dist::log_density_normal(0.2, fc) - dist::log_density_normal(phi, fc);
    const double joint_diff = poisson_site_log_joint(m, 0, ell, 0.2, sigma2) -
                              poisson_site_log_joint(m, 0, ell, phi, sigma2);
    CHECK(cond_diff == doctest::Approx(joint_diff).epsilon(1e-8));
  }
  SUBCASE("sigma2") {
    const auto fc = poisson_sigma2_full_conditional(m, 0, ell, phi);
    const double cond_diff = dist::log_density_inverse_gamma(0.1, fc) -
                             dist::log_density_inverse_gamma(sigma2, fc);
    const double joint_diff = poisson_site_log_joint(m, 0, ell, phi, 0.1) -
                              poisson_site_log_joint(m, 0, ell, phi, sigma2);
    CHECK(cond_diff == doctest::Approx(joint_diff).epsilon(1e-8));
  }
}

TEST_CASE("making a year missing removes exactly its observation factor") {
  PoissonDynModel with = toy_model();
  PoissonDynModel without = toy_model();
  without.counts[1][3] = std::nullopt;
  Eigen::VectorXd ell(5);
  ell << 5.2, 5.3, 5.35, 5.4, 5.38;
  const double phi = 0.03, sigma2 = 0.02;
  const double diff = poisson_site_log_joint(with, 1, ell, phi, sigma2) -
                      poisson_site_log_joint(without, 1, ell, phi, sigma2);
  CHECK(diff == doctest::Approx(dist::log_mass_poisson(230, std::exp(ell(3)))).epsilon(1e-12));
}

TEST_CASE("no-trend data: 95% CI for phi contains zero") {
  Rng rng(21);
  PoissonSyntheticSpec spec;
  spec.sites = 1;
  spec.t_obs = 60;
  spec.extra_years = 0;
  spec.missing_year = 1;  // keep one missing year inside the series
  spec.phi_sd = 1e-9;     // truth is effectively zero trend
  const auto m = make_synthetic_poisson(spec, rng);
  engine::StageConfig cfg;
  cfg.iterations = 6000;
  cfg.burn_in = 2000;
  cfg.seed = 22;
  const auto fit = poisson_dyn_full_fit(m, cfg);
  const auto p = diag::summarize(fit.samples).find("phi_1");
  CHECK(p.q025 < 0.0);
  CHECK(p.q975 > 0.0);
  CHECK(std::abs(p.mean) < 0.05);
}

TEST_CASE("online update") {
  Rng rng(23);
  // Small-count scale: the Poisson likelihood is then wide relative to the
  // two-step predictive spread, which keeps the pool chain well mixed.
  PoissonSyntheticSpec spec;
  spec.sites = 2;
  spec.t_obs = 12;
  spec.extra_years = 2;  // T+1 missing, observe T+2
  spec.mu1 = 2.2;
  spec.sigma21 = 0.1;
  spec.sigma2_s = 0.02;
  PoissonSyntheticTruth truth;
  const auto full_model = make_synthetic_poisson(spec, rng, &truth);

  // stage-1 model sees years 1..T only
  PoissonDynModel stage1_model = full_model;
  for (auto& site : stage1_model.counts) site.resize(spec.t_obs);
  stage1_model.hyper.mu1 = spec.mu1;
  stage1_model.hyper.sigma21 = spec.sigma21;
  PoissonDynModel refit_model = full_model;
  refit_model.hyper = stage1_model.hyper;

  engine::StageConfig cfg;
  cfg.iterations = 20000;
  cfg.burn_in = 4000;
  cfg.seed = 24;
  cfg.workers = 2;
  const auto stage1 = poisson_dyn_full_fit(stage1_model, cfg);

  // Put the new datum at the prior-predictive center: the median over pool
  // rows of the two-step forward intensity.
  std::vector<long long> new_counts(2);
  for (int s = 0; s < 2; ++s) {
    const std::string tag = std::to_string(s + 1);
    const Eigen::VectorXd phi = stage1.samples.column("phi_" + tag);
    const Eigen::VectorXd lam_t =
        stage1.samples.column("lambda_" + tag + "_" + std::to_string(spec.t_obs));
    std::vector<double> fwd(phi.size());
    for (Eigen::Index i = 0; i < phi.size(); ++i)
      fwd[i] = lam_t(i) * std::exp(2.0 * phi(i));
    new_counts[s] = static_cast<long long>(std::llround(diag::quantile_type7(fwd, 0.5)));
  }

  engine::StageConfig update_cfg = cfg;
  update_cfg.iterations = 30000;
  update_cfg.burn_in = 0;
  const auto updated =
      poisson_dyn_online_update(stage1_model, stage1.samples, new_counts, update_cfg);

  SUBCASE("joint sample includes the new latent states") {
    CHECK(updated.samples.has("lambda_1_13"));
    CHECK(updated.samples.has("lambda_1_14"));
    CHECK(updated.samples.has("lambda_2_14"));
    CHECK(updated.samples.stage == 2);
  }
  SUBCASE("acceptance is high when the datum sits at the predictive mode") {
    // new counts were generated from the model, so they sit in the bulk of
    // the predictive distribution
    CHECK(updated.diag.acceptance_rates.at("site_1") > 0.5);
    CHECK(updated.diag.acceptance_rates.at("site_2") > 0.5);
  }
  SUBCASE("lambda_{T+2} posterior matches a full refit within 4 joint MC SEs") {
    refit_model.counts[0][spec.t_obs + 1] = new_counts[0];
    refit_model.counts[1][spec.t_obs + 1] = new_counts[1];
    engine::StageConfig refit_cfg = cfg;
    refit_cfg.seed = 25;
    refit_cfg.iterations = 30000;
    refit_cfg.burn_in = 6000;
    const auto refit = poisson_dyn_full_fit(refit_model, refit_cfg);
    const auto sum_up = diag::summarize(updated.samples);
    const auto sum_re = diag::summarize(refit.samples);
    for (int s = 1; s <= 2; ++s) {
      const std::string name = "lambda_" + std::to_string(s) + "_14";
      const auto& a = sum_up.find(name);
      const auto& b = sum_re.find(name);
      const double joint_se = std::sqrt(a.mcse * a.mcse + b.mcse * b.mcse);
      CHECK(std::abs(a.mean - b.mean) < 4.0 * joint_se);
    }
  }
  SUBCASE("negative new count is a data error") {
    CHECK_THROWS_AS(
        poisson_dyn_online_update(stage1_model, stage1.samples, {-1, 5}, update_cfg),
        DataError);
  }
}

TEST_CASE("synthetic generator: exactly one designated missing year") {
  Rng rng(26);
  PoissonSyntheticSpec spec;  // defaults: T=36 plus 2 extra years, T+1 missing
  const auto m = make_synthetic_poisson(spec, rng);
  REQUIRE(m.sites() == 2);
  for (std::size_t s = 0; s < 2; ++s) {
    CHECK(m.years(s) == 38);
    int missing = 0;
    for (const auto& y : m.counts[s]) missing += y ? 0 : 1;
    CHECK(missing == 1);
    CHECK_FALSE(m.counts[s][36].has_value());  // year T+1
  }
}
