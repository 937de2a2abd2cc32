#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "recbayes/diagnostics.hpp"
#include "recbayes/errors.hpp"
#include "recbayes/linalg.hpp"
#include "recbayes/models/geostat.hpp"

using namespace rb;
using namespace rb::models;

TEST_CASE("geostat model validation") {
  Rng rng(1);
  GeoModel m = make_synthetic_geo({.n = 20}, rng);
  CHECK_NOTHROW(m.validate());
  GeoModel bad = m;
  bad.X.col(2) = bad.X.col(1);  // rank deficient
  CHECK_THROWS_AS(bad.validate(), DataError);
}

TEST_CASE("sigma2 full conditional against the density-ratio oracle") {
  Rng rng(2);
  const GeoModel m = make_synthetic_geo({.n = 15}, rng);
  Eigen::VectorXd beta(3);
  beta << 0.8, 1.5, -0.7;
  const double phi = 0.12, tau2 = 0.3;
  const auto fc = geo_sigma2_full_conditional(m, beta, phi, tau2);
  CHECK(fc.dof == doctest::Approx(15.0));  // n + alpha1 with alpha1 = 0
  for (const auto& [x1, x2] : {std::pair{0.5, 1.5}, std::pair{0.9, 2.4}}) {
    const double cond_diff = dist::log_density_scaled_inv_chi_sq(x1, fc) -
                             dist::log_density_scaled_inv_chi_sq(x2, fc);
    const double joint_diff =
        geo_log_joint(m, beta, x1, phi, tau2) - geo_log_joint(m, beta, x2, phi, tau2);
    CHECK(cond_diff == doctest::Approx(joint_diff).epsilon(1e-8));
  }
}

TEST_CASE("beta full conditional against a brute-force oracle") {
  // With a flat prior, [beta | .] = N((X' Sigma^{-1} X)^{-1} X' Sigma^{-1} y, (X' Sigma^{-1} X)^{-1});
  // the oracle builds it with explicit inverses and checks density ratios
  // against the joint.
  Rng rng(3);
  const GeoModel m = make_synthetic_geo({.n = 12}, rng);
  const double sigma2 = 1.3, phi = 0.2, tau2 = 0.25;
  const Eigen::MatrixXd cov = gp::build_covariance(m.domain, {sigma2, phi, tau2});
  const Eigen::MatrixXd cov_inv = cov.inverse();
  const Eigen::MatrixXd a = m.X.transpose() * cov_inv * m.X;
  const Eigen::VectorXd mean = a.inverse() * (m.X.transpose() * cov_inv * m.y);
  const dist::MvnParams fc{mean, a.inverse()};

  Eigen::VectorXd b1(3), b2(3);
  b1 << 0.5, 1.0, -0.5;
  b2 << 1.5, 2.5, 0.5;
  const double cond_diff = dist::log_density_mvn(b1, fc) - dist::log_density_mvn(b2, fc);
  const double joint_diff =
      geo_log_joint(m, b1, sigma2, phi, tau2) - geo_log_joint(m, b2, sigma2, phi, tau2);
  CHECK(cond_diff == doctest::Approx(joint_diff).epsilon(1e-8));
}

TEST_CASE("fixed covariance parameters: posterior mean of beta equals GLS") {
  Rng rng(4);
  GeoSyntheticSpec spec;
  spec.n = 40;
  GeoModel m = make_synthetic_geo(spec, rng);
  m.fixed_phi_tau2 = {spec.phi, spec.tau2};

  engine::StageConfig cfg;
  cfg.iterations = 6000;
  cfg.burn_in = 1000;
  cfg.seed = 9;
  const auto fit = geo_full_fit(m, cfg);
  const auto summary = diag::summarize(fit.samples);

  // GLS oracle with explicit inverses (test-only route)
  const Eigen::MatrixXd w = gp::build_covariance(m.domain, {1.0, spec.phi, spec.tau2});
  const Eigen::MatrixXd w_inv = w.inverse();
  const Eigen::VectorXd gls =
      (m.X.transpose() * w_inv * m.X).inverse() * (m.X.transpose() * w_inv * m.y);
  for (int j = 0; j < 3; ++j) {
    const auto& p = summary.find("beta_" + std::to_string(j + 1));
    CHECK(std::abs(p.mean - gls(j)) < 4.0 * p.mcse + 1e-6);
  }
}

TEST_CASE("adaptive tuning reaches the target acceptance band") {
  Rng rng(5);
  const GeoModel m = make_synthetic_geo({.n = 50}, rng);
  engine::StageConfig cfg;
  cfg.iterations = 4000;
  cfg.burn_in = 1500;
  cfg.seed = 17;
  const auto fit = geo_full_fit(m, cfg);
  const double rate = fit.diag.acceptance_rates.at("phi_tau2");
  CHECK(rate >= 0.2);
  CHECK(rate <= 0.45);
}

TEST_CASE("pp-rb pipeline") {
  Rng rng(6);
  GeoSyntheticSpec spec;
  spec.n = 60;
  const GeoModel m = make_synthetic_geo(spec, rng);

  SUBCASE("stage structure and prefetch bookkeeping") {
    Rng prng(7);
    const auto part = gp::PartitionIndex::random(m.n(), 3, prng);
    engine::StageConfig cfg;
    cfg.iterations = 1500;
    cfg.burn_in = 500;
    cfg.seed = 23;
    cfg.workers = 2;
    const auto stages = geo_pprb_fit(m, part, cfg);
    REQUIRE(stages.size() == 3);
    CHECK(stages[0].samples.stage == 1);
    CHECK(stages[1].samples.stage == 2);
    CHECK(stages[2].samples.stage == 3);
    // stage chains default to cfg.iterations steps with no burn-in
    CHECK(stages[1].samples.rows() == 1500);
    CHECK(stages[1].diag.prefetch_ms > 0.0);
    CHECK(stages[1].diag.acceptance_rates.at("pool") > 0.0);
  }

  SUBCASE("J = 2 equal blocks: final posterior matches the full fit (means)") {
    const auto part = gp::PartitionIndex::consecutive(m.n(), 2);
    engine::StageConfig cfg;
    cfg.iterations = 8000;
    cfg.burn_in = 2000;
    cfg.seed = 29;
    cfg.workers = 4;
    GeoPprbOptions opt;
    opt.stage_iterations = 12000;
    const auto stages = geo_pprb_fit(m, part, cfg, opt);
    engine::StageConfig full_cfg = cfg;
    full_cfg.seed = 31;
    const auto full = geo_full_fit(m, full_cfg);
    const auto sum_rb = diag::summarize(stages.back().samples);
    const auto sum_full = diag::summarize(full.samples);
    for (const auto& name : {"beta_1", "beta_2", "beta_3", "sigma2"}) {
      const auto& a = sum_rb.find(name);
      const auto& b = sum_full.find(name);
      const double joint_se = std::sqrt(a.mcse * a.mcse + b.mcse * b.mcse);
      CHECK(std::abs(a.mean - b.mean) < 4.0 * joint_se);
    }
  }

  SUBCASE("prefetched stage chain identical to recomputing the conditional each step") {
    const auto part = gp::PartitionIndex::consecutive(m.n(), 2);
    engine::StageConfig cfg;
    cfg.iterations = 600;
    cfg.burn_in = 200;
    cfg.seed = 37;
    const auto stages = geo_pprb_fit(m, part, cfg);

    // replay stage 2 with direct conditional evaluations
    engine::ProposalPool pool;
    pool.samples = stages[0].samples;
    const auto loglik_fn = geo_conditional_loglik_fn(m, part, 1);
    Rng rng_replay = Rng::stream(cfg.seed, 1001);  // the pipeline's stage-2 stream
    engine::ChainState state;
    state.pool_index = static_cast<Eigen::Index>(rng_replay.integer(pool.size()));
    double cur_ll = loglik_fn(pool.samples.draws.row(state.pool_index));
    RowMajorMatrix replay(cfg.iterations, pool.samples.cols());
    for (Eigen::Index it = 0; it < cfg.iterations; ++it) {
      const auto prop = static_cast<Eigen::Index>(rng_replay.integer(pool.size()));
      const double prop_ll = loglik_fn(pool.samples.draws.row(prop));
      if (std::log(rng_replay.uniform()) < prop_ll - cur_ll) {
        state.pool_index = prop;
        cur_ll = prop_ll;
      }
      replay.row(it) = pool.samples.draws.row(state.pool_index);
    }
    CHECK((stages[1].samples.draws.array() == replay.array()).all());
  }
}

TEST_CASE("synthetic generator shape") {
  Rng rng(8);
  const GeoModel m = make_synthetic_geo({.n = 120}, rng);
  CHECK(m.n() == 120);
  CHECK(m.domain.coords.minCoeff() >= 0.0);
  CHECK(m.domain.coords.maxCoeff() <= 1.0);
  CHECK(m.X.col(0).isOnes());
  CHECK((m.X.col(1) - m.domain.coords.col(0)).norm() == 0.0);
}
