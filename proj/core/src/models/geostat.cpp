#include "recbayes/models/geostat.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "recbayes/errors.hpp"
#include "recbayes/linalg.hpp"

namespace rb::models {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool verbose_logging() {
  const char* level = std::getenv("RB_LOG");
  return level != nullptr && std::string(level) != "quiet" && std::string(level) != "0";
}

// Correlation-scale matrix W = (1-tau2) R(phi) + tau2 I, so Sigma = sigma2 W.
Eigen::MatrixXd build_w(const gp::SpatialDomain& domain, double phi, double tau2) {
  return gp::build_covariance(domain, {1.0, phi, tau2});
}

struct WCache {
  double phi = -1.0;
  double tau2 = -1.0;
  Eigen::LLT<Eigen::MatrixXd> llt;
  double log_det = 0.0;

  void set(const gp::SpatialDomain& domain, double new_phi, double new_tau2) {
    phi = new_phi;
    tau2 = new_tau2;
    llt = chol_with_jitter(build_w(domain, phi, tau2));
    log_det = log_det_from_chol(llt);
  }
};

// log N(y | X beta, sigma2 W) using a cached factorization of W.
double gaussian_loglik_w(const Eigen::VectorXd& resid, double sigma2, const WCache& w) {
  const double n = static_cast<double>(resid.size());
  const Eigen::VectorXd z = w.llt.matrixL().solve(resid);
  return -0.5 * (n * (kLog2Pi + std::log(sigma2)) + w.log_det + z.squaredNorm() / sigma2);
}

}  // namespace

void GeoModel::validate() const {
  const Eigen::Index n_obs = n();
  if (n_obs < 1) throw DataError("geostatistical model: no observations");
  if (X.rows() != n_obs) throw DataError("geostatistical model: X rows do not match y");
  if (domain.size() != n_obs)
    throw DataError("geostatistical model: locations do not match y");
  if (n_obs < p() + 1) throw DataError("geostatistical model: need n >= p + 1");
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(X);
  if (lu.rank() < X.cols()) throw DataError("geostatistical model: X is rank deficient");
  if (!(priors.gamma > 0.0)) throw DomainError("geostatistical model: gamma must be > 0");
  if (priors.alpha1 < 0.0 || priors.alpha2 < 0.0)
    throw DomainError("geostatistical model: alpha1, alpha2 must be >= 0");
}

GeoModel GeoModel::restricted(const std::vector<Eigen::Index>& idx) const {
  GeoModel out;
  out.domain = domain.restricted(idx);
  out.X = subrows(X, idx);
  out.y = subvector(y, idx);
  out.priors = priors;
  out.fixed_phi_tau2 = fixed_phi_tau2;
  return out;
}

std::vector<std::string> geo_param_names(Eigen::Index p) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < p; ++j) names.push_back("beta_" + std::to_string(j + 1));
  names.push_back("sigma2");
  names.push_back("phi");
  names.push_back("tau2");
  return names;
}

double geo_log_joint(const GeoModel& m, const Eigen::VectorXd& beta, double sigma2,
                     double phi, double tau2) {
  if (!(sigma2 > 0.0) || !(phi > 0.0) || !(tau2 > 0.0) || !(tau2 < 1.0))
    return -std::numeric_limits<double>::infinity();
  const dist::MvnParams like{m.X * beta,
                             gp::build_covariance(m.domain, {sigma2, phi, tau2})};
  double lp = dist::log_density_mvn(m.y, like);
  // Flat beta contributes nothing; tau2 ~ Unif(0,1) contributes nothing in
  // support. sigma2 prior: proper scaled-inv-chi-squared when alpha1 > 0,
  // otherwise the Jeffreys kernel 1/sigma2.
  if (m.priors.alpha1 > 0.0 && m.priors.alpha2 > 0.0) {
    lp += dist::log_density_scaled_inv_chi_sq(sigma2, {m.priors.alpha1, m.priors.alpha2});
  } else {
    lp += -std::log(sigma2);
  }
  lp += dist::log_density_half_normal(phi, m.priors.gamma);
  return lp;
}

dist::ScaledInvChiSqParams geo_sigma2_full_conditional(const GeoModel& m,
                                                       const Eigen::VectorXd& beta,
                                                       double phi, double tau2) {
  const auto llt = chol_with_jitter(build_w(m.domain, phi, tau2));
  const Eigen::VectorXd resid = m.y - m.X * beta;
  const double n = static_cast<double>(m.n());
  const double s2 = llt.matrixL().solve(resid).squaredNorm() / n;
  const double a1 = m.priors.alpha1;
  const double a2 = m.priors.alpha2;
  return {n + a1, (a1 * a2 + n * s2) / (a1 + n)};
}

engine::StageResult geo_full_fit(const GeoModel& m, const engine::StageConfig& cfg) {
  m.validate();
  cfg.validate();
  if (cfg.iterations < 1) throw ConfigError("full fit needs an explicit iteration count");
  const auto t0 = Clock::now();
  Rng rng(cfg.seed);

  const Eigen::Index n = m.n();
  const Eigen::Index p = m.p();
  const double n_d = static_cast<double>(n);

  // Initial state: OLS coefficients, residual variance, prior-scale phi,
  // mid-range nugget.
  Eigen::VectorXd beta = (m.X.transpose() * m.X).llt().solve(m.X.transpose() * m.y);
  double sigma2 = std::max((m.y - m.X * beta).squaredNorm() / n_d, 1e-8);
  double phi = m.fixed_phi_tau2 ? m.fixed_phi_tau2->first : m.priors.gamma;
  double tau2 = m.fixed_phi_tau2 ? m.fixed_phi_tau2->second : 0.5;

  WCache w;
  w.set(m.domain, phi, tau2);

  engine::StageResult out;
  out.samples.names = geo_param_names(p);
  const Eigen::Index kept = (cfg.iterations - cfg.burn_in + cfg.thin - 1) / cfg.thin;
  out.samples.draws.resize(kept, p + 3);

  double step_phi = 0.02, step_tau = 0.1;
  Eigen::Index batch_accepted = 0, batch_count = 0;
  Eigen::Index accepted = 0, tallied = 0;
  Eigen::Index row = 0;

  for (Eigen::Index it = 0; it < cfg.iterations; ++it) {
    // [beta | .] = N(A^{-1} b, A^{-1}) with A = X' Sigma^{-1} X (flat prior).
    {
      const Eigen::MatrixXd wx = w.llt.solve(m.X);
      const Eigen::MatrixXd a = m.X.transpose() * wx / sigma2;
      const Eigen::VectorXd b = wx.transpose() * m.y / sigma2;
      const Eigen::LLT<Eigen::MatrixXd> a_llt(a);
      if (a_llt.info() != Eigen::Success)
        throw SingularError("beta full conditional is singular");
      Eigen::VectorXd z(p);
      for (Eigen::Index i = 0; i < p; ++i) z(i) = rng.normal();
      beta = a_llt.solve(b) +
             a_llt.matrixU().solve(z);  // U^{-1} z has covariance A^{-1}
    }

    // [sigma2 | .] = Inv-chi2(n + alpha1, (alpha1 alpha2 + n S2)/(alpha1 + n)).
    Eigen::VectorXd resid = m.y - m.X * beta;
    {
      const double s2 = w.llt.matrixL().solve(resid).squaredNorm() / n_d;
      const double a1 = m.priors.alpha1;
      const double a2 = m.priors.alpha2;
      sigma2 = dist::sample_scaled_inv_chi_sq({n_d + a1, (a1 * a2 + n_d * s2) / (a1 + n_d)}, rng);
    }

    // Joint (phi, tau2) random walk with rejection of out-of-support draws.
    if (!m.fixed_phi_tau2) {
      const double phi_prop = phi + step_phi * rng.normal();
      const double tau2_prop = tau2 + step_tau * rng.normal();
      bool acc = false;
      if (phi_prop > 0.0 && tau2_prop > 0.0 && tau2_prop < 1.0) {
        WCache w_prop;
        w_prop.set(m.domain, phi_prop, tau2_prop);
        const double log_r = gaussian_loglik_w(resid, sigma2, w_prop) +
                             dist::log_density_half_normal(phi_prop, m.priors.gamma) -
                             gaussian_loglik_w(resid, sigma2, w) -
                             dist::log_density_half_normal(phi, m.priors.gamma);
        if (std::log(rng.uniform()) < log_r) {
          phi = phi_prop;
          tau2 = tau2_prop;
          w = std::move(w_prop);
          acc = true;
        }
      }
      if (it < cfg.burn_in) {
        // Multiplicative adaptation toward the target rate, frozen after
        // burn-in to preserve detailed balance.
        batch_accepted += acc ? 1 : 0;
        if (++batch_count == 50) {
          const double rate = static_cast<double>(batch_accepted) / 50.0;
          const double factor = rate > cfg.acceptance_target ? 1.1 : 1.0 / 1.1;
          step_phi *= factor;
          step_tau *= factor;
          batch_accepted = 0;
          batch_count = 0;
        }
      } else {
        accepted += acc ? 1 : 0;
        ++tallied;
      }
    }

    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0) {
      out.samples.draws.row(row).head(p) = beta.transpose();
      out.samples.draws(row, p) = sigma2;
      out.samples.draws(row, p + 1) = phi;
      out.samples.draws(row, p + 2) = tau2;
      ++row;
    }
  }

  out.diag.acceptance_rates["phi_tau2"] =
      tallied > 0 ? static_cast<double>(accepted) / static_cast<double>(tallied) : 1.0;
  out.diag.elapsed_ms = ms_since(t0);
  return out;
}

std::function<double(Eigen::Ref<const Eigen::RowVectorXd>)> geo_conditional_loglik_fn(
    const GeoModel& m, const gp::PartitionIndex& partition, std::size_t block_j) {
  const Eigen::Index p = m.p();
  return [&m, partition, block_j, p](Eigen::Ref<const Eigen::RowVectorXd> row) {
    const Eigen::VectorXd beta = row.head(p).transpose();
    const gp::CovarianceSpec spec{row(p), row(p + 1), row(p + 2)};
    return gp::conditional_log_likelihood(m.domain, m.X, m.y, partition, block_j, beta, spec);
  };
}

std::vector<engine::StageResult> geo_pprb_fit(const GeoModel& m,
                                              const gp::PartitionIndex& partition,
                                              const engine::StageConfig& cfg,
                                              const GeoPprbOptions& options) {
  m.validate();
  cfg.validate();
  partition.validate(m.n());
  const std::size_t j_blocks = partition.blocks.size();

  if (static_cast<Eigen::Index>(partition.blocks[0].size()) < m.p() + 4 && verbose_logging()) {
    std::fprintf(stderr,
                 "recbayes: warning: first partition has only %zu observations; "
                 "covariance parameters may be weakly identified until later stages\n",
                 partition.blocks[0].size());
  }

  std::vector<engine::StageResult> stages;
  engine::StageConfig stage1_cfg = cfg;
  GeoModel block1 = m.restricted(partition.blocks[0]);
  stages.push_back(geo_full_fit(block1, stage1_cfg));
  stages.back().samples.stage = 1;

  for (std::size_t j = 1; j < j_blocks; ++j) {
    engine::ProposalPool pool;
    pool.samples = stages.back().samples;
    pool.strategy = options.strategy;

    const auto loglik = geo_conditional_loglik_fn(m, partition, j);
    const auto t0 = Clock::now();
    engine::prefetch_loglik(pool, loglik, cfg.workers);
    const double prefetch_ms = ms_since(t0);

    engine::StageConfig stage_cfg = cfg;
    stage_cfg.iterations =
        options.stage_iterations > 0 ? options.stage_iterations : cfg.iterations;
    stage_cfg.burn_in = 0;  // the initial state is already a pool draw
    Rng stage_rng = Rng::stream(cfg.seed, 1000 + j);
    engine::StageResult stage = engine::run_stage(pool, stage_cfg, stage_rng);
    stage.samples.stage = static_cast<int>(j + 1);
    stage.diag.prefetch_ms = prefetch_ms;
    stages.push_back(std::move(stage));
  }
  return stages;
}

GeoModel make_synthetic_geo(const GeoSyntheticSpec& spec, Rng& rng) {
  if (spec.n < 4) throw ConfigError("geostat generator: n must be >= 4");
  // Near-square grid covering [0,1]^2.
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(spec.n))));
  const int rows = (spec.n + cols - 1) / cols;
  Eigen::MatrixX2d coords(spec.n, 2);
  for (int i = 0; i < spec.n; ++i) {
    const int r = i / cols;
    const int c = i % cols;
    coords(i, 0) = cols > 1 ? static_cast<double>(c) / (cols - 1) : 0.5;
    coords(i, 1) = rows > 1 ? static_cast<double>(r) / (rows - 1) : 0.5;
  }

  GeoModel m;
  m.domain = gp::SpatialDomain::from_scaled(coords);
  m.X.resize(spec.n, 3);
  m.X.col(0).setOnes();
  m.X.col(1) = coords.col(0);
  m.X.col(2) = coords.col(1);
  const gp::CovarianceSpec cov_spec{spec.sigma2, spec.phi, spec.tau2};
  const dist::MvnParams law{m.X * spec.beta, gp::build_covariance(m.domain, cov_spec)};
  m.y = dist::sample_mvn(law, rng);
  return m;
}

}  // namespace rb::models
