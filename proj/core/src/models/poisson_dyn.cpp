#include "recbayes/models/poisson_dyn.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "recbayes/distributions.hpp"
#include "recbayes/errors.hpp"
#include "recbayes/linalg.hpp"

namespace rb::models {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Log intensities beyond this magnitude are numerically meaningless (the
// observation factor underflows first); treat them as impossible.
constexpr double kLogIntensityBound = 300.0;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

void PoissonDynModel::validate() const {
  if (counts.empty()) throw DataError("count model: no sites");
  for (const auto& site : counts) {
    if (site.size() < 2) throw DataError("count model: need T >= 2 years per site");
    bool any = false;
    for (const auto& y : site) {
      if (y) {
        if (*y < 0) throw DataError("count model: negative count");
        any = true;
      }
    }
    if (!any) throw DataError("count model: site has no observed counts");
  }
  if (!(hyper.sigma21 > 0.0) || !(hyper.sigma2_phi > 0.0) || !(hyper.alpha > 0.0) ||
      !(hyper.beta > 0.0))
    throw DomainError("count model: invalid hyperparameters");
  if (!(tune_var > 0.0)) throw DomainError("count model: tune_var must be > 0");
}

std::vector<std::string> poisson_site_param_names(std::size_t site, Eigen::Index t_total) {
  const std::string s = std::to_string(site + 1);
  std::vector<std::string> names{"phi_" + s, "sigma2_" + s};
  for (Eigen::Index t = 0; t < t_total; ++t)
    names.push_back("lambda_" + s + "_" + std::to_string(t + 1));
  return names;
}

double poisson_latent_log_conditional(const PoissonDynModel& m, std::size_t site,
                                      Eigen::Index t, double value,
                                      const Eigen::VectorXd& ell, double phi, double sigma2) {
  if (std::abs(value) > kLogIntensityBound) return kNegInf;
  const auto& counts = m.counts.at(site);
  const Eigen::Index t_total = static_cast<Eigen::Index>(counts.size());
  double lp = 0.0;
  if (counts[t]) lp += dist::log_mass_poisson(*counts[t], std::exp(value));
  if (t == 0) {
    lp += dist::log_density_normal(value, {m.hyper.mu1, m.hyper.sigma21});
  } else {
    lp += dist::log_density_normal(value, {phi + ell(t - 1), sigma2});
  }
  if (t + 1 < t_total) lp += dist::log_density_normal(ell(t + 1), {phi + value, sigma2});
  return lp;
}

dist::GaussianParams poisson_phi_full_conditional(const PoissonDynModel& m, std::size_t site,
                                                  const Eigen::VectorXd& ell, double sigma2) {
  const Eigen::Index t_total = m.years(site);
  const double a = static_cast<double>(t_total - 1) / sigma2 + 1.0 / m.hyper.sigma2_phi;
  double sum_diff = 0.0;
  for (Eigen::Index t = 1; t < t_total; ++t) sum_diff += ell(t) - ell(t - 1);
  const double b = sum_diff / sigma2;
  return {b / a, 1.0 / a};
}

dist::InverseGammaParams poisson_sigma2_full_conditional(const PoissonDynModel& m,
                                                         std::size_t site,
                                                         const Eigen::VectorXd& ell, double phi) {
  const Eigen::Index t_total = m.years(site);
  double rss = 0.0;
  for (Eigen::Index t = 1; t < t_total; ++t) {
    const double r = ell(t) - phi - ell(t - 1);
    rss += r * r;
  }
  const double shape = static_cast<double>(t_total - 1) / 2.0 + m.hyper.alpha;
  const double scale = 1.0 / (rss / 2.0 + 1.0 / m.hyper.beta);
  return {shape, scale};
}

double poisson_site_log_joint(const PoissonDynModel& m, std::size_t site,
                              const Eigen::VectorXd& ell, double phi, double sigma2) {
  const auto& counts = m.counts.at(site);
  double lp = 0.0;
  for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(counts.size()); ++t)
    if (counts[t]) lp += dist::log_mass_poisson(*counts[t], std::exp(ell(t)));
  lp += dist::log_density_normal(ell(0), {m.hyper.mu1, m.hyper.sigma21});
  for (Eigen::Index t = 1; t < ell.size(); ++t)
    lp += dist::log_density_normal(ell(t), {phi + ell(t - 1), sigma2});
  lp += dist::log_density_normal(phi, {0.0, m.hyper.sigma2_phi});
  lp += dist::log_density_inverse_gamma(sigma2, {m.hyper.alpha, m.hyper.beta});
  return lp;
}

engine::StageResult poisson_dyn_site_fit(const PoissonDynModel& m, std::size_t site,
                                         const engine::StageConfig& cfg) {
  m.validate();
  cfg.validate();
  if (cfg.iterations < 1) throw ConfigError("full fit needs an explicit iteration count");
  const auto t0 = Clock::now();
  Rng rng = Rng::stream(cfg.seed, 100 + site);

  const auto& counts = m.counts.at(site);
  const Eigen::Index t_total = m.years(site);

  // Initial log intensities: log(y+1) where observed, carried forward over
  // missing years.
  Eigen::VectorXd ell(t_total);
  double last = m.hyper.mu1;
  for (Eigen::Index t = 0; t < t_total; ++t) {
    if (counts[t]) last = std::log(static_cast<double>(*counts[t]) + 1.0);
    ell(t) = last;
  }
  double phi = 0.0;
  double sigma2 = 0.05;

  engine::StageResult out;
  out.samples.names = poisson_site_param_names(site, t_total);
  const Eigen::Index kept = (cfg.iterations - cfg.burn_in + cfg.thin - 1) / cfg.thin;
  out.samples.draws.resize(kept, t_total + 2);

  double step = std::sqrt(m.tune_var);
  Eigen::Index batch_accepted = 0, batch_count = 0;
  Eigen::Index accepted = 0, tallied = 0;
  Eigen::Index row = 0;

  for (Eigen::Index it = 0; it < cfg.iterations; ++it) {
    for (Eigen::Index t = 0; t < t_total; ++t) {
      const double prop = ell(t) + step * rng.normal();
      const double log_r = poisson_latent_log_conditional(m, site, t, prop, ell, phi, sigma2) -
                           poisson_latent_log_conditional(m, site, t, ell(t), ell, phi, sigma2);
      const bool acc = std::log(rng.uniform()) < log_r;
      if (acc) ell(t) = prop;
      if (it < cfg.burn_in) {
        batch_accepted += acc ? 1 : 0;
        ++batch_count;
      } else {
        accepted += acc ? 1 : 0;
        ++tallied;
      }
    }
    if (it < cfg.burn_in && batch_count >= 50 * t_total) {
      const double rate = static_cast<double>(batch_accepted) / static_cast<double>(batch_count);
      step *= rate > cfg.acceptance_target ? 1.1 : 1.0 / 1.1;
      batch_accepted = 0;
      batch_count = 0;
    }

    phi = dist::sample_normal(poisson_phi_full_conditional(m, site, ell, sigma2), rng);
    sigma2 = dist::sample_inverse_gamma(poisson_sigma2_full_conditional(m, site, ell, phi), rng);

    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0) {
      out.samples.draws(row, 0) = phi;
      out.samples.draws(row, 1) = sigma2;
      out.samples.draws.row(row).tail(t_total) = ell.array().exp().matrix().transpose();
      ++row;
    }
  }

  out.diag.acceptance_rates["lambda_" + std::to_string(site + 1)] =
      tallied > 0 ? static_cast<double>(accepted) / static_cast<double>(tallied) : 0.0;
  out.diag.elapsed_ms = ms_since(t0);
  return out;
}

engine::StageResult poisson_dyn_full_fit(const PoissonDynModel& m,
                                         const engine::StageConfig& cfg) {
  m.validate();
  cfg.validate();
  const auto t0 = Clock::now();
  const std::size_t s_count = m.sites();
  std::vector<engine::StageResult> site_fits(s_count);
  parallel_for(static_cast<Eigen::Index>(s_count), cfg.workers, [&](Eigen::Index s) {
    site_fits[s] = poisson_dyn_site_fit(m, static_cast<std::size_t>(s), cfg);
  });

  engine::StageResult out;
  Eigen::Index p_total = 0;
  for (const auto& f : site_fits) p_total += f.samples.cols();
  out.samples.draws.resize(site_fits[0].samples.rows(), p_total);
  Eigen::Index col = 0;
  for (const auto& f : site_fits) {
    out.samples.names.insert(out.samples.names.end(), f.samples.names.begin(),
                             f.samples.names.end());
    out.samples.draws.middleCols(col, f.samples.cols()) = f.samples.draws;
    col += f.samples.cols();
    for (const auto& [k, v] : f.diag.acceptance_rates) out.diag.acceptance_rates[k] = v;
  }
  out.diag.elapsed_ms = ms_since(t0);
  return out;
}

engine::StageResult poisson_dyn_online_update(
    const PoissonDynModel& m, const SampleMatrix& stage1,
    const std::vector<long long>& new_counts, const engine::StageConfig& cfg,
    engine::ResampleStrategy strategy) {
  m.validate();
  cfg.validate();
  if (new_counts.size() != m.sites())
    throw DataError("online update: one new count per site required");
  const auto t0 = Clock::now();

  // The chain only needs (phi, sigma2, lambda_T) per row, so it runs over a
  // slim pool carrying a row-id column; the joint output is gathered from
  // stage1 by row id afterwards. Everything ahead of that gather is O(K) in
  // the series length.
  std::vector<engine::StageResult> site_updates(m.sites());
  for (std::size_t s = 0; s < m.sites(); ++s) {
    if (new_counts[s] < 0) throw DataError("online update: negative count");
    const Eigen::Index t_total = m.years(s);
    const std::string tag = std::to_string(s + 1);

    engine::ProposalPool pool;
    pool.strategy = strategy;
    pool.samples.stage = stage1.stage;
    pool.samples.names = {"phi", "sigma2", "lambda_t", "row"};
    pool.samples.draws.resize(stage1.rows(), 4);
    pool.samples.draws.col(0) = stage1.column("phi_" + tag);
    pool.samples.draws.col(1) = stage1.column("sigma2_" + tag);
    pool.samples.draws.col(2) =
        stage1.column("lambda_" + tag + "_" + std::to_string(t_total));
    pool.samples.draws.col(3) =
        Eigen::VectorXd::LinSpaced(stage1.rows(), 0, static_cast<double>(stage1.rows() - 1));

    const long long y_new = new_counts[s];
    Rng site_rng = Rng::stream(cfg.seed, 500 + s);
    site_updates[s] = engine::online_update(
        pool, {"lambda_next", "lambda_new"},
        // Predictive extension: two forward transitions from the row's own
        // (phi, sigma2) starting at its lambda_T.
        [](Eigen::Ref<const Eigen::RowVectorXd> row_draw, Rng& r) {
          const double phi = row_draw(0);
          const double sigma2 = row_draw(1);
          const double ell_t = std::log(row_draw(2));
          const double ell_t1 = dist::sample_normal({phi + ell_t, sigma2}, r);
          const double ell_t2 = dist::sample_normal({phi + ell_t1, sigma2}, r);
          return Eigen::Vector2d{std::exp(ell_t1), std::exp(ell_t2)};
        },
        [y_new](Eigen::Ref<const Eigen::RowVectorXd> extended) {
          return dist::log_mass_poisson(y_new, extended(5));
        },
        cfg, site_rng);
  }

  engine::StageResult out;
  out.samples.stage = stage1.stage + 1;
  Eigen::Index p_total = 0;
  for (std::size_t s = 0; s < m.sites(); ++s) p_total += m.years(s) + 4;
  const Eigen::Index kept = site_updates[0].samples.rows();
  out.samples.draws.resize(kept, p_total);

  Eigen::Index col = 0;
  for (std::size_t s = 0; s < m.sites(); ++s) {
    const Eigen::Index t_total = m.years(s);
    const std::string tag = std::to_string(s + 1);
    const auto site_names = poisson_site_param_names(s, t_total);
    out.samples.names.insert(out.samples.names.end(), site_names.begin(), site_names.end());
    out.samples.names.push_back("lambda_" + tag + "_" + std::to_string(t_total + 1));
    out.samples.names.push_back("lambda_" + tag + "_" + std::to_string(t_total + 2));

    // stage1 keeps each site's columns adjacent, so one contiguous copy per
    // draw recovers the joint row.
    const Eigen::Index src_col = stage1.col("phi_" + tag);
    const auto& slim = site_updates[s].samples;
    const Eigen::Index ext = slim.cols() - 2;  // lambda_next, lambda_new
    for (Eigen::Index i = 0; i < kept; ++i) {
      const auto src_row = static_cast<Eigen::Index>(slim.draws(i, 3));
      out.samples.draws.row(i).segment(col, t_total + 2) =
          stage1.draws.row(src_row).segment(src_col, t_total + 2);
      out.samples.draws.row(i).segment(col + t_total + 2, 2) =
          slim.draws.row(i).segment(ext, 2);
    }
    col += t_total + 4;
    out.diag.acceptance_rates["site_" + std::to_string(s + 1)] =
        site_updates[s].diag.acceptance_rates.at("pool");
    out.diag.pool_ess["site_" + std::to_string(s + 1)] =
        site_updates[s].diag.pool_ess.at("pool");
  }
  out.diag.elapsed_ms = ms_since(t0);
  return out;
}

PoissonDynModel make_synthetic_poisson(const PoissonSyntheticSpec& spec, Rng& rng,
                                       PoissonSyntheticTruth* truth) {
  if (spec.sites < 1 || spec.t_obs < 2 || spec.extra_years < 0)
    throw ConfigError("count generator: invalid shape");
  const int t_total = spec.t_obs + spec.extra_years;
  const int missing = spec.missing_year > 0 ? spec.missing_year : spec.t_obs + 1;
  if (missing < 1 || missing > t_total)
    throw ConfigError("count generator: missing year out of range");

  PoissonDynModel m;
  Eigen::VectorXd phi(spec.sites), sigma2(spec.sites);
  Eigen::MatrixXd lambda(spec.sites, t_total);
  for (int s = 0; s < spec.sites; ++s) {
    phi(s) = dist::sample_normal({0.0, spec.phi_sd * spec.phi_sd}, rng);
    sigma2(s) = spec.sigma2_s;
    std::vector<std::optional<long long>> site(t_total);
    double ell = dist::sample_normal({spec.mu1, spec.sigma21}, rng);
    for (int t = 0; t < t_total; ++t) {
      if (t > 0) ell = dist::sample_normal({phi(s) + ell, sigma2(s)}, rng);
      lambda(s, t) = std::exp(ell);
      if (t + 1 == missing) {
        site[t] = std::nullopt;
      } else {
        site[t] = rng.poisson(lambda(s, t));
      }
    }
    m.counts.push_back(std::move(site));
  }
  if (truth) *truth = {phi, sigma2, lambda};
  return m;
}

}  // namespace rb::models
