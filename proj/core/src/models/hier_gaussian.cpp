#include "recbayes/models/hier_gaussian.hpp"

#include <chrono>
#include <cmath>

#include "recbayes/errors.hpp"
#include "recbayes/linalg.hpp"

namespace rb::models {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

void HierGaussianModel::validate() const {
  if (groups.size() < 2) throw DataError("hierarchical model: need at least 2 groups");
  for (const auto& g : groups)
    if (g.size() < 1) throw DataError("hierarchical model: degenerate group with n_j = 0");
  if (!(hyper.alpha > 0.0) || !(hyper.beta > 0.0) || !(hyper.sigma02 > 0.0) ||
      !(hyper.alpha0 > 0.0) || !(hyper.beta0 > 0.0))
    throw DomainError("hierarchical model: invalid hyperparameters");
}

dist::GaussianParams hier_mu_j_full_conditional(const HierGaussianModel& m, std::size_t j,
                                                double sigma2_j, double mu, double sigma2) {
  const auto& y = m.groups.at(j);
  const double n_j = static_cast<double>(y.size());
  const double a = n_j / sigma2_j + 1.0 / sigma2;
  const double b = y.sum() / sigma2_j + mu / sigma2;
  return {b / a, 1.0 / a};
}

dist::InverseGammaParams hier_sigma2_j_full_conditional(const HierGaussianModel& m,
                                                        std::size_t j, double mu_j) {
  const auto& y = m.groups.at(j);
  const double rss = (y.array() - mu_j).square().sum();
  const double shape = static_cast<double>(y.size()) / 2.0 + m.hyper.alpha;
  const double scale = 1.0 / (rss / 2.0 + 1.0 / m.hyper.beta);
  return {shape, scale};
}

dist::GaussianParams hier_mu_full_conditional(const HierGaussianModel& m,
                                              const Eigen::VectorXd& mu_js, double sigma2) {
  const double j_count = static_cast<double>(m.groups.size());
  const double a = j_count / sigma2 + 1.0 / m.hyper.sigma02;
  const double b = mu_js.sum() / sigma2 + m.hyper.mu0 / m.hyper.sigma02;
  return {b / a, 1.0 / a};
}

dist::InverseGammaParams hier_sigma2_full_conditional(const HierGaussianModel& m,
                                                      const Eigen::VectorXd& mu_js, double mu) {
  const double rss = (mu_js.array() - mu).square().sum();
  const double shape = static_cast<double>(m.groups.size()) / 2.0 + m.hyper.alpha0;
  const double scale = 1.0 / (rss / 2.0 + 1.0 / m.hyper.beta0);
  return {shape, scale};
}

double hier_log_joint(const HierGaussianModel& m, const Eigen::VectorXd& mu_js,
                      const Eigen::VectorXd& sigma2_js, double mu, double sigma2) {
  double lp = 0.0;
  for (std::size_t j = 0; j < m.groups.size(); ++j) {
    const auto& y = m.groups[j];
    for (Eigen::Index i = 0; i < y.size(); ++i)
      lp += dist::log_density_normal(y(i), {mu_js(j), sigma2_js(j)});
    lp += dist::log_density_normal(mu_js(j), {mu, sigma2});
    lp += dist::log_density_inverse_gamma(sigma2_js(j), {m.hyper.alpha, m.hyper.beta});
  }
  lp += dist::log_density_normal(mu, {m.hyper.mu0, m.hyper.sigma02});
  lp += dist::log_density_inverse_gamma(sigma2, {m.hyper.alpha0, m.hyper.beta0});
  return lp;
}

engine::StageResult hier_gaussian_full_fit(const HierGaussianModel& m,
                                           const engine::StageConfig& cfg) {
  m.validate();
  cfg.validate();
  if (cfg.iterations < 1) throw ConfigError("full fit needs an explicit iteration count");
  const auto t0 = Clock::now();
  Rng rng(cfg.seed);

  const std::size_t j_count = m.groups.size();
  Eigen::VectorXd mu_js(j_count), sigma2_js(j_count);
  for (std::size_t j = 0; j < j_count; ++j) {
    mu_js(j) = m.groups[j].mean();
    sigma2_js(j) = 1.0;
  }
  double mu = mu_js.mean();
  double sigma2 = 1.0;

  engine::StageResult out;
  for (std::size_t j = 0; j < j_count; ++j) out.samples.names.push_back("mu_" + std::to_string(j + 1));
  for (std::size_t j = 0; j < j_count; ++j)
    out.samples.names.push_back("sigma2_" + std::to_string(j + 1));
  out.samples.names.push_back("mu");
  out.samples.names.push_back("sigma2");
  const Eigen::Index kept = (cfg.iterations - cfg.burn_in + cfg.thin - 1) / cfg.thin;
  out.samples.draws.resize(kept, static_cast<Eigen::Index>(2 * j_count + 2));

  Eigen::Index row = 0;
  for (Eigen::Index it = 0; it < cfg.iterations; ++it) {
    sigma2 = dist::sample_inverse_gamma(hier_sigma2_full_conditional(m, mu_js, mu), rng);
    for (std::size_t j = 0; j < j_count; ++j) {
      mu_js(j) = dist::sample_normal(
          hier_mu_j_full_conditional(m, j, sigma2_js(j), mu, sigma2), rng);
      sigma2_js(j) = dist::sample_inverse_gamma(hier_sigma2_j_full_conditional(m, j, mu_js(j)), rng);
    }
    mu = dist::sample_normal(hier_mu_full_conditional(m, mu_js, sigma2), rng);

    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0) {
      for (std::size_t j = 0; j < j_count; ++j) {
        out.samples.draws(row, static_cast<Eigen::Index>(j)) = mu_js(j);
        out.samples.draws(row, static_cast<Eigen::Index>(j_count + j)) = sigma2_js(j);
      }
      out.samples.draws(row, static_cast<Eigen::Index>(2 * j_count)) = mu;
      out.samples.draws(row, static_cast<Eigen::Index>(2 * j_count + 1)) = sigma2;
      ++row;
    }
  }
  out.diag.acceptance_rates["gibbs"] = 1.0;
  out.diag.elapsed_ms = ms_since(t0);
  return out;
}

engine::StageResult hier_gaussian_stage1_group(const HierGaussianModel& m, std::size_t j,
                                               const engine::StageConfig& cfg) {
  m.validate();
  cfg.validate();
  if (cfg.iterations < 1) throw ConfigError("stage-1 fit needs an explicit iteration count");
  const auto t0 = Clock::now();
  // Independent stream per group so group fits can run concurrently.
  Rng rng = Rng::stream(cfg.seed, j + 1);

  const auto& y = m.groups.at(j);
  double mu_j = y.mean();
  double sigma2_j = 1.0;

  engine::StageResult out;
  out.samples.names = {"mu_" + std::to_string(j + 1), "sigma2_" + std::to_string(j + 1)};
  const Eigen::Index kept = (cfg.iterations - cfg.burn_in + cfg.thin - 1) / cfg.thin;
  out.samples.draws.resize(kept, 2);

  // Gibbs under the transient priors [mu_j] = N(mu_temp, sigma2_temp),
  // [sigma2_j] = IG(shape, scale).
  Eigen::Index row = 0;
  for (Eigen::Index it = 0; it < cfg.iterations; ++it) {
    const double n_j = static_cast<double>(y.size());
    const double a = n_j / sigma2_j + 1.0 / m.transient.mu_var;
    const double b = y.sum() / sigma2_j + m.transient.mu_mean / m.transient.mu_var;
    mu_j = dist::sample_normal({b / a, 1.0 / a}, rng);
    const double rss = (y.array() - mu_j).square().sum();
    sigma2_j = dist::sample_inverse_gamma(
        {n_j / 2.0 + m.transient.ig_shape, 1.0 / (rss / 2.0 + 1.0 / m.transient.ig_scale)}, rng);
    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0) {
      out.samples.draws(row, 0) = mu_j;
      out.samples.draws(row, 1) = sigma2_j;
      ++row;
    }
  }
  out.diag.acceptance_rates["gibbs"] = 1.0;
  out.diag.elapsed_ms = ms_since(t0);
  return out;
}

HierProposalRbResult hier_gaussian_proposal_rb(const HierGaussianModel& m,
                                               const engine::StageConfig& stage1_cfg,
                                               const engine::StageConfig& stage2_cfg,
                                               engine::ResampleStrategy strategy) {
  m.validate();
  stage1_cfg.validate();
  stage2_cfg.validate();
  const std::size_t j_count = m.groups.size();

  HierProposalRbResult result;
  result.stage1.resize(j_count);
  parallel_for(static_cast<Eigen::Index>(j_count), stage1_cfg.workers, [&](Eigen::Index j) {
    result.stage1[j] = hier_gaussian_stage1_group(m, static_cast<std::size_t>(j), stage1_cfg);
  });

  const auto t0 = Clock::now();
  std::vector<engine::ProposalPool> pools(j_count);
  for (std::size_t j = 0; j < j_count; ++j) {
    pools[j].samples = result.stage1[j].samples;
    pools[j].strategy = strategy;
  }

  Rng rng(stage2_cfg.seed);
  const Eigen::Index iters =
      stage2_cfg.iterations > 0 ? stage2_cfg.iterations : pools[0].size();
  if (stage2_cfg.burn_in >= iters) throw ConfigError("burn-in must be below the iteration count");

  std::vector<engine::ChainState> states(j_count);
  for (std::size_t j = 0; j < j_count; ++j)
    states[j].pool_index = static_cast<Eigen::Index>(rng.integer(pools[j].size()));

  Eigen::VectorXd mu_js(j_count);
  for (std::size_t j = 0; j < j_count; ++j)
    mu_js(j) = pools[j].samples.draws(states[j].pool_index, 0);
  double mu = mu_js.mean();
  double sigma2 = 1.0;

  engine::StageResult& stage2 = result.stage2;
  for (std::size_t j = 0; j < j_count; ++j)
    stage2.samples.names.push_back("mu_" + std::to_string(j + 1));
  for (std::size_t j = 0; j < j_count; ++j)
    stage2.samples.names.push_back("sigma2_" + std::to_string(j + 1));
  stage2.samples.names.push_back("mu");
  stage2.samples.names.push_back("sigma2");
  stage2.samples.stage = 2;
  const Eigen::Index kept = (iters - stage2_cfg.burn_in + stage2_cfg.thin - 1) / stage2_cfg.thin;
  stage2.samples.draws.resize(kept, static_cast<Eigen::Index>(2 * j_count + 2));

  std::vector<Eigen::Index> accepted(j_count, 0);
  std::vector<std::vector<Eigen::Index>> visits(j_count);
  for (std::size_t j = 0; j < j_count; ++j) visits[j].assign(pools[j].size(), 0);
  Eigen::Index tallied = 0;
  Eigen::Index row = 0;
  for (Eigen::Index it = 0; it < iters; ++it) {
    // sigma2 first, so the mu_j ratio sees (mu^(k-1), sigma2^(k)).
    sigma2 = dist::sample_inverse_gamma(hier_sigma2_full_conditional(m, mu_js, mu), rng);

    for (std::size_t j = 0; j < j_count; ++j) {
      // Joint (mu_j, sigma2_j) proposal from the stage-1 pool. The data
      // model cancels structurally; the sigma2_j prior terms cancel too
      // because the transient prior equals the model prior. What is left is
      // the conditional random-effect density over the transient mu_j prior.
      const double mu_now = mu, sigma2_now = sigma2;
      const bool acc = engine::proposal_rb_mh_step(
          states[j], pools[j],
          [&](Eigen::Ref<const Eigen::RowVectorXd> theta) {
            return dist::log_density_normal(theta(0), {mu_now, sigma2_now});
          },
          [&](Eigen::Ref<const Eigen::RowVectorXd> theta) {
            return dist::log_density_normal(theta(0),
                                            {m.transient.mu_mean, m.transient.mu_var});
          },
          rng);
      if (it >= stage2_cfg.burn_in) accepted[j] += acc ? 1 : 0;
      mu_js(j) = pools[j].samples.draws(states[j].pool_index, 0);
    }
    if (it >= stage2_cfg.burn_in) ++tallied;

    mu = dist::sample_normal(hier_mu_full_conditional(m, mu_js, sigma2), rng);

    if (it >= stage2_cfg.burn_in && (it - stage2_cfg.burn_in) % stage2_cfg.thin == 0) {
      for (std::size_t j = 0; j < j_count; ++j) {
        stage2.samples.draws(row, static_cast<Eigen::Index>(j)) = mu_js(j);
        stage2.samples.draws(row, static_cast<Eigen::Index>(j_count + j)) =
            pools[j].samples.draws(states[j].pool_index, 1);
        ++visits[j][states[j].pool_index];
      }
      stage2.samples.draws(row, static_cast<Eigen::Index>(2 * j_count)) = mu;
      stage2.samples.draws(row, static_cast<Eigen::Index>(2 * j_count + 1)) = sigma2;
      ++row;
    }
  }

  for (std::size_t j = 0; j < j_count; ++j) {
    const std::string tag = std::to_string(j + 1);
    stage2.diag.acceptance_rates["mu_" + tag] =
        tallied > 0 ? static_cast<double>(accepted[j]) / static_cast<double>(tallied) : 0.0;
    const double kish = engine::kish_effective_size(visits[j]);
    stage2.diag.pool_ess["mu_" + tag] = kish;
    stage2.diag.pool_ess["sigma2_" + tag] = kish;
  }
  stage2.diag.elapsed_ms = ms_since(t0);
  return result;
}

HierGaussianModel make_synthetic_hier(const HierSyntheticSpec& spec, Rng& rng,
                                      HierSyntheticTruth* truth) {
  if (spec.j_groups < 2 || spec.small_groups < 0 || spec.small_groups > spec.j_groups)
    throw ConfigError("hier generator: invalid group counts");
  if (spec.n_min < 1 || spec.n_max < spec.n_min)
    throw ConfigError("hier generator: invalid group sizes");

  HierGaussianModel m;
  Eigen::VectorXd mu_js(spec.j_groups), sigma2_js(spec.j_groups);
  for (int j = 0; j < spec.j_groups; ++j) {
    mu_js(j) = dist::sample_normal({spec.mu, spec.sigma2}, rng);
    sigma2_js(j) = rng.uniform(spec.group_var_min, spec.group_var_max);
    const bool small = j >= spec.j_groups - spec.small_groups;
    const int n_j = small ? 2
                          : spec.n_min + static_cast<int>(rng.integer(
                                             static_cast<std::uint64_t>(spec.n_max - spec.n_min + 1)));
    Eigen::VectorXd y(n_j);
    for (int i = 0; i < n_j; ++i) y(i) = dist::sample_normal({mu_js(j), sigma2_js(j)}, rng);
    m.groups.push_back(std::move(y));
  }
  if (truth) *truth = {spec.mu, spec.sigma2, mu_js, sigma2_js};
  return m;
}

}  // namespace rb::models
