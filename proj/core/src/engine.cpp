#include "recbayes/engine.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "recbayes/errors.hpp"
#include "recbayes/linalg.hpp"

namespace rb::engine {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void require_pool(const ProposalPool& pool) {
  if (pool.size() < 1) throw ConfigError("proposal pool is empty");
  if (pool.thin < 1) throw ConfigError("thinned strategy requires a thinning interval >= 1");
}

// log acceptance ratio comparison with -inf handled explicitly so a pair of
// impossible states cannot produce NaN.
bool accept_log_ratio(double log_r, Rng& rng) {
  const double u = rng.uniform();  // exactly one uniform per decision
  if (std::isnan(log_r)) return false;
  return std::log(u) < log_r;
}

}  // namespace

ResampleStrategy resample_strategy_from_string(const std::string& s) {
  if (s == "with-replacement") return ResampleStrategy::kWithReplacement;
  if (s == "permutation") return ResampleStrategy::kPermutation;
  if (s == "thinned") return ResampleStrategy::kThinned;
  throw ConfigError("unknown resampling strategy: " + s);
}

std::string to_string(ResampleStrategy s) {
  switch (s) {
    case ResampleStrategy::kWithReplacement: return "with-replacement";
    case ResampleStrategy::kPermutation: return "permutation";
    case ResampleStrategy::kThinned: return "thinned";
  }
  throw ConfigError("invalid resampling strategy value");
}

void StageConfig::validate() const {
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  if (burn_in < 0 || (iterations > 0 && burn_in >= iterations))
    throw ConfigError("burn-in must satisfy 0 <= burn_in < iterations");
  if (thin < 1) throw ConfigError("thin must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (!(acceptance_target > 0.0 && acceptance_target < 1.0))
    throw ConfigError("acceptance target must lie in (0,1)");
}

std::pair<Eigen::Index, Eigen::RowVectorXd> draw_proposal(ProposalPool& pool, Rng& rng) {
  require_pool(pool);
  const Eigen::Index k = pool.size();
  Eigen::Index idx = 0;
  switch (pool.strategy) {
    case ResampleStrategy::kWithReplacement:
      idx = static_cast<Eigen::Index>(rng.integer(k));
      break;
    case ResampleStrategy::kPermutation: {
      if (pool.perm.empty()) {
        pool.perm.resize(k);
        std::iota(pool.perm.begin(), pool.perm.end(), Eigen::Index{0});
        for (Eigen::Index i = k - 1; i > 0; --i) {
          const auto j = static_cast<Eigen::Index>(rng.integer(i + 1));
          std::swap(pool.perm[i], pool.perm[j]);
        }
        pool.perm_pos = 0;
      }
      if (pool.perm_pos >= pool.perm.size()) {
        if (!pool.permutation_cycles)
          throw ConfigError("permutation proposals exhausted and cycling is disabled");
        pool.perm_pos = 0;
      }
      idx = pool.perm[pool.perm_pos++];
      break;
    }
    case ResampleStrategy::kThinned: {
      const Eigen::Index m = (k + pool.thin - 1) / pool.thin;  // rows 0, thin, 2*thin, ...
      idx = static_cast<Eigen::Index>(rng.integer(m)) * pool.thin;
      break;
    }
  }
  return {idx, pool.samples.draws.row(idx)};
}

void prefetch_loglik(ProposalPool& pool,
                     const std::function<double(Eigen::Ref<const Eigen::RowVectorXd>)>& loglik_fn,
                     int workers) {
  require_pool(pool);
  Eigen::VectorXd values(pool.size());
  parallel_for(pool.size(), workers, [&](Eigen::Index i) {
    values(i) = loglik_fn(pool.samples.draws.row(i));
  });
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = values(i);
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
      throw DataError("non-finite conditional log likelihood at pool row " + std::to_string(i));
  }
  pool.loglik = std::move(values);
}

bool pprb_mh_step(ChainState& state, ProposalPool& pool, Rng& rng) {
  if (!pool.loglik)
    throw ConfigError("pprb_mh_step requires precomputed pool log likelihoods");
  const auto [proposal, row] = draw_proposal(pool, rng);
  const double cur = (*pool.loglik)(state.pool_index);
  const double prop = (*pool.loglik)(proposal);
  // Both terms are table lookups; the conditional data model is never
  // re-evaluated inside the chain.
  double log_r;
  if (prop == kNegInf) {
    log_r = kNegInf;
  } else if (cur == kNegInf) {
    log_r = std::numeric_limits<double>::infinity();
  } else {
    log_r = prop - cur;
  }
  if (accept_log_ratio(log_r, rng)) {
    state.pool_index = proposal;
    return true;
  }
  return false;
}

bool proposal_rb_mh_step(
    ChainState& state, ProposalPool& pool,
    const std::function<double(Eigen::Ref<const Eigen::RowVectorXd>)>& log_hierarchy,
    const std::function<double(Eigen::Ref<const Eigen::RowVectorXd>)>& log_transient_prior,
    Rng& rng) {
  const auto [proposal, row] = draw_proposal(pool, rng);
  const auto cur_row = pool.samples.draws.row(state.pool_index);

  const double transient_prop = log_transient_prior(row);
  const double transient_cur = log_transient_prior(cur_row);
  if (transient_prop == kNegInf || transient_cur == kNegInf)
    throw DomainError("transient prior density is zero at a pool row; cancellation invalid");

  const double log_r = log_hierarchy(row) + transient_cur -
                       log_hierarchy(cur_row) - transient_prop;
  if (accept_log_ratio(log_r, rng)) {
    state.pool_index = proposal;
    return true;
  }
  return false;
}

double kish_effective_size(const std::vector<Eigen::Index>& visit_counts) {
  double sum = 0.0, sum_sq = 0.0;
  for (const auto c : visit_counts) {
    const double cd = static_cast<double>(c);
    sum += cd;
    sum_sq += cd * cd;
  }
  return sum_sq > 0.0 ? sum * sum / sum_sq : 0.0;
}

StageResult run_stage(ProposalPool& pool, const StageConfig& cfg, Rng& rng) {
  cfg.validate();
  if (!pool.loglik) throw ConfigError("run_stage requires a prefetched pool");
  if (pool.loglik->maxCoeff() == kNegInf)
    throw NumericalError("every pool row has -inf conditional log likelihood");

  const auto t0 = Clock::now();
  const Eigen::Index iters = cfg.iterations > 0 ? cfg.iterations : pool.size();
  if (cfg.burn_in >= iters) throw ConfigError("burn-in must be below the iteration count");

  ChainState state;
  state.pool_index = static_cast<Eigen::Index>(rng.integer(pool.size()));

  const Eigen::Index kept = (iters - cfg.burn_in + cfg.thin - 1) / cfg.thin;
  StageResult out;
  out.samples.names = pool.samples.names;
  out.samples.stage = pool.samples.stage + 1;
  out.samples.draws.resize(kept, pool.samples.cols());

  std::vector<Eigen::Index> visits(pool.size(), 0);
  Eigen::Index row = 0;
  Eigen::Index accepted = 0, tallied = 0;
  for (Eigen::Index it = 0; it < iters; ++it) {
    const bool acc = pprb_mh_step(state, pool, rng);
    if (it >= cfg.burn_in) {
      accepted += acc ? 1 : 0;
      ++tallied;
      if ((it - cfg.burn_in) % cfg.thin == 0) {
        out.samples.draws.row(row++) = pool.samples.draws.row(state.pool_index);
        ++visits[state.pool_index];
      }
    }
  }

  out.diag.acceptance_rates["pool"] =
      tallied > 0 ? static_cast<double>(accepted) / static_cast<double>(tallied) : 0.0;
  out.diag.pool_ess["pool"] = kish_effective_size(visits);
  out.diag.elapsed_ms = ms_since(t0);
  return out;
}

StageResult online_update(
    ProposalPool& pool, const std::vector<std::string>& new_names,
    const std::function<Eigen::VectorXd(Eigen::Ref<const Eigen::RowVectorXd>, Rng&)>& extend_row,
    const std::function<double(Eigen::Ref<const Eigen::RowVectorXd>)>& new_datum_loglik,
    const StageConfig& cfg, Rng& rng) {
  require_pool(pool);
  const auto t0 = Clock::now();

  // Extend every pool row once with its own predictive draws; the extended
  // pool is the joint proposal, so the M-H ratio keeps only the new-datum
  // likelihood.
  const Eigen::Index k = pool.size();
  const auto p_old = pool.samples.cols();
  const auto p_new = static_cast<Eigen::Index>(new_names.size());
  ProposalPool extended;
  extended.strategy = pool.strategy;
  extended.thin = pool.thin;
  extended.permutation_cycles = pool.permutation_cycles;
  extended.samples.stage = pool.samples.stage;
  extended.samples.names = pool.samples.names;
  extended.samples.names.insert(extended.samples.names.end(), new_names.begin(), new_names.end());
  extended.samples.draws.resize(k, p_old + p_new);
  extended.samples.draws.leftCols(p_old) = pool.samples.draws;
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::VectorXd ext = extend_row(pool.samples.draws.row(i), rng);
    if (ext.size() != p_new)
      throw ConfigError("online_update: extension size does not match new_names");
    extended.samples.draws.row(i).tail(p_new) = ext.transpose();
  }

  prefetch_loglik(extended, new_datum_loglik, cfg.workers);
  StageResult out = run_stage(extended, cfg, rng);
  out.diag.elapsed_ms = ms_since(t0);
  return out;
}

}  // namespace rb::engine
