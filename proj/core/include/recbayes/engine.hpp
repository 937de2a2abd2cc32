#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "recbayes/rng.hpp"
#include "recbayes/sample_matrix.hpp"

namespace rb::engine {

enum class ResampleStrategy { kWithReplacement, kPermutation, kThinned };

ResampleStrategy resample_strategy_from_string(const std::string& s);
std::string to_string(ResampleStrategy s);

// The stage-(j-1) -> stage-j handoff: a transient posterior sample plus the
// per-row precomputed conditional log likelihoods. Between stages nothing
// else persists.
struct ProposalPool {
  SampleMatrix samples;
  std::optional<Eigen::VectorXd> loglik;  // log[y_j | theta^(k), y_{1:(j-1)}] per row
  ResampleStrategy strategy = ResampleStrategy::kWithReplacement;
  int thin = 1;                    // thinned strategy: proposals from rows 0, thin, 2*thin, ...
  bool permutation_cycles = true;  // permutation strategy restarts after K draws

  Eigen::Index size() const { return samples.rows(); }

  // Iteration state for the permutation strategy (built lazily).
  std::vector<Eigen::Index> perm;
  std::size_t perm_pos = 0;
};

// Chain state is the identity of the current pool row, so both terms of the
// M-H ratio are table lookups; `extras` carries parameters updated outside
// the pool (e.g. population-level hyperparameters). Parameter values are
// materialized only for output.
struct ChainState {
  Eigen::Index pool_index = 0;
  std::map<std::string, double> extras;
};

struct StageConfig {
  Eigen::Index iterations = 0;  // 0: default to pool size for pool stages
  Eigen::Index burn_in = 0;
  Eigen::Index thin = 1;
  std::uint64_t seed = 1;
  int workers = 1;
  double acceptance_target = 0.3;

  void validate() const;
};

struct StageDiagnostics {
  std::map<std::string, double> acceptance_rates;
  // Kish effective pool size behind the recorded draws, keyed by parameter
  // group ("pool" for engine-run stages). A pool-backed estimator cannot
  // carry more information than its effective pool support, so comparisons
  // should widen MC standard errors by this in addition to the chain ESS.
  std::map<std::string, double> pool_ess;
  double elapsed_ms = 0.0;   // chain time
  double prefetch_ms = 0.0;  // precomputation time, when a stage used prefetch
};

// (sum c)^2 / sum c^2 over per-row visit counts.
double kish_effective_size(const std::vector<Eigen::Index>& visit_counts);

struct StageResult {
  SampleMatrix samples;
  StageDiagnostics diag;
};

// Draw a proposal row id from the pool under its resampling strategy.
std::pair<Eigen::Index, Eigen::RowVectorXd> draw_proposal(ProposalPool& pool, Rng& rng);

// Fill pool.loglik by mapping loglik_fn over rows, `workers`-way parallel.
// The parallel result is identical to the sequential one; -inf entries are
// legal (never-accepted proposals), any other non-finite value is an error.
void prefetch_loglik(ProposalPool& pool,
                     const std::function<double(Eigen::Ref<const Eigen::RowVectorXd>)>& loglik_fn,
                     int workers);

// One PP-RB Metropolis-Hastings step: propose a pool row, accept with
// probability min(1, exp(loglik[proposal] - loglik[current])). Exactly one
// uniform draw decides acceptance. Returns whether the proposal was accepted.
bool pprb_mh_step(ChainState& state, ProposalPool& pool, Rng& rng);

// One Proposal-RB step: the data model cancels structurally, leaving
//   r = hier(prop) * transient(cur) / (hier(cur) * transient(prop))
// with both callbacks returning LOG densities. A -inf transient prior at a
// pool row invalidates the cancellation and is a DomainError.
bool proposal_rb_mh_step(
    ChainState& state, ProposalPool& pool,
    const std::function<double(Eigen::Ref<const Eigen::RowVectorXd>)>& log_hierarchy,
    const std::function<double(Eigen::Ref<const Eigen::RowVectorXd>)>& log_transient_prior,
    Rng& rng);

// Run a stage-j (j >= 2) chain over the pool: init from a random pool row,
// pprb_mh_step per iteration, materialize post-burn-in thinned draws.
// Burn-in defaults to 0 here because the initial state is already a draw
// from the proposal distribution.
StageResult run_stage(ProposalPool& pool, const StageConfig& cfg, Rng& rng);

// Online update: extend each pool row with forward-simulated latent states
// (extend_row, sequential in row order), prefetch the new-datum log
// likelihood at the extended states, then run a stage chain over the
// extended pool. Output columns are the pool's plus `new_names`.
StageResult online_update(
    ProposalPool& pool, const std::vector<std::string>& new_names,
    const std::function<Eigen::VectorXd(Eigen::Ref<const Eigen::RowVectorXd>, Rng&)>& extend_row,
    const std::function<double(Eigen::Ref<const Eigen::RowVectorXd>)>& new_datum_loglik,
    const StageConfig& cfg, Rng& rng);

}  // namespace rb::engine
