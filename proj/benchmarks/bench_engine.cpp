#include <benchmark/benchmark.h>

#include <cmath>

#include "recbayes/engine.hpp"

using namespace rb;
using namespace rb::engine;

namespace {

ProposalPool make_pool(Eigen::Index k) {
  ProposalPool pool;
  pool.samples.names = {"theta"};
  pool.samples.draws.resize(k, 1);
  Rng rng(7);
  for (Eigen::Index i = 0; i < k; ++i) pool.samples.draws(i, 0) = rng.normal();
  pool.loglik = -0.5 * pool.samples.draws.col(0).array().square();
  return pool;
}

}  // namespace

static void BM_PoolMhStep(benchmark::State& state) {
  auto pool = make_pool(state.range(0));
  ChainState chain;
  Rng rng(11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pprb_mh_step(chain, pool, rng));
  }
}
BENCHMARK(BM_PoolMhStep)->Arg(1000)->Arg(20000)->Arg(100000);

static void BM_DrawProposalStrategies(benchmark::State& state) {
  auto pool = make_pool(20000);
  pool.strategy = static_cast<ResampleStrategy>(state.range(0));
  pool.thin = 10;
  Rng rng(13);
  for (auto _ : state) {
    benchmark::DoNotOptimize(draw_proposal(pool, rng));
  }
}
BENCHMARK(BM_DrawProposalStrategies)->Arg(0)->Arg(1)->Arg(2);

// Parallel prefetch scaling over a moderately expensive likelihood.
static void BM_PrefetchWorkers(benchmark::State& state) {
  auto pool = make_pool(20000);
  const int workers = static_cast<int>(state.range(0));
  auto loglik = [](Eigen::Ref<const Eigen::RowVectorXd> row) {
    double acc = 0.0;
    for (int i = 1; i <= 200; ++i) acc += std::sin(row(0) * i) / i;
    return acc;
  };
  for (auto _ : state) {
    prefetch_loglik(pool, loglik, workers);
    benchmark::DoNotOptimize(pool.loglik->sum());
  }
}
BENCHMARK(BM_PrefetchWorkers)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime();

static void BM_RunStage(benchmark::State& state) {
  auto pool = make_pool(state.range(0));
  StageConfig cfg;
  cfg.iterations = state.range(0);
  for (auto _ : state) {
    Rng rng(17);
    benchmark::DoNotOptimize(run_stage(pool, cfg, rng));
  }
}
BENCHMARK(BM_RunStage)->Arg(10000)->Arg(50000);

BENCHMARK_MAIN();
