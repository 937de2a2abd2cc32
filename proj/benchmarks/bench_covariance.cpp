#include <benchmark/benchmark.h>

#include "recbayes/gaussian_process.hpp"
#include "recbayes/linalg.hpp"

using namespace rb;

namespace {

gp::SpatialDomain grid_domain(int n) {
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  Eigen::MatrixX2d c(n, 2);
  for (int i = 0; i < n; ++i) {
    c(i, 0) = static_cast<double>(i % cols) / cols;
    c(i, 1) = static_cast<double>(i / cols) / cols;
  }
  return gp::SpatialDomain::from_scaled(c);
}

}  // namespace

static void BM_BuildCovariance(benchmark::State& state) {
  const auto domain = grid_domain(static_cast<int>(state.range(0)));
  const gp::CovarianceSpec spec{1.0, 0.1, 0.2};
  for (auto _ : state) {
    benchmark::DoNotOptimize(gp::build_covariance(domain, spec));
  }
}
BENCHMARK(BM_BuildCovariance)->Arg(30)->Arg(60)->Arg(120)->Arg(240);

static void BM_CholeskyWithJitter(benchmark::State& state) {
  const auto domain = grid_domain(static_cast<int>(state.range(0)));
  const auto cov = gp::build_covariance(domain, {1.0, 0.1, 0.2});
  for (auto _ : state) {
    benchmark::DoNotOptimize(chol_with_jitter(cov));
  }
}
BENCHMARK(BM_CholeskyWithJitter)->Arg(30)->Arg(60)->Arg(120)->Arg(240);

// One prefetch unit: the conditional log density of the last partition block
// given the earlier ones, at a fresh parameter draw.
static void BM_ConditionalLogLikelihood(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto domain = grid_domain(n);
  Eigen::MatrixXd x(n, 3);
  x.col(0).setOnes();
  x.col(1) = domain.coords.col(0);
  x.col(2) = domain.coords.col(1);
  Eigen::VectorXd beta(3);
  beta << 1.0, 2.0, -1.0;
  Rng rng(1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = rng.normal();
  const auto part = gp::PartitionIndex::consecutive(n, 3);
  const gp::CovarianceSpec spec{1.0, 0.1, 0.2};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gp::conditional_log_likelihood(domain, x, y, part, 2, beta, spec));
  }
}
BENCHMARK(BM_ConditionalLogLikelihood)->Arg(60)->Arg(120)->Arg(240);

BENCHMARK_MAIN();
