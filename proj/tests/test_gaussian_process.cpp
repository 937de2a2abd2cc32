#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "recbayes/errors.hpp"
#include "recbayes/gaussian_process.hpp"
#include "recbayes/linalg.hpp"

using namespace rb;
using namespace rb::gp;

namespace {

SpatialDomain random_domain(int n, Rng& rng) {
  Eigen::MatrixX2d c(n, 2);
  for (int i = 0; i < n; ++i) {
    c(i, 0) = rng.uniform();
    c(i, 1) = rng.uniform();
  }
  return SpatialDomain::from_scaled(c);
}

}  // namespace

TEST_CASE("matern 3/2 correlation") {
  CHECK(matern32_correlation(0.0, 0.3) == 1.0);
  // frozen: 2/e at d = phi
  CHECK(matern32_correlation(0.25, 0.25) ==
        doctest::Approx(0.73575888234288464319).epsilon(1e-14));
  CHECK(matern32_correlation(40.0 * 0.1, 0.1) < 1e-10);
  CHECK_THROWS_AS(matern32_correlation(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(matern32_correlation(-0.1, 1.0), DomainError);

  SUBCASE("monotone decreasing and continuous at zero") {
    const double phi = 0.17;
    double prev = matern32_correlation(0.0, phi);
    for (int i = 1; i <= 500; ++i) {
      const double cur = matern32_correlation(i * 0.01, phi);
      CHECK(cur < prev);
      prev = cur;
    }
    CHECK(matern32_correlation(1e-12, phi) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("coordinate scaling") {
  Eigen::MatrixX2d raw(3, 2);
  raw << 100.0, 50.0, 300.0, 90.0, 180.0, 20.0;
  const SpatialDomain d = SpatialDomain::from_raw(raw);
  CHECK(d.coords.minCoeff() >= 0.0);
  CHECK(d.coords.maxCoeff() <= 1.0);
  // shared scale factor: distances shrink uniformly
  const double raw_dist = (raw.row(0) - raw.row(1)).norm();
  CHECK(d.dist(0, 1) == doctest::Approx(raw_dist / d.scaling.scale).epsilon(1e-12));
  // round trip through the recorded affine map
  for (int i = 0; i < 3; ++i) {
    CHECK(d.coords(i, 0) * d.scaling.scale + d.scaling.x_offset ==
          doctest::Approx(raw(i, 0)).epsilon(1e-12));
    CHECK(d.coords(i, 1) * d.scaling.scale + d.scaling.y_offset ==
          doctest::Approx(raw(i, 1)).epsilon(1e-12));
  }
}

TEST_CASE("build_covariance") {
  SUBCASE("single location gives the scalar sill") {
    Eigen::MatrixX2d c(1, 2);
    c << 0.5, 0.5;
    const auto cov = build_covariance(SpatialDomain::from_scaled(c), {2.5, 0.1, 0.3});
    CHECK(cov.rows() == 1);
    CHECK(cov(0, 0) == doctest::Approx(2.5));
  }
  SUBCASE("three-point instance matches the elementwise formula") {
    Rng rng(3);
    const SpatialDomain d = random_domain(3, rng);
    const CovarianceSpec spec{1.7, 0.23, 0.4};
    const auto cov = build_covariance(d, spec);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double dij = (d.coords.row(i) - d.coords.row(j)).norm();
        const double r = (1.0 + dij / spec.phi) * std::exp(-dij / spec.phi);
        const double expected =
            i == j ? spec.sigma2
                   : spec.sigma2 * ((1.0 - spec.tau2) * r + (dij == 0.0 ? spec.tau2 : 0.0));
        CHECK(cov(i, j) == doctest::Approx(expected).epsilon(1e-14));
      }
    }
    // diagonal entries exactly the sill
    for (int i = 0; i < 3; ++i) CHECK(cov(i, i) == spec.sigma2);
  }
  SUBCASE("permutation invariance") {
    Rng rng(5);
    const SpatialDomain d = random_domain(8, rng);
    const CovarianceSpec spec{1.0, 0.15, 0.2};
    const auto cov = build_covariance(d, spec);
    std::vector<Eigen::Index> perm{3, 1, 7, 0, 5, 2, 6, 4};
    Eigen::MatrixX2d pc(8, 2);
    for (int i = 0; i < 8; ++i) pc.row(i) = d.coords.row(perm[i]);
    const auto cov_perm = build_covariance(SpatialDomain::from_scaled(pc), spec);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        CHECK(cov_perm(i, j) == doctest::Approx(cov(perm[i], perm[j])).epsilon(1e-14));
  }
  SUBCASE("invalid spec rejected") {
    Rng rng(6);
    const SpatialDomain d = random_domain(2, rng);
    CHECK_THROWS_AS(build_covariance(d, {0.0, 0.1, 0.2}), DomainError);
    CHECK_THROWS_AS(build_covariance(d, {1.0, 0.1, 1.0}), DomainError);
  }
  SUBCASE("duplicate locations survive via jitter when conditioning") {
    Eigen::MatrixX2d c(2, 2);
    c << 0.5, 0.5, 0.5, 0.5;
    const SpatialDomain d = SpatialDomain::from_scaled(c);
    const auto cov = build_covariance(d, {1.0, 0.1, 0.2});
    CHECK(chol_with_jitter(cov).info() == Eigen::Success);
  }
}

TEST_CASE("conditional gaussian") {
  SUBCASE("zero cross-covariance leaves the marginal untouched") {
    Eigen::VectorXd mean(4);
    mean << 1.0, 2.0, 3.0, 4.0;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(4, 4);
    cov(0, 1) = cov(1, 0) = 0.3;  // within the conditioning set only
    PartitionIndex part;
    part.blocks = {{0, 1}, {2, 3}};
    Eigen::VectorXd y_given(2);
    y_given << 5.0, -1.0;
    const auto cond = conditional_gaussian(mean, cov, part, 1, y_given);
    CHECK((cond.mean - mean.tail(2)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((cond.covariance - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("empty conditioning set returns the marginal") {
    Eigen::VectorXd mean(2);
    mean << -1.0, 1.0;
    Eigen::MatrixXd cov(2, 2);
    cov << 2.0, 0.5, 0.5, 1.0;
    PartitionIndex part;
    part.blocks = {{0, 1}};
    const auto cond = conditional_gaussian(mean, cov, part, 0, Eigen::VectorXd());
    CHECK((cond.mean - mean).cwiseAbs().maxCoeff() == 0.0);
    CHECK((cond.covariance - cov).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("conditioning never increases variance; covariance symmetric PD") {
    Rng rng(8);
    const SpatialDomain d = random_domain(9, rng);
    const auto cov = build_covariance(d, {1.4, 0.2, 0.15});
    PartitionIndex part;
    part.blocks = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}};
    const Eigen::VectorXd mean = Eigen::VectorXd::Zero(9);
    Eigen::VectorXd y(9);
    for (int i = 0; i < 9; ++i) y(i) = rng.normal();
    for (std::size_t j = 1; j < part.blocks.size(); ++j) {
      const auto cond =
          conditional_gaussian(mean, cov, part, j, subvector(y, part.before(j)));
      CHECK((cond.covariance - cond.covariance.transpose()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(Eigen::LLT<Eigen::MatrixXd>(cond.covariance).info() == Eigen::Success);
      for (Eigen::Index i = 0; i < cond.covariance.rows(); ++i) {
        const auto gi = part.blocks[j][i];
        CHECK(cond.covariance(i, i) <= cov(gi, gi) + 1e-12);
      }
    }
  }
}

TEST_CASE("partition log likelihoods telescope to the joint") {
  Rng rng(13);
  SUBCASE("J = 1 equals the full joint density") {
    const SpatialDomain d = random_domain(6, rng);
    Eigen::MatrixXd x(6, 2);
    x.col(0).setOnes();
    x.col(1) = d.coords.col(0);
    Eigen::VectorXd beta(2);
    beta << 0.5, -1.0;
    const CovarianceSpec spec{1.1, 0.3, 0.25};
    Eigen::VectorXd y(6);
    for (int i = 0; i < 6; ++i) y(i) = rng.normal();
    PartitionIndex part;
    part.blocks = {{0, 1, 2, 3, 4, 5}};
    const Eigen::VectorXd terms = partition_log_likelihoods(d, x, y, part, beta, spec);
    CHECK(terms.size() == 1);
    const dist::MvnParams joint{x * beta, build_covariance(d, spec)};
    CHECK(terms(0) == doctest::Approx(dist::log_density_mvn(y, joint)).epsilon(1e-12));
  }
  SUBCASE("random 6-point domain split 3|3: marginal plus conditional") {
    const SpatialDomain d = random_domain(6, rng);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(6, 1);
    const Eigen::VectorXd beta = Eigen::VectorXd::Constant(1, 0.7);
    const CovarianceSpec spec{0.9, 0.12, 0.3};
    Eigen::VectorXd y(6);
    for (int i = 0; i < 6; ++i) y(i) = rng.normal() * 0.8 + 0.7;
    PartitionIndex part;
    part.blocks = {{0, 1, 2}, {3, 4, 5}};
    const Eigen::VectorXd terms = partition_log_likelihoods(d, x, y, part, beta, spec);
    const dist::MvnParams joint{x * beta, build_covariance(d, spec)};
    const double full = dist::log_density_mvn(y, joint);
    CHECK(std::abs(terms.sum() - full) <= 1e-8 * std::abs(full));
  }
  SUBCASE("telescoping identity over random instances and partitions") {
    for (int rep = 0; rep < 30; ++rep) {
      const int n = 4 + static_cast<int>(rng.integer(20));
      const SpatialDomain d = random_domain(n, rng);
      Eigen::MatrixXd x(n, 3);
      x.col(0).setOnes();
      x.col(1) = d.coords.col(0);
      x.col(2) = d.coords.col(1);
      Eigen::VectorXd beta(3);
      beta << rng.normal(), rng.normal(), rng.normal();
      const CovarianceSpec spec{0.3 + rng.uniform() * 2.0, 0.03 + rng.uniform() * 0.4,
                                0.05 + rng.uniform() * 0.9};
      Eigen::VectorXd y(n);
      for (int i = 0; i < n; ++i) y(i) = rng.normal() * 2.0;
      const int j_blocks = 1 + static_cast<int>(rng.integer(std::min(n, 5)));
      const PartitionIndex part = PartitionIndex::random(n, j_blocks, rng);
      const Eigen::VectorXd terms = partition_log_likelihoods(d, x, y, part, beta, spec);
      const dist::MvnParams joint{x * beta, build_covariance(d, spec)};
      const double full = dist::log_density_mvn(y, joint);
      CHECK(std::abs(terms.sum() - full) <= 1e-8 * std::abs(full));
      // the one-shot conditional used by prefetch agrees with the batch path
      for (std::size_t j = 0; j < part.blocks.size(); ++j) {
        const double one = conditional_log_likelihood(d, x, y, part, j, beta, spec);
        CHECK(one == doctest::Approx(terms(j)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("partition index validation") {
  PartitionIndex p;
  p.blocks = {{0, 1}, {1, 2}};
  CHECK_THROWS_AS(p.validate(3), ConfigError);
  p.blocks = {{0}, {2}};
  CHECK_THROWS_AS(p.validate(3), ConfigError);
  p.blocks = {{0, 2}, {1}};
  CHECK_NOTHROW(p.validate(3));
  Rng rng(9);
  const auto r = PartitionIndex::random(17, 4, rng);
  CHECK_NOTHROW(r.validate(17));
  const auto c = PartitionIndex::consecutive(8, 4);
  CHECK(c.blocks[0] == std::vector<Eigen::Index>{0, 1});
  CHECK(c.blocks[3] == std::vector<Eigen::Index>{6, 7});
}
