#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "recbayes/data_io.hpp"
#include "recbayes/errors.hpp"
#include "recbayes/rng.hpp"
#include "recbayes/sample_matrix.hpp"

using namespace rb;

namespace {

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "recbayes_io_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("sample matrix round trip is bit exact") {
  Rng rng(31);
  SampleMatrix m;
  m.names = {"alpha", "beta", "gamma"};
  m.stage = 2;
  m.draws.resize(200, 3);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    m.draws(i, 0) = rng.normal() * std::pow(10.0, static_cast<double>(rng.integer(40)) - 20.0);
    m.draws(i, 1) = rng.uniform();
    m.draws(i, 2) = -rng.gamma(0.5, 2.0);
  }
  SampleMatrixMeta meta;
  meta.stage = 2;
  meta.k = m.rows();
  meta.seed = 77;
  meta.acceptance_rates = {{"pool", 0.31}};
  meta.timings_ms = 12.5;

  const std::string path = scratch("roundtrip.csv");
  write_sample_matrix(path, m, meta);
  const SampleMatrix back = read_sample_matrix(path);
  CHECK(back.names == m.names);
  CHECK(back.stage == 2);
  REQUIRE(back.rows() == m.rows());
  CHECK((back.draws.array() == m.draws.array()).all());

  const SampleMatrixMeta meta_back = read_sample_matrix_meta(path);
  CHECK(meta_back.k == m.rows());
  CHECK(meta_back.seed == 77);
  CHECK(meta_back.acceptance_rates.at("pool") == 0.31);
  CHECK(meta_back.timings_ms == 12.5);

  // writing the re-read matrix again produces identical bytes
  const std::string path2 = scratch("roundtrip2.csv");
  write_sample_matrix(path2, back, meta_back);
  CHECK(io::read_text_file(path) == io::read_text_file(path2));
}

TEST_CASE("sample matrix validation") {
  SampleMatrix m;
  m.names = {"a", "a"};
  m.draws.resize(2, 2);
  m.draws.setZero();
  CHECK_THROWS_AS(m.validate(), DataError);
  m.names = {"a", "b"};
  m.draws(1, 1) = std::nan("");
  CHECK_THROWS_AS(m.validate(), DataError);
  m.draws(1, 1) = 0.0;
  CHECK_NOTHROW(m.validate());
  CHECK_THROWS_AS(m.col("zzz"), ConfigError);
}

TEST_CASE("geostatistical data csv") {
  io::GeoData d;
  d.coords_raw.resize(3, 2);
  d.coords_raw << 10.0, 20.0, 30.5, 40.25, 50.0, 60.0;
  d.values.resize(3);
  d.values << 1.5, -2.25, 0.125;
  const std::string path = scratch("geo.csv");
  io::write_geo_csv(path, d);
  const auto back = io::read_geo_csv(path);
  CHECK((back.coords_raw - d.coords_raw).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.values - d.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hierarchical data csv groups by id in first-appearance order") {
  io::HierData d;
  d.group_ids = {"a", "b"};
  Eigen::VectorXd g1(2), g2(3);
  g1 << 1.0, 2.0;
  g2 << 3.0, 4.0, 5.0;
  d.groups = {g1, g2};
  const std::string path = scratch("hier.csv");
  io::write_hier_csv(path, d);
  const auto back = io::read_hier_csv(path);
  REQUIRE(back.groups.size() == 2);
  CHECK(back.group_ids == d.group_ids);
  CHECK(back.groups[1].size() == 3);
  CHECK(back.groups[1](2) == 5.0);
}

TEST_CASE("count data csv with blank missing years") {
  io::CountData d;
  d.site_ids = {"m", "s"};
  d.first_year = {1978, 1978};
  d.counts = {{100, std::nullopt, 140}, {200, 210, std::nullopt}};
  const std::string path = scratch("counts.csv");
  io::write_count_csv(path, d);
  const auto back = io::read_count_csv(path);
  REQUIRE(back.counts.size() == 2);
  CHECK(back.first_year[0] == 1978);
  CHECK_FALSE(back.counts[0][1].has_value());
  CHECK(back.counts[0][2] == 140);
  CHECK_FALSE(back.counts[1][2].has_value());
  // blank cell present in the raw text
  const auto text = io::read_text_file(path);
  CHECK(text.find("m,1979,\n") != std::string::npos);
}

TEST_CASE("binary csv validation") {
  const std::string path = scratch("bin.csv");
  io::write_text_file(path, "value\n0\n1\n2\n");
  CHECK_THROWS_AS(io::read_binary_csv(path), DataError);
  io::write_text_file(path, "value\n0\n1\n1\n");
  CHECK(io::read_binary_csv(path).values == std::vector<int>{0, 1, 1});
  io::write_text_file(path, "wrong\n0\n");
  CHECK_THROWS_AS(io::read_binary_csv(path), DataError);
}

TEST_CASE("missing files raise data errors") {
  CHECK_THROWS_AS(io::read_geo_csv("/nonexistent/geo.csv"), DataError);
  CHECK_THROWS_AS(read_sample_matrix("/nonexistent/run.csv"), DataError);
}
