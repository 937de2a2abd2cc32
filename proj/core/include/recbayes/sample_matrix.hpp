#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace rb {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// K x P posterior draws with named parameter columns: the universal currency
// between stages. Row-major so materializing and streaming draws is a
// contiguous copy per row.
struct SampleMatrix {
  RowMajorMatrix draws;
  std::vector<std::string> names;
  int stage = 1;

  Eigen::Index rows() const { return draws.rows(); }
  Eigen::Index cols() const { return draws.cols(); }
  // Column index of a named parameter; throws ConfigError if absent.
  Eigen::Index col(const std::string& name) const;
  bool has(const std::string& name) const;
  Eigen::VectorXd column(const std::string& name) const;

  // K >= 1, finite entries, unique names.
  void validate() const;
};

struct SampleMatrixMeta {
  int stage = 1;
  Eigen::Index k = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> acceptance_rates;
  std::map<std::string, double> pool_ess;  // effective pool support, when pool-backed
  double timings_ms = 0.0;
};

// CSV with a header row of parameter names, one draw per line, 17 significant
// digits (doubles round-trip bit-exactly), plus a JSON sidecar
// {stage, K, seed, acceptance_rates, timings_ms} at <path>.json.
void write_sample_matrix(const std::string& path, const SampleMatrix& m,
                         const SampleMatrixMeta& meta);
SampleMatrix read_sample_matrix(const std::string& path);
SampleMatrixMeta read_sample_matrix_meta(const std::string& csv_path);

}  // namespace rb
