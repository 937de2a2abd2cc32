#include "recbayes/sample_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "recbayes/errors.hpp"

namespace rb {

Eigen::Index SampleMatrix::col(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError("sample matrix: no parameter named '" + name + "'");
  return static_cast<Eigen::Index>(it - names.begin());
}

bool SampleMatrix::has(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

Eigen::VectorXd SampleMatrix::column(const std::string& name) const {
  return draws.col(col(name));
}

void SampleMatrix::validate() const {
  if (rows() < 1) throw DataError("sample matrix: need at least one draw");
  if (static_cast<Eigen::Index>(names.size()) != cols())
    throw DataError("sample matrix: name count does not match columns");
  std::set<std::string> unique(names.begin(), names.end());
  if (static_cast<Eigen::Index>(unique.size()) != cols())
    throw DataError("sample matrix: parameter names are not unique");
  if (!draws.allFinite()) throw DataError("sample matrix: non-finite draw entry");
  if (stage < 1) throw DataError("sample matrix: stage must be >= 1");
}

void write_sample_matrix(const std::string& path, const SampleMatrix& m,
                         const SampleMatrixMeta& meta) {
  m.validate();
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataError("cannot open for writing: " + path);
  for (std::size_t j = 0; j < m.names.size(); ++j)
    std::fprintf(f, "%s%s", j ? "," : "", m.names[j].c_str());
  std::fputc('\n', f);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      std::fprintf(f, "%s%.17g", j ? "," : "", m.draws(i, j));
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) throw DataError("write failed: " + path);

  nlohmann::ordered_json side;
  side["stage"] = meta.stage;
  side["K"] = meta.k;
  side["seed"] = meta.seed;
  side["acceptance_rates"] = meta.acceptance_rates;
  if (!meta.pool_ess.empty()) side["pool_ess"] = meta.pool_ess;
  side["timings_ms"] = meta.timings_ms;
  std::ofstream out(path + ".json");
  if (!out) throw DataError("cannot open for writing: " + path + ".json");
  out << side.dump(2) << '\n';
}

SampleMatrix read_sample_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty sample file: " + path);

  SampleMatrix m;
  {
    std::stringstream header(line);
    std::string name;
    while (std::getline(header, name, ',')) m.names.push_back(name);
  }
  const auto p = static_cast<Eigen::Index>(m.names.size());
  if (p == 0) throw DataError("sample file has no columns: " + path);

  std::vector<double> values;
  Eigen::Index k = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    Eigen::Index j = 0;
    while (std::getline(row, cell, ',')) {
      values.push_back(std::strtod(cell.c_str(), nullptr));
      ++j;
    }
    if (j != p) throw DataError("ragged sample file row in " + path);
    ++k;
  }
  m.draws.resize(k, p);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < p; ++j) m.draws(i, j) = values[i * p + j];

  std::ifstream side(path + ".json");
  if (side) {
    const auto meta = nlohmann::json::parse(side);
    m.stage = meta.value("stage", 1);
  }
  m.validate();
  return m;
}

SampleMatrixMeta read_sample_matrix_meta(const std::string& csv_path) {
  std::ifstream side(csv_path + ".json");
  if (!side) throw DataError("missing sidecar: " + csv_path + ".json");
  const auto j = nlohmann::json::parse(side);
  SampleMatrixMeta meta;
  meta.stage = j.value("stage", 1);
  meta.k = j.value("K", 0);
  meta.seed = j.value("seed", std::uint64_t{0});
  meta.timings_ms = j.value("timings_ms", 0.0);
  if (j.contains("acceptance_rates"))
    meta.acceptance_rates = j["acceptance_rates"].get<std::map<std::string, double>>();
  if (j.contains("pool_ess"))
    meta.pool_ess = j["pool_ess"].get<std::map<std::string, double>>();
  return meta;
}

}  // namespace rb
