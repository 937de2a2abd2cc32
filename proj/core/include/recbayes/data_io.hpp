#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace rb::io {

// Geostatistical data: columns x,y,value with raw coordinates; scaling to
// [0,1]^2 happens at model construction and is recorded there.
struct GeoData {
  Eigen::MatrixX2d coords_raw;
  Eigen::VectorXd values;
};

// Hierarchical data: columns group_id,value; groups keyed by first appearance
// order of group_id (ids may be arbitrary labels).
struct HierData {
  std::vector<std::string> group_ids;
  std::vector<Eigen::VectorXd> groups;
};

// Count series: columns site,year,count with blanks for missing counts.
// Years are normalized to contiguous 0-based indices per site.
struct CountData {
  std::vector<std::string> site_ids;
  std::vector<long long> first_year;
  std::vector<std::vector<std::optional<long long>>> counts;
};

// Binary data: single column value with entries 0/1.
struct BinaryData {
  std::vector<int> values;
};

GeoData read_geo_csv(const std::string& path);
void write_geo_csv(const std::string& path, const GeoData& data);

HierData read_hier_csv(const std::string& path);
void write_hier_csv(const std::string& path, const HierData& data);

CountData read_count_csv(const std::string& path);
void write_count_csv(const std::string& path, const CountData& data);

BinaryData read_binary_csv(const std::string& path);
void write_binary_csv(const std::string& path, const BinaryData& data);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace rb::io
