#include "recbayes/data_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "recbayes/errors.hpp"

namespace rb::io {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& cell, const std::string& path) {
  char* end = nullptr;
  const std::string v = strip(cell);
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size())
    throw DataError("bad numeric cell '" + cell + "' in " + path);
  return x;
}

long long parse_int(const std::string& cell, const std::string& path) {
  const std::string v = strip(cell);
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw DataError("bad integer cell '" + cell + "' in " + path);
  }
}

std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path);
  const auto cells = split_csv_line(line);
  if (cells.size() != header.size())
    throw DataError("unexpected header in " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    if (strip(cells[i]) != header[i])
      throw DataError("expected column '" + header[i] + "' in " + path);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (strip(line).empty()) continue;
    auto row = split_csv_line(line);
    if (row.size() != header.size()) throw DataError("ragged row in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("no data rows in " + path);
  return rows;
}

}  // namespace

GeoData read_geo_csv(const std::string& path) {
  const auto rows = read_csv(path, {"x", "y", "value"});
  GeoData out;
  out.coords_raw.resize(rows.size(), 2);
  out.values.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.coords_raw(i, 0) = parse_double(rows[i][0], path);
    out.coords_raw(i, 1) = parse_double(rows[i][1], path);
    out.values(i) = parse_double(rows[i][2], path);
  }
  return out;
}

void write_geo_csv(const std::string& path, const GeoData& data) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataError("cannot open for writing: " + path);
  std::fprintf(f, "x,y,value\n");
  for (Eigen::Index i = 0; i < data.values.size(); ++i)
    std::fprintf(f, "%.17g,%.17g,%.17g\n", data.coords_raw(i, 0), data.coords_raw(i, 1),
                 data.values(i));
  if (std::fclose(f) != 0) throw DataError("write failed: " + path);
}

HierData read_hier_csv(const std::string& path) {
  const auto rows = read_csv(path, {"group_id", "value"});
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<double>> buckets;
  HierData out;
  for (const auto& row : rows) {
    const std::string id = strip(row[0]);
    auto [it, inserted] = index.try_emplace(id, buckets.size());
    if (inserted) {
      out.group_ids.push_back(id);
      buckets.emplace_back();
    }
    buckets[it->second].push_back(parse_double(row[1], path));
  }
  for (const auto& b : buckets)
    out.groups.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), b.size()));
  return out;
}

void write_hier_csv(const std::string& path, const HierData& data) {
  if (data.group_ids.size() != data.groups.size())
    throw DataError("hier data: id/group count mismatch");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataError("cannot open for writing: " + path);
  std::fprintf(f, "group_id,value\n");
  for (std::size_t j = 0; j < data.groups.size(); ++j)
    for (Eigen::Index i = 0; i < data.groups[j].size(); ++i)
      std::fprintf(f, "%s,%.17g\n", data.group_ids[j].c_str(), data.groups[j](i));
  if (std::fclose(f) != 0) throw DataError("write failed: " + path);
}

CountData read_count_csv(const std::string& path) {
  const auto rows = read_csv(path, {"site", "year", "count"});
  std::map<std::string, std::size_t> index;
  CountData out;
  std::vector<std::map<long long, std::optional<long long>>> by_year;
  for (const auto& row : rows) {
    const std::string id = strip(row[0]);
    auto [it, inserted] = index.try_emplace(id, by_year.size());
    if (inserted) {
      out.site_ids.push_back(id);
      by_year.emplace_back();
    }
    const long long year = parse_int(row[1], path);
    std::optional<long long> count;
    if (!strip(row[2]).empty()) count = parse_int(row[2], path);
    if (!by_year[it->second].emplace(year, count).second)
      throw DataError("duplicate site/year row in " + path);
  }
  for (const auto& site : by_year) {
    const long long y0 = site.begin()->first;
    const long long y1 = site.rbegin()->first;
    out.first_year.push_back(y0);
    std::vector<std::optional<long long>> series(static_cast<std::size_t>(y1 - y0 + 1));
    for (const auto& [year, count] : site) series[static_cast<std::size_t>(year - y0)] = count;
    out.counts.push_back(std::move(series));
  }
  return out;
}

void write_count_csv(const std::string& path, const CountData& data) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataError("cannot open for writing: " + path);
  std::fprintf(f, "site,year,count\n");
  for (std::size_t s = 0; s < data.counts.size(); ++s) {
    for (std::size_t t = 0; t < data.counts[s].size(); ++t) {
      const long long year = data.first_year[s] + static_cast<long long>(t);
      if (data.counts[s][t])
        std::fprintf(f, "%s,%lld,%lld\n", data.site_ids[s].c_str(), year, *data.counts[s][t]);
      else
        std::fprintf(f, "%s,%lld,\n", data.site_ids[s].c_str(), year);
    }
  }
  if (std::fclose(f) != 0) throw DataError("write failed: " + path);
}

BinaryData read_binary_csv(const std::string& path) {
  const auto rows = read_csv(path, {"value"});
  BinaryData out;
  for (const auto& row : rows) {
    const long long v = parse_int(row[0], path);
    if (v != 0 && v != 1) throw DataError("binary data entries must be 0 or 1 in " + path);
    out.values.push_back(static_cast<int>(v));
  }
  return out;
}

void write_binary_csv(const std::string& path, const BinaryData& data) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataError("cannot open for writing: " + path);
  std::fprintf(f, "value\n");
  for (const int v : data.values) std::fprintf(f, "%d\n", v);
  if (std::fclose(f) != 0) throw DataError("write failed: " + path);
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << contents;
  if (!out) throw DataError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace rb::io
