#include "recbayes/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "recbayes/errors.hpp"

namespace rb::diag {

const ParamSummary& PosteriorSummary::find(const std::string& name) const {
  for (const auto& p : params)
    if (p.name == name) return p;
  throw ConfigError("summary: no parameter named '" + name + "'");
}

const ParamComparison& ComparisonReport::find(const std::string& name) const {
  for (const auto& p : params)
    if (p.name == name) return p;
  throw ConfigError("comparison: no parameter named '" + name + "'");
}

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw DataError("quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile probability must lie in [0,1]");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  const double h = (static_cast<double>(n) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= n) return values[n - 1];
  return values[lo] + (h - std::floor(h)) * (values[lo + 1] - values[lo]);
}

double ess_initial_positive(const Eigen::VectorXd& chain) {
  const Eigen::Index n = chain.size();
  if (n < 2) return static_cast<double>(n);
  const double mean = chain.mean();
  const Eigen::VectorXd centered = chain.array() - mean;
  const double var = centered.squaredNorm() / static_cast<double>(n);
  if (var <= 0.0) return static_cast<double>(n);  // constant chain

  // Geyer's initial positive sequence: sum autocorrelations in adjacent
  // pairs while the pair sums stay positive.
  auto rho = [&](Eigen::Index lag) {
    return centered.head(n - lag).dot(centered.tail(n - lag)) /
           (static_cast<double>(n) * var);
  };
  double tau = 1.0;  // = 1 + 2 * sum rho_t, accumulated pairwise
  for (Eigen::Index lag = 1; lag + 1 < n; lag += 2) {
    const double pair = rho(lag) + rho(lag + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  const double ess = static_cast<double>(n) / tau;
  return std::clamp(ess, 1.0, static_cast<double>(n));
}

PosteriorSummary summarize(const SampleMatrix& s) {
  s.validate();
  if (s.rows() < 10) throw DataError("summarize: need at least 10 draws");
  PosteriorSummary out;
  const auto k = static_cast<double>(s.rows());
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    ParamSummary p;
    p.name = s.names[j];
    const Eigen::VectorXd col = s.draws.col(j);
    p.mean = col.mean();
    const double ss = (col.array() - p.mean).square().sum();
    p.sd = std::sqrt(ss / (k - 1.0));
    std::vector<double> v(col.data(), col.data() + col.size());
    p.q025 = quantile_type7(v, 0.025);
    p.q50 = quantile_type7(v, 0.5);
    p.q975 = quantile_type7(v, 0.975);
    p.constant = (p.sd == 0.0);
    p.ess = p.constant ? k : ess_initial_positive(col);
    p.mcse = p.constant ? 0.0 : p.sd / std::sqrt(p.ess);
    out.params.push_back(std::move(p));
  }
  return out;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DataError("ks: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

ComparisonReport compare(const SampleMatrix& a, const SampleMatrix& b) {
  const std::set<std::string> names_a(a.names.begin(), a.names.end());
  const std::set<std::string> names_b(b.names.begin(), b.names.end());
  if (names_a != names_b)
    throw ConfigError("compare: parameter name sets differ");

  const PosteriorSummary sum_a = summarize(a);
  const PosteriorSummary sum_b = summarize(b);
  ComparisonReport out;
  for (const auto& name : a.names) {
    const auto& pa = sum_a.find(name);
    const auto& pb = sum_b.find(name);
    ParamComparison c;
    c.name = name;
    const double joint_se = std::sqrt(pa.mcse * pa.mcse + pb.mcse * pb.mcse);
    const double mean_diff = std::abs(pa.mean - pb.mean);
    c.mean_diff_se = joint_se > 0.0 ? mean_diff / joint_se : (mean_diff == 0.0 ? 0.0 : HUGE_VAL);
    const double width = std::max(pa.q975 - pa.q025, pb.q975 - pb.q025);
    if (width > 0.0) {
      c.ci_low_rel = std::abs(pa.q025 - pb.q025) / width;
      c.ci_high_rel = std::abs(pa.q975 - pb.q975) / width;
    } else {
      c.ci_low_rel = pa.q025 == pb.q025 ? 0.0 : HUGE_VAL;
      c.ci_high_rel = pa.q975 == pb.q975 ? 0.0 : HUGE_VAL;
    }
    const Eigen::VectorXd ca = a.column(name);
    const Eigen::VectorXd cb = b.column(name);
    c.ks = ks_statistic(std::vector<double>(ca.data(), ca.data() + ca.size()),
                        std::vector<double>(cb.data(), cb.data() + cb.size()));
    out.params.push_back(std::move(c));
  }
  return out;
}

bool passes(const ComparisonReport& report, const MatchThresholds& t) {
  for (const auto& p : report.params) {
    if (p.mean_diff_se > t.mean_se) return false;
    if (p.ci_low_rel > t.ci_rel || p.ci_high_rel > t.ci_rel) return false;
    if (p.ks > t.ks) return false;
  }
  return true;
}

namespace {

nlohmann::ordered_json summary_to_json(const PosteriorSummary& s) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& p : s.params) {
    out.push_back({{"name", p.name},
                   {"mean", p.mean},
                   {"sd", p.sd},
                   {"q025", p.q025},
                   {"q50", p.q50},
                   {"q975", p.q975},
                   {"ess", p.ess},
                   {"mcse", p.mcse},
                   {"constant", p.constant}});
  }
  return out;
}

}  // namespace

void write_summary_json(const std::string& path, const PosteriorSummary& s) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << summary_to_json(s).dump(2) << '\n';
}

void write_summary_csv(const std::string& path, const PosteriorSummary& s) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "name,mean,sd,q025,q50,q975,ess,mcse,constant\n";
  char buf[512];
  for (const auto& p : s.params) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                  p.name.c_str(), p.mean, p.sd, p.q025, p.q50, p.q975, p.ess, p.mcse,
                  p.constant ? 1 : 0);
    out << buf;
  }
}

void write_comparison_json(const std::string& path, const ComparisonReport& r,
                           const MatchThresholds& thresholds) {
  nlohmann::ordered_json j;
  j["thresholds"] = {{"mean_se", thresholds.mean_se},
                     {"ci_rel", thresholds.ci_rel},
                     {"ks", thresholds.ks}};
  j["passes"] = passes(r, thresholds);
  j["time_a_ms"] = r.time_a_ms;
  j["time_b_ms"] = r.time_b_ms;
  j["params"] = nlohmann::ordered_json::array();
  for (const auto& p : r.params) {
    j["params"].push_back({{"name", p.name},
                           {"mean_diff_se", p.mean_diff_se},
                           {"ci_low_rel", p.ci_low_rel},
                           {"ci_high_rel", p.ci_high_rel},
                           {"ks", p.ks}});
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

void write_comparison_csv(const std::string& path, const ComparisonReport& r) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "name,mean_diff_se,ci_low_rel,ci_high_rel,ks\n";
  char buf[512];
  for (const auto& p : r.params) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g\n", p.name.c_str(),
                  p.mean_diff_se, p.ci_low_rel, p.ci_high_rel, p.ks);
    out << buf;
  }
}

}  // namespace rb::diag
