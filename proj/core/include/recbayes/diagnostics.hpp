#pragma once

#include <string>
#include <vector>

#include "recbayes/sample_matrix.hpp"

namespace rb::diag {

struct ParamSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q50 = 0.0;
  double q975 = 0.0;
  double ess = 0.0;
  double mcse = 0.0;  // sd / sqrt(ess)
  bool constant = false;
};

struct PosteriorSummary {
  std::vector<ParamSummary> params;
  const ParamSummary& find(const std::string& name) const;
};

struct ParamComparison {
  std::string name;
  // |mean_a - mean_b| in units of the joint MC standard error
  // sqrt(mcse_a^2 + mcse_b^2).
  double mean_diff_se = 0.0;
  // 95% CI endpoint differences relative to the wider of the two interval
  // widths (scale-free and stable for parameters straddling zero).
  double ci_low_rel = 0.0;
  double ci_high_rel = 0.0;
  double ks = 0.0;  // two-sample Kolmogorov-Smirnov statistic
};

struct ComparisonReport {
  std::vector<ParamComparison> params;
  double time_a_ms = 0.0;
  double time_b_ms = 0.0;
  const ParamComparison& find(const std::string& name) const;
};

// Centralized "match" thresholds shared by comparison-driven tests; the KS
// gate presumes effective sample sizes of roughly 5000 or more.
struct MatchThresholds {
  double mean_se = 3.0;
  double ci_rel = 0.05;
  double ks = 0.05;
};

// Empirical moments, type-7 quantiles, and ESS via initial-positive-sequence
// autocorrelation truncation. A constant column reports ESS = K and is flagged.
PosteriorSummary summarize(const SampleMatrix& s);

// Per-parameter agreement metrics between two samplers of the same model.
// Parameter name sets must match (order may differ; matched by name).
ComparisonReport compare(const SampleMatrix& a, const SampleMatrix& b);

bool passes(const ComparisonReport& report, const MatchThresholds& thresholds);

// Type-7 quantile (linear interpolation of order statistics) of a copy of
// the data; p in [0,1].
double quantile_type7(std::vector<double> values, double p);

double ess_initial_positive(const Eigen::VectorXd& chain);

double ks_statistic(std::vector<double> a, std::vector<double> b);

void write_summary_json(const std::string& path, const PosteriorSummary& s);
void write_summary_csv(const std::string& path, const PosteriorSummary& s);
void write_comparison_json(const std::string& path, const ComparisonReport& r,
                           const MatchThresholds& thresholds);
void write_comparison_csv(const std::string& path, const ComparisonReport& r);

}  // namespace rb::diag
