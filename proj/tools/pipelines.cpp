#include "pipelines.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "recbayes/data_io.hpp"
#include "recbayes/errors.hpp"
#include "recbayes/models/beta_bernoulli.hpp"
#include "recbayes/models/hier_gaussian.hpp"
#include "recbayes/models/geostat.hpp"
#include "recbayes/models/poisson_dyn.hpp"

namespace rbcli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using rb::engine::StageConfig;
using rb::engine::StageResult;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw rb::DataError("cannot create output directory: " + dir);
}

void write_json(const std::string& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw rb::DataError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

rb::SampleMatrixMeta meta_for(const StageResult& r, const RunConfig& cfg, int stage) {
  rb::SampleMatrixMeta meta;
  meta.stage = stage;
  meta.k = r.samples.rows();
  meta.seed = cfg.stage.seed;
  meta.acceptance_rates = r.diag.acceptance_rates;
  meta.pool_ess = r.diag.pool_ess;
  meta.timings_ms = r.diag.elapsed_ms + r.diag.prefetch_ms;
  return meta;
}

// Persist one stage: draws + sidecar + plot-ready summary.
ordered_json save_stage(const RunConfig& cfg, const StageResult& r, int stage,
                        const std::string& name) {
  const std::string csv = cfg.out + "/" + name + ".csv";
  rb::write_sample_matrix(csv, r.samples, meta_for(r, cfg, stage));
  const auto summary = rb::diag::summarize(r.samples);
  rb::diag::write_summary_csv(cfg.out + "/" + name + "_summary.csv", summary);
  rb::diag::write_summary_json(cfg.out + "/" + name + "_summary.json", summary);
  ordered_json j;
  j["stage"] = stage;
  j["samples"] = name + ".csv";
  j["summary"] = name + "_summary.csv";
  j["acceptance_rates"] = r.diag.acceptance_rates;
  j["elapsed_ms"] = r.diag.elapsed_ms;
  j["prefetch_ms"] = r.diag.prefetch_ms;
  return j;
}

// ---- model construction from data files -----------------------------------

rb::models::GeoModel build_geo_model(const RunConfig& cfg, const rb::io::GeoData& data) {
  rb::models::GeoModel m;
  m.domain = rb::gp::SpatialDomain::from_raw(data.coords_raw);
  m.y = data.values;
  m.X.resize(m.y.size(), 3);
  m.X.col(0).setOnes();
  m.X.col(1) = m.domain.coords.col(0);
  m.X.col(2) = m.domain.coords.col(1);
  m.priors.gamma = cfg.model_params.value("gamma", 0.05);
  m.priors.alpha1 = cfg.model_params.value("alpha1", 0.0);
  m.priors.alpha2 = cfg.model_params.value("alpha2", 0.0);
  return m;
}

rb::models::HierGaussianModel build_hier_model(const RunConfig& cfg,
                                               const rb::io::HierData& data) {
  rb::models::HierGaussianModel m;
  m.groups = data.groups;
  const auto& p = cfg.model_params;
  m.hyper.alpha = p.value("alpha", 0.001);
  m.hyper.beta = p.value("beta", 1000.0);
  m.hyper.mu0 = p.value("mu0", 0.0);
  m.hyper.sigma02 = p.value("sigma02", 10000.0);
  m.hyper.alpha0 = p.value("alpha0", 0.001);
  m.hyper.beta0 = p.value("beta0", 1000.0);
  m.transient.mu_mean = p.value("transient_mu_mean", 0.0);
  m.transient.mu_var = p.value("transient_mu_var", 10000.0);
  m.transient.ig_shape = m.hyper.alpha;
  m.transient.ig_scale = m.hyper.beta;
  return m;
}

rb::models::PoissonDynModel build_poisson_model(const RunConfig& cfg,
                                                const rb::io::CountData& data) {
  rb::models::PoissonDynModel m;
  m.counts = data.counts;
  const auto& p = cfg.model_params;
  m.hyper.mu1 = p.value("mu1", 8.7);
  m.hyper.sigma21 = p.value("sigma21", 1.69);
  m.hyper.sigma2_phi = p.value("sigma2_phi", 1.0);
  m.hyper.alpha = p.value("alpha", 1.0);
  m.hyper.beta = p.value("beta", 20.0);
  m.tune_var = p.value("tune_var", 0.1);
  return m;
}

rb::gp::PartitionIndex resolve_partition(const RunConfig& cfg, Eigen::Index n) {
  rb::gp::PartitionIndex part;
  if (cfg.partition.assignment == "provided") {
    part.blocks = cfg.partition.blocks;
  } else {
    rb::Rng rng = rb::Rng::stream(cfg.stage.seed, 7777);
    part = rb::gp::PartitionIndex::random(n, cfg.partition.j, rng);
  }
  part.validate(n);
  return part;
}

std::string data_path(const RunConfig& cfg, const std::string& fallback) {
  if (!cfg.data.empty()) return cfg.data;
  return cfg.out + "/" + fallback;
}

// Generate the synthetic dataset when no data path was given; returns the
// path actually read by the fit.
std::string materialize_data(const RunConfig& cfg) {
  if (!cfg.data.empty()) return cfg.data;
  cmd_generate(cfg);
  return data_path(cfg, cfg.model + ".csv");
}

// ---- generate ---------------------------------------------------------------

void generate_beta(const RunConfig& cfg) {
  rb::io::BinaryData data;
  ordered_json truth;
  if (cfg.synthetic.contains("values")) {
    data.values = cfg.synthetic["values"].get<std::vector<int>>();
    truth["values"] = data.values;
  } else {
    rb::Rng rng(cfg.stage.seed);
    const double theta = cfg.synthetic.value("theta", 0.5);
    data.values =
        rb::models::make_synthetic_bernoulli(cfg.synthetic.value("n", 8), theta, rng);
    truth["theta"] = theta;
  }
  rb::io::write_binary_csv(data_path(cfg, "beta-bernoulli.csv"), data);
  write_json(cfg.out + "/truth.json", truth);
}

void generate_geo(const RunConfig& cfg) {
  rb::models::GeoSyntheticSpec spec;
  spec.n = cfg.synthetic.value("n", 120);
  if (cfg.synthetic.contains("beta")) {
    const auto b = cfg.synthetic["beta"].get<std::vector<double>>();
    if (b.size() != 3) throw rb::ConfigError("geostat synthetic beta needs 3 entries");
    spec.beta = Eigen::Vector3d(b[0], b[1], b[2]);
  }
  spec.sigma2 = cfg.synthetic.value("sigma2", 1.0);
  spec.phi = cfg.synthetic.value("phi", 0.1);
  spec.tau2 = cfg.synthetic.value("tau2", 0.2);
  rb::Rng rng(cfg.stage.seed);
  const auto m = rb::models::make_synthetic_geo(spec, rng);

  rb::io::GeoData data;
  data.coords_raw = m.domain.coords;  // generator works in scaled units already
  data.values = m.y;
  rb::io::write_geo_csv(data_path(cfg, "geostat.csv"), data);
  write_json(cfg.out + "/truth.json",
             {{"beta", {spec.beta(0), spec.beta(1), spec.beta(2)}},
              {"sigma2", spec.sigma2},
              {"phi", spec.phi},
              {"tau2", spec.tau2},
              {"n", spec.n}});
}

void generate_hier(const RunConfig& cfg) {
  rb::models::HierSyntheticSpec spec;
  spec.j_groups = cfg.synthetic.value("J", 14);
  spec.small_groups = cfg.synthetic.value("small_groups", 2);
  spec.n_min = cfg.synthetic.value("n_min", 10);
  spec.n_max = cfg.synthetic.value("n_max", 60);
  spec.mu = cfg.synthetic.value("mu", 38.0);
  spec.sigma2 = cfg.synthetic.value("sigma2", 1.0);
  spec.group_var_min = cfg.synthetic.value("group_var_min", 0.5);
  spec.group_var_max = cfg.synthetic.value("group_var_max", 2.0);
  rb::Rng rng(cfg.stage.seed);
  rb::models::HierSyntheticTruth truth;
  const auto m = rb::models::make_synthetic_hier(spec, rng, &truth);

  rb::io::HierData data;
  for (std::size_t j = 0; j < m.groups.size(); ++j) {
    data.group_ids.push_back(std::to_string(j + 1));
    data.groups.push_back(m.groups[j]);
  }
  rb::io::write_hier_csv(data_path(cfg, "hier-gaussian.csv"), data);
  ordered_json t;
  t["mu"] = truth.mu;
  t["sigma2"] = truth.sigma2;
  t["mu_j"] = std::vector<double>(truth.mu_js.data(), truth.mu_js.data() + truth.mu_js.size());
  t["sigma2_j"] = std::vector<double>(truth.sigma2_js.data(),
                                      truth.sigma2_js.data() + truth.sigma2_js.size());
  write_json(cfg.out + "/truth.json", t);
}

void generate_poisson(const RunConfig& cfg) {
  rb::models::PoissonSyntheticSpec spec;
  spec.sites = cfg.synthetic.value("S", 2);
  spec.t_obs = cfg.synthetic.value("T", 36);
  spec.extra_years = cfg.synthetic.value("extra_years", 2);
  spec.missing_year = cfg.synthetic.value("missing_year", 0);
  spec.mu1 = cfg.synthetic.value("mu1", 8.7);
  spec.sigma21 = cfg.synthetic.value("sigma21", 1.69);
  spec.phi_sd = cfg.synthetic.value("phi_sd", 0.03);
  spec.sigma2_s = cfg.synthetic.value("sigma2_s", 0.04);
  rb::Rng rng(cfg.stage.seed);
  rb::models::PoissonSyntheticTruth truth;
  const auto m = rb::models::make_synthetic_poisson(spec, rng, &truth);

  rb::io::CountData data;
  for (std::size_t s = 0; s < m.sites(); ++s) {
    data.site_ids.push_back(std::to_string(s + 1));
    data.first_year.push_back(1);
    data.counts.push_back(m.counts[s]);
  }
  rb::io::write_count_csv(data_path(cfg, "poisson-dyn.csv"), data);
  ordered_json t;
  t["phi"] = std::vector<double>(truth.phi.data(), truth.phi.data() + truth.phi.size());
  t["sigma2"] =
      std::vector<double>(truth.sigma2.data(), truth.sigma2.data() + truth.sigma2.size());
  t["T"] = spec.t_obs;
  t["extra_years"] = spec.extra_years;
  write_json(cfg.out + "/truth.json", t);
}

// ---- fit ---------------------------------------------------------------------

void fit_beta(const RunConfig& cfg, ordered_json& report) {
  const auto data = rb::io::read_binary_csv(data_path(cfg, "beta-bernoulli.csv"));
  rb::models::BetaBernoulliModel m;
  m.data = data.values;
  m.prior = {cfg.model_params.value("a", 1.0), cfg.model_params.value("b", 1.0)};

  ordered_json stages = ordered_json::array();
  if (cfg.mode == "full") {
    const auto post = rb::models::beta_bernoulli_full(m);
    stages.push_back({{"a", post.a}, {"b", post.b}});
    std::printf("full posterior: Beta(%g, %g)\n", post.a, post.b);
  } else {
    // Assemble the ordered value partition from index blocks.
    std::vector<std::vector<int>> parts;
    if (cfg.partition.assignment == "provided") {
      for (const auto& block : cfg.partition.blocks) {
        std::vector<int> vals;
        for (const auto i : block) {
          if (i < 0 || i >= static_cast<Eigen::Index>(m.data.size()))
            throw rb::ConfigError("partition index out of range");
          vals.push_back(m.data[i]);
        }
        parts.push_back(std::move(vals));
      }
    } else {
      rb::Rng rng = rb::Rng::stream(cfg.stage.seed, 7777);
      const auto part = rb::gp::PartitionIndex::random(
          static_cast<Eigen::Index>(m.data.size()), cfg.partition.j, rng);
      for (const auto& block : part.blocks) {
        std::vector<int> vals;
        for (const auto i : block) vals.push_back(m.data[i]);
        parts.push_back(std::move(vals));
      }
    }
    const auto posts = rb::models::beta_bernoulli_recursive(m, parts);
    for (std::size_t j = 0; j < posts.size(); ++j) {
      stages.push_back({{"a", posts[j].a}, {"b", posts[j].b}});
      std::printf("stage %zu posterior: Beta(%g, %g)\n", j + 1, posts[j].a, posts[j].b);
    }
  }
  report["beta_stages"] = stages;
}

void fit_hier(const RunConfig& cfg, ordered_json& report) {
  const auto data = rb::io::read_hier_csv(data_path(cfg, "hier-gaussian.csv"));
  const auto m = build_hier_model(cfg, data);
  ordered_json stages = ordered_json::array();
  if (cfg.mode == "full") {
    const auto fit = rb::models::hier_gaussian_full_fit(m, cfg.stage);
    stages.push_back(save_stage(cfg, fit, 1, "samples_full"));
  } else {
    const auto fit =
        rb::models::hier_gaussian_proposal_rb(m, cfg.stage1, cfg.stage, cfg.strategy());
    for (std::size_t j = 0; j < fit.stage1.size(); ++j)
      stages.push_back(
          save_stage(cfg, fit.stage1[j], 1, "samples_stage1_group" + std::to_string(j + 1)));
    stages.push_back(save_stage(cfg, fit.stage2, 2, "samples_stage2"));
  }
  report["stages"] = stages;
}

void fit_geo(const RunConfig& cfg, ordered_json& report) {
  const auto data = rb::io::read_geo_csv(data_path(cfg, "geostat.csv"));
  const auto m = build_geo_model(cfg, data);
  ordered_json stages = ordered_json::array();
  if (cfg.mode == "full") {
    const auto fit = rb::models::geo_full_fit(m, cfg.stage);
    stages.push_back(save_stage(cfg, fit, 1, "samples_full"));
  } else {
    const auto part = resolve_partition(cfg, m.n());
    rb::models::GeoPprbOptions opt;
    opt.strategy = cfg.strategy();
    opt.stage_iterations = cfg.stage_iterations;
    const auto fits = rb::models::geo_pprb_fit(m, part, cfg.stage, opt);
    for (std::size_t j = 0; j < fits.size(); ++j)
      stages.push_back(
          save_stage(cfg, fits[j], static_cast<int>(j + 1),
                     "samples_stage" + std::to_string(j + 1)));
    ordered_json blocks = ordered_json::array();
    for (const auto& b : part.blocks) blocks.push_back(b);
    report["partition"] = blocks;
  }
  report["stages"] = stages;
}

void fit_poisson(const RunConfig& cfg, ordered_json& report) {
  const auto data = rb::io::read_count_csv(data_path(cfg, "poisson-dyn.csv"));
  const auto m = build_poisson_model(cfg, data);
  ordered_json stages = ordered_json::array();
  if (cfg.mode == "full") {
    const auto fit = rb::models::poisson_dyn_full_fit(m, cfg.stage);
    stages.push_back(save_stage(cfg, fit, 1, "samples_full"));
  } else {
    // Online updating: the last year carries the new counts, the stage-1
    // window ends two years earlier (the year in between was unsurveyed).
    const Eigen::Index t_total = m.years(0);
    if (t_total < 4) throw rb::DataError("online mode needs at least 4 years of data");
    for (std::size_t s = 0; s < m.sites(); ++s)
      if (m.years(s) != t_total)
        throw rb::DataError("online mode requires equal-length series per site");
    std::vector<long long> new_counts;
    for (std::size_t s = 0; s < m.sites(); ++s) {
      if (!m.counts[s].back())
        throw rb::DataError("online mode: the final year must be observed at every site");
      new_counts.push_back(*m.counts[s].back());
    }
    rb::models::PoissonDynModel stage1_model = m;
    for (auto& site : stage1_model.counts) site.resize(t_total - 2);

    StageConfig s1_cfg = cfg.stage1;
    s1_cfg.seed = cfg.stage.seed;
    s1_cfg.workers = cfg.stage.workers;
    const auto stage1 = rb::models::poisson_dyn_full_fit(stage1_model, s1_cfg);
    stages.push_back(save_stage(cfg, stage1, 1, "samples_stage1"));

    const auto updated = rb::models::poisson_dyn_online_update(
        stage1_model, stage1.samples, new_counts, cfg.stage, cfg.strategy());
    stages.push_back(save_stage(cfg, updated, 2, "samples_updated"));
  }
  report["stages"] = stages;
}

}  // namespace

bool log_enabled(const char* level) {
  const char* env = std::getenv("RB_LOG");
  if (!env) return std::string(level) != "debug";
  const std::string v(env);
  if (v == "quiet" || v == "0") return false;
  if (v == "debug") return true;
  return std::string(level) != "debug";
}

void log_line(const std::string& msg) {
  if (log_enabled()) std::fprintf(stderr, "recbayes: %s\n", msg.c_str());
}

void cmd_generate(const RunConfig& cfg) {
  ensure_dir(cfg.out);
  if (cfg.model == "beta-bernoulli") generate_beta(cfg);
  else if (cfg.model == "geostat") generate_geo(cfg);
  else if (cfg.model == "hier-gaussian") generate_hier(cfg);
  else if (cfg.model == "poisson-dyn") generate_poisson(cfg);
  else throw rb::ConfigError("unknown model: " + cfg.model);
  write_effective_config(cfg, cfg.out);
  log_line("wrote synthetic data for " + cfg.model + " to " + cfg.out);
}

void cmd_fit(const RunConfig& cfg) {
  ensure_dir(cfg.out);
  const auto t0 = Clock::now();
  RunConfig resolved = cfg;
  resolved.data = materialize_data(cfg);

  ordered_json report;
  report["model"] = cfg.model;
  report["mode"] = cfg.mode;
  report["data"] = resolved.data;
  report["seed"] = cfg.stage.seed;

  if (cfg.model == "beta-bernoulli") fit_beta(resolved, report);
  else if (cfg.model == "hier-gaussian") fit_hier(resolved, report);
  else if (cfg.model == "geostat") fit_geo(resolved, report);
  else if (cfg.model == "poisson-dyn") fit_poisson(resolved, report);
  else throw rb::ConfigError("unknown model: " + cfg.model);

  report["total_ms"] = ms_since(t0);
  write_json(cfg.out + "/report.json", report);
  write_effective_config(cfg, cfg.out);
  log_line("fit complete: " + cfg.model + " (" + cfg.mode + ") in " +
           std::to_string(ms_since(t0) / 1000.0) + " s");
}

void cmd_compare(const std::string& run_a, const std::string& run_b, const std::string& out,
                 const rb::diag::MatchThresholds& thresholds) {
  ensure_dir(out);
  const auto a = rb::read_sample_matrix(run_a);
  const auto b = rb::read_sample_matrix(run_b);
  auto report = rb::diag::compare(a, b);
  try {
    report.time_a_ms = rb::read_sample_matrix_meta(run_a).timings_ms;
    report.time_b_ms = rb::read_sample_matrix_meta(run_b).timings_ms;
  } catch (const rb::DataError&) {
    // sidecars are optional for comparison inputs
  }
  rb::diag::write_comparison_json(out + "/comparison.json", report, thresholds);
  rb::diag::write_comparison_csv(out + "/comparison.csv", report);
  const bool ok = rb::diag::passes(report, thresholds);
  for (const auto& p : report.params)
    std::printf("%-16s mean_diff_se=%8.3f ci_rel=(%6.4f, %6.4f) ks=%6.4f\n", p.name.c_str(),
                p.mean_diff_se, p.ci_low_rel, p.ci_high_rel, p.ks);
  std::printf("comparison %s (mean_se<%g, ci_rel<%g, ks<%g)\n", ok ? "PASSES" : "FAILS",
              thresholds.mean_se, thresholds.ci_rel, thresholds.ks);
}

void cmd_bench(const RunConfig& cfg) {
  ensure_dir(cfg.out);
  std::FILE* f = std::fopen((cfg.out + "/bench.csv").c_str(), "w");
  if (!f) throw rb::DataError("cannot open for writing: " + cfg.out + "/bench.csv");

  if (cfg.model == "geostat") {
    std::vector<int> sizes = cfg.bench.value("sizes", std::vector<int>{60, 120, 240});
    std::fprintf(f, "n,full_ms,recursive_ms,ratio\n");
    for (const int n : sizes) {
      RunConfig gen = cfg;
      gen.synthetic["n"] = n;
      rb::models::GeoSyntheticSpec spec;
      spec.n = n;
      rb::Rng rng(cfg.stage.seed + n);
      const auto m = rb::models::make_synthetic_geo(spec, rng);

      auto t0 = Clock::now();
      rb::models::geo_full_fit(m, cfg.stage);
      const double full_ms = ms_since(t0);

      const auto part = resolve_partition(cfg, m.n());
      rb::models::GeoPprbOptions opt;
      opt.strategy = cfg.strategy();
      opt.stage_iterations = cfg.stage.iterations;  // equal iterations per stage
      t0 = Clock::now();
      rb::models::geo_pprb_fit(m, part, cfg.stage, opt);
      const double rec_ms = ms_since(t0);

      std::fprintf(f, "%d,%.3f,%.3f,%.5f\n", n, full_ms, rec_ms, rec_ms / full_ms);
      log_line("bench geostat n=" + std::to_string(n) + ": full " + std::to_string(full_ms) +
               " ms, recursive " + std::to_string(rec_ms) + " ms");
    }
  } else if (cfg.model == "poisson-dyn") {
    std::vector<int> sizes = cfg.bench.value("sizes", std::vector<int>{36, 72, 144});
    const int repeats = cfg.bench.value("repeats", 5);
    std::fprintf(f, "T,update_ms,refit_ms\n");
    for (const int t_obs : sizes) {
      rb::models::PoissonSyntheticSpec spec;
      spec.t_obs = t_obs;
      rb::Rng rng(cfg.stage.seed + t_obs);
      const auto full_model = rb::models::make_synthetic_poisson(spec, rng);
      rb::models::PoissonDynModel stage1_model = full_model;
      for (auto& site : stage1_model.counts) site.resize(t_obs);
      std::vector<long long> new_counts;
      for (std::size_t s = 0; s < full_model.sites(); ++s)
        new_counts.push_back(*full_model.counts[s][t_obs + 1]);

      StageConfig s1 = cfg.stage1;
      s1.seed = cfg.stage.seed;
      const auto stage1 = rb::models::poisson_dyn_full_fit(stage1_model, s1);

      std::vector<double> times;
      for (int r = 0; r < repeats; ++r) {
        const auto t0 = Clock::now();
        rb::models::poisson_dyn_online_update(stage1_model, stage1.samples, new_counts,
                                              cfg.stage, cfg.strategy());
        times.push_back(ms_since(t0));
      }
      std::sort(times.begin(), times.end());
      const double update_ms = times[times.size() / 2];

      const auto t0 = Clock::now();
      rb::models::poisson_dyn_full_fit(full_model, s1);
      const double refit_ms = ms_since(t0);

      std::fprintf(f, "%d,%.3f,%.3f\n", t_obs, update_ms, refit_ms);
      log_line("bench poisson-dyn T=" + std::to_string(t_obs) + ": update " +
               std::to_string(update_ms) + " ms (median of " + std::to_string(repeats) +
               "), refit " + std::to_string(refit_ms) + " ms");
    }
  } else {
    throw rb::ConfigError("bench supports geostat and poisson-dyn only");
  }
  if (std::fclose(f) != 0) throw rb::DataError("write failed: " + cfg.out + "/bench.csv");
  write_effective_config(cfg, cfg.out);
}

}  // namespace rbcli
