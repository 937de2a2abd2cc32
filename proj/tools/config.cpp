#include "config.hpp"

#include <fstream>
#include <set>

#include "recbayes/errors.hpp"

namespace rbcli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void deep_merge(ordered_json& base, const json& over) {
  if (!over.is_object() || !base.is_object()) {
    base = over;
    return;
  }
  for (const auto& [key, value] : over.items()) {
    if (base.contains(key) && base[key].is_object() && value.is_object()) {
      deep_merge(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

ordered_json stage_defaults(Eigen::Index iterations, Eigen::Index burn_in, Eigen::Index thin) {
  return {{"iterations", iterations}, {"burn_in", burn_in},     {"thin", thin},
          {"seed", 1},                {"workers", 1},           {"acceptance_target", 0.3}};
}

ordered_json defaults_for(const std::string& model, const std::string& mode) {
  ordered_json d;
  d["model"] = model;
  d["mode"] = mode;
  d["data"] = "";
  d["out"] = "runs/out";
  d["resample"] = "with-replacement";
  d["thresholds"] = {{"mean_se", 3.0}, {"ci_rel", 0.05}, {"ks", 0.05}};

  if (model == "beta-bernoulli") {
    d["stage"] = stage_defaults(1, 0, 1);
    d["partition"] = {{"J", 4}, {"assignment", "random"}};
    d["model_params"] = {{"a", 1.0}, {"b", 1.0}};
    d["synthetic"] = {{"n", 8}, {"theta", 0.5}};
  } else if (model == "hier-gaussian") {
    d["stage"] = mode == "proposal-rb" ? stage_defaults(10000, 0, 1)
                                       : stage_defaults(50000, 5000, 1);
    d["stage1"] = stage_defaults(100000, 10000, 10);
    d["model_params"] = {{"alpha", 0.001},  {"beta", 1000.0},  {"mu0", 0.0},
                         {"sigma02", 10000.0}, {"alpha0", 0.001}, {"beta0", 1000.0},
                         {"transient_mu_mean", 0.0}, {"transient_mu_var", 10000.0}};
    d["synthetic"] = {{"J", 14}, {"small_groups", 2}, {"n_min", 10}, {"n_max", 60},
                      {"mu", 38.0}, {"sigma2", 1.0},
                      {"group_var_min", 0.5}, {"group_var_max", 2.0}};
  } else if (model == "geostat") {
    d["stage"] = stage_defaults(20000, 5000, 1);
    d["stage_iterations"] = 0;
    d["partition"] = {{"J", 3}, {"assignment", "random"}};
    d["model_params"] = {{"gamma", 0.05}, {"alpha1", 0.0}, {"alpha2", 0.0}};
    d["synthetic"] = {{"n", 120}, {"beta", {1.0, 2.0, -1.0}},
                      {"sigma2", 1.0}, {"phi", 0.1}, {"tau2", 0.2}};
  } else if (model == "poisson-dyn") {
    d["stage"] = mode == "online" ? stage_defaults(100000, 0, 1)
                                  : stage_defaults(100000, 20000, 1);
    d["stage1"] = stage_defaults(100000, 20000, 1);
    d["model_params"] = {{"mu1", 8.7},  {"sigma21", 1.69}, {"sigma2_phi", 1.0},
                         {"alpha", 1.0}, {"beta", 20.0},    {"tune_var", 0.1}};
    d["synthetic"] = {{"S", 2}, {"T", 36}, {"extra_years", 2}, {"missing_year", 0},
                      {"mu1", 8.7}, {"sigma21", 1.69},
                      {"phi_sd", 0.03}, {"sigma2_s", 0.04}};
  } else {
    throw rb::ConfigError("unknown model: " + model);
  }

  if (model == "poisson-dyn" || model == "geostat") {
    d["bench"] = {{"sizes", json::array()}, {"repeats", 5}};
  }
  return d;
}

rb::engine::StageConfig parse_stage(const json& s) {
  rb::engine::StageConfig cfg;
  cfg.iterations = s.value("iterations", Eigen::Index{0});
  cfg.burn_in = s.value("burn_in", Eigen::Index{0});
  cfg.thin = s.value("thin", Eigen::Index{1});
  cfg.seed = s.value("seed", std::uint64_t{1});
  cfg.workers = s.value("workers", 1);
  cfg.acceptance_target = s.value("acceptance_target", 0.3);
  return cfg;
}

const std::set<std::string> kModes{"full", "prior-rb", "proposal-rb", "pprb", "online"};

void validate_mode(const std::string& model, const std::string& mode) {
  if (!kModes.count(mode)) throw rb::ConfigError("unknown mode: " + mode);
  const bool ok = mode == "full" || (mode == "prior-rb" && model == "beta-bernoulli") ||
                  (mode == "proposal-rb" && model == "hier-gaussian") ||
                  (mode == "pprb" && model == "geostat") ||
                  (mode == "online" && model == "poisson-dyn");
  if (!ok) throw rb::ConfigError("mode '" + mode + "' is not valid for model '" + model + "'");
}

}  // namespace

rb::engine::ResampleStrategy RunConfig::strategy() const {
  return rb::engine::resample_strategy_from_string(resample);
}

RunConfig run_config_from_json(const json& user) {
  if (!user.is_object()) throw rb::ConfigError("config must be a JSON object");
  if (!user.contains("model")) throw rb::ConfigError("config is missing 'model'");
  if (!user.contains("mode")) throw rb::ConfigError("config is missing 'mode'");

  RunConfig cfg;
  cfg.model = user["model"].get<std::string>();
  cfg.mode = user["mode"].get<std::string>();
  validate_mode(cfg.model, cfg.mode);

  ordered_json merged = defaults_for(cfg.model, cfg.mode);
  deep_merge(merged, user);
  cfg.effective = merged;

  cfg.data = merged.value("data", std::string{});
  cfg.out = merged.value("out", std::string{"runs/out"});
  cfg.synthetic = merged.value("synthetic", json::object());
  cfg.model_params = merged.value("model_params", json::object());
  cfg.bench = merged.value("bench", json::object());
  cfg.resample = merged.value("resample", std::string{"with-replacement"});
  cfg.stage = parse_stage(merged.value("stage", json::object()));
  cfg.stage1 = merged.contains("stage1") ? parse_stage(merged["stage1"]) : cfg.stage;
  cfg.stage_iterations = merged.value("stage_iterations", Eigen::Index{0});

  if (merged.contains("thresholds")) {
    const auto& t = merged["thresholds"];
    cfg.thresholds.mean_se = t.value("mean_se", 3.0);
    cfg.thresholds.ci_rel = t.value("ci_rel", 0.05);
    cfg.thresholds.ks = t.value("ks", 0.05);
  }

  if (merged.contains("partition")) {
    const auto& p = merged["partition"];
    cfg.partition.j = p.value("J", 0);
    cfg.partition.assignment = p.value("assignment", std::string{"random"});
    if (cfg.partition.assignment != "random" && cfg.partition.assignment != "provided")
      throw rb::ConfigError("partition assignment must be 'random' or 'provided'");
    if (p.contains("blocks")) {
      for (const auto& b : p["blocks"])
        cfg.partition.blocks.push_back(b.get<std::vector<Eigen::Index>>());
    }
    if (cfg.partition.assignment == "provided" && cfg.partition.blocks.empty())
      throw rb::ConfigError("partition assignment 'provided' requires 'blocks'");
  }

  cfg.stage.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rb::ConfigError("cannot open config: " + path);
  json user;
  try {
    user = json::parse(in);
  } catch (const json::parse_error& e) {
    throw rb::ConfigError("config parse error in " + path + ": " + e.what());
  }
  return run_config_from_json(user);
}

void write_effective_config(const RunConfig& cfg, const std::string& dir) {
  std::ofstream out(dir + "/effective_config.json");
  if (!out) throw rb::DataError("cannot open for writing: " + dir + "/effective_config.json");
  ordered_json j = cfg.effective;
  j["out"] = cfg.out;
  j["stage"]["seed"] = cfg.stage.seed;
  j["stage"]["workers"] = cfg.stage.workers;
  out << j.dump(2) << '\n';
}

}  // namespace rbcli
