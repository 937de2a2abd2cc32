#pragma once

#include <json.hpp>
#include <string>

#include "recbayes/diagnostics.hpp"
#include "recbayes/engine.hpp"
#include "recbayes/gaussian_process.hpp"

namespace rbcli {

// A run is fully described by one JSON config; every default is made
// explicit in the effective config written next to the outputs, and
// re-feeding that file reproduces the run.
struct RunConfig {
  std::string model;  // beta-bernoulli | hier-gaussian | geostat | poisson-dyn
  std::string mode;   // full | prior-rb | proposal-rb | pprb | online
  std::string data;   // input CSV; empty when running from a synthetic spec
  nlohmann::json synthetic;     // generator spec, interpreted per model
  nlohmann::json model_params;  // hyperparameters, defaults from the model
  nlohmann::json bench;         // size-ladder spec for the bench command

  struct Partition {
    int j = 0;
    std::string assignment = "random";  // random | provided
    std::vector<std::vector<Eigen::Index>> blocks;
  };
  Partition partition;

  rb::engine::StageConfig stage;
  rb::engine::StageConfig stage1;  // first-stage overrides where relevant
  Eigen::Index stage_iterations = 0;  // pool-stage chain length; 0 = stage.iterations
  std::string resample = "with-replacement";

  rb::diag::MatchThresholds thresholds;
  std::string out = "runs/out";

  nlohmann::ordered_json effective;  // merged defaults + user config

  rb::engine::ResampleStrategy strategy() const;
};

RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_json(const nlohmann::json& user);

// Write the effective config (defaults filled) into the run directory.
void write_effective_config(const RunConfig& cfg, const std::string& dir);

}  // namespace rbcli
