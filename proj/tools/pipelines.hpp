#pragma once

#include <string>

#include "config.hpp"

namespace rbcli {

// Subcommand bodies; each throws rb:: errors which main maps to exit codes.
void cmd_generate(const RunConfig& cfg);
void cmd_fit(const RunConfig& cfg);
void cmd_compare(const std::string& run_a, const std::string& run_b, const std::string& out,
                 const rb::diag::MatchThresholds& thresholds);
void cmd_bench(const RunConfig& cfg);

// RB_LOG=quiet silences progress lines; debug adds detail.
bool log_enabled(const char* level = "info");
void log_line(const std::string& msg);

}  // namespace rbcli
