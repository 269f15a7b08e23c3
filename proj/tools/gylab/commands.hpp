#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "output.hpp"

namespace gylab::cli {

enum ExitCode : int { kPass = 0, kIdentityFail = 1, kNumericFail = 2, kConfigFail = 3 };

struct RunOptions {
  std::string out_dir = ".";
  bool no_timestamp = false;
  std::optional<std::string> which;  // overrides numerics.which for verify
};

struct CommandOutput {
  int exit_code = kPass;
  Json report;
  std::optional<std::string> csv;  // table written next to the report
};

CommandOutput cmd_solve(const RunConfig& cfg);
CommandOutput cmd_verify(const RunConfig& cfg, const std::string& which);
CommandOutput cmd_converge(const RunConfig& cfg);

/// Full pipeline: load config, dispatch, write `<out>/<prefix>_<command>.json`
/// (and .csv), map errors to exit codes. Messages go to `err`.
int run(const std::string& command, const std::string& config_path, const RunOptions& opts,
        std::ostream& err);

}  // namespace gylab::cli
