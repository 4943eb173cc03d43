#pragma once

#include "puo/app/config.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace puo::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitInvariantFailure = 1,
  kExitUsage = 2,
  kExitNumerical = 3,
  kExitScanDegenerate = 4,
};

int exit_code_for(ErrorKind kind);

struct CommandResult {
  int exit_code = kExitOk;
  Json report;
};

/// Full invariant suite. `first_failure` names the first failing check.
CommandResult cmd_verify(const RunConfig& config);
CommandResult cmd_modes(const RunConfig& config);
CommandResult cmd_embed(const RunConfig& config);
CommandResult cmd_scan(const RunConfig& config);

/// Writes the trajectory (CSV or JSON) to `data` and returns the summary report.
CommandResult cmd_simulate(const RunConfig& config, std::ostream& data);

/// Entry point behind the `puo` binary; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace puo::app
