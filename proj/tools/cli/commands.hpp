#pragma once

#include <iosfwd>

#include "scenario.hpp"

namespace tmfg::cli {

enum ExitCode : int { kSuccess = 0, kNotConverged = 1, kConfigError = 2 };

// Each command writes its artifacts under cfg.output.dir and a human-readable report to `log`.
int cmd_stationary(const ScenarioConfig& cfg, std::ostream& log);
int cmd_evolve(const ScenarioConfig& cfg, std::ostream& log);
int cmd_criteria(const ScenarioConfig& cfg, std::ostream& log);
int cmd_sweep(const ScenarioConfig& cfg, std::ostream& log);
int cmd_verify(const ScenarioConfig& cfg, std::ostream& log);

/// Full command-line entry point: parses argv, dispatches, and maps errors to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tmfg::cli
