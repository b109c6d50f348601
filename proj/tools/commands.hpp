#pragma once

#include "run_config.hpp"

namespace ness::cli {

// Each command writes its files plus manifest.json into config.out and returns an exit code.
int cmd_solve(const RunConfig& config);
int cmd_junction(const RunConfig& config);
int cmd_simulate(const RunConfig& config);
int cmd_reservoir(const RunConfig& config);
int cmd_fick(const RunConfig& config);

/// Dispatches on config.command and maps library exceptions to exit codes.
int run(const RunConfig& config);

/// Full entry point: parsing, dispatch and diagnostics on stderr.
int main_entry(int argc, const char* const* argv);

}  // namespace ness::cli
