#pragma once

#include "hotspot/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace hotspot {

// Files written by a subcommand, relative to the output directory.
struct CommandResult {
    std::vector<std::string> files;
};

// Every subcommand writes resolved_config.json next to its outputs.
CommandResult run_ingest(const RunConfig& cfg, std::ostream& log);
CommandResult run_simulate(const RunConfig& cfg, std::ostream& log);
CommandResult run_fit(const RunConfig& cfg, std::ostream& log);
CommandResult run_predict(const RunConfig& cfg, std::ostream& log);
CommandResult run_backtest(const RunConfig& cfg, std::ostream& log);
CommandResult run_kernel_export(const RunConfig& cfg, std::ostream& log);

// Dispatch by subcommand name ("ingest", "simulate", "fit", "predict", "backtest", "kernel-export").
CommandResult run_command(const std::string& name, const RunConfig& cfg, std::ostream& log);

} // namespace hotspot
