#ifndef RYDTHZ_EXPERIMENTS_HPP
#define RYDTHZ_EXPERIMENTS_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "rydthz/config.hpp"

namespace rydthz {

inline const std::vector<std::string> kCommands = {
    "spectrum", "transmission", "efficiency", "response",
    "metrics",  "g2",           "bandwidth-sweep"};

/// Runs one command: writes <command>.csv, <command>_summary.json and
/// manifest.json under out_dir and returns the summary as serialized JSON.
/// Identical (config, command, seed) inputs produce byte-identical files.
std::string run_experiment(const ExperimentConfig& config,
                           const std::string& command,
                           const std::filesystem::path& out_dir,
                           int threads = 1);

/// Full command-line entry point (argv without the program name).
/// Exit codes: 0 success, 2 config error, 3 physics/solver error,
/// 4 insufficient data.
int run_cli(const std::vector<std::string>& args);

}  // namespace rydthz

#endif  // RYDTHZ_EXPERIMENTS_HPP
