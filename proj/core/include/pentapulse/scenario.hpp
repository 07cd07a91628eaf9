#pragma once

// Runs a configured experiment and writes its CSV series and JSON summary.

#include <filesystem>
#include <string>
#include <vector>

#include "pentapulse/config.hpp"

namespace pentapulse {

enum class Command { eigen, transfer, propagate, store, double_store, check_adiabatic };

std::string_view to_string(Command c);
Command command_from_string(std::string_view name);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int malformed_config = 1;
inline constexpr int regime_refusal = 2;
inline constexpr int numerical_failure = 3;
}  // namespace exit_code

struct RunOutcome {
  int exit_code = exit_code::ok;
  std::string message;                   // error text or a one-line result
  std::string summary;                   // JSON text written as summary.json (empty on failure)
  std::vector<std::filesystem::path> files;
  bool expectations_met = true;
};

/// Runs `config` under `command` into `out_dir`. Never throws for run-time
/// failures: they are mapped to exit codes with the message set.
RunOutcome run_scenario(const ScenarioConfig& config, Command command,
                        const std::filesystem::path& out_dir);

/// Parses `text` and runs it; malformed configs give exit code 1 with every
/// problem listed in the message.
RunOutcome run_scenario_text(const std::string& text, Command command,
                             const std::filesystem::path& out_dir);

struct SweepSpec {
  std::string path;  // dotted config path
  std::vector<double> values;
};

/// "path:start:stop:count" with count >= 1 linearly spaced values, or
/// "path:v1,v2,...".
SweepSpec parse_sweep(const std::string& spec);

/// Runs every sweep value concurrently, each into out_dir/sweep_<i>, and
/// writes out_dir/sweep.json. The exit code is the largest of the runs.
RunOutcome run_sweep(const std::string& text, Command command, const std::filesystem::path& out_dir,
                     const SweepSpec& sweep);

}  // namespace pentapulse
