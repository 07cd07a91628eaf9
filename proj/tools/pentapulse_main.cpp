#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pentapulse/error.hpp"
#include "pentapulse/scenario.hpp"

namespace pp = pentapulse;

int main(int argc, char** argv) {
  CLI::App app{"Five-level pulse propagation, transfer and storage experiments"};
  app.require_subcommand(1);
  std::string config_path, out_dir, sweep;
  std::string chosen;

  for (const char* name : {"eigen", "transfer", "propagate", "store", "double-store", "check-adiabatic"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory")->required();
    sub->add_option("--sweep", sweep, "path:start:stop:count or path:v1,v2,...");
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? pp::exit_code::ok : pp::exit_code::malformed_config;
  }

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot read " << config_path << "\n";
    return pp::exit_code::malformed_config;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  const pp::Command cmd = pp::command_from_string(chosen);
  pp::RunOutcome outcome;
  try {
    outcome = sweep.empty() ? pp::run_scenario_text(buf.str(), cmd, out_dir)
                            : pp::run_sweep(buf.str(), cmd, out_dir, pp::parse_sweep(sweep));
  } catch (const pp::ConfigError& e) {
    for (const auto& p : e.problems()) std::cerr << p << "\n";
    return pp::exit_code::malformed_config;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return pp::exit_code::numerical_failure;
  }

  if (cmd == pp::Command::check_adiabatic && !outcome.summary.empty()) std::cout << outcome.summary;
  (outcome.exit_code == pp::exit_code::ok ? std::cout : std::cerr) << outcome.message << "\n";
  return outcome.exit_code;
}
