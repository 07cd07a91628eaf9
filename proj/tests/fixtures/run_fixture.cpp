// Runs one bundled scenario through its own command and succeeds only when the
// run exits 0 and every embedded expectation holds.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "pentapulse/scenario.hpp"

int main(int argc, char** argv) {
  if (argc != 4) {
    std::fprintf(stderr, "usage: run_fixture <scenario.json> <command> <out-dir>\n");
    return 2;
  }
  std::ifstream in(argv[1], std::ios::binary);
  std::stringstream text;
  text << in.rdbuf();
  const auto command = pentapulse::command_from_string(argv[2]);
  const std::filesystem::path out = argv[3];
  std::filesystem::remove_all(out);
  const auto r = pentapulse::run_scenario_text(text.str(), command, out);
  std::printf("exit %d: %s\n", r.exit_code, r.message.c_str());
  if (!r.summary.empty()) {
    const auto s = nlohmann::json::parse(r.summary);
    if (s.contains("expect")) {
      for (const auto& [name, e] : s["expect"].items()) {
        std::printf("  %-32s %-5s %s\n", name.c_str(), e.value("pass", false) ? "ok" : "MISS",
                    e.contains("value") ? e["value"].dump().c_str() : "");
      }
    }
  }
  return r.exit_code == 0 && r.expectations_met ? 0 : 1;
}
