// pap-lab: run PAP protocol/attack scenarios and summarize transcripts.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "paplab/error.hpp"
#include "paplab/scenario.hpp"
#include "paplab/summary.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw paplab::Error(paplab::ErrorCode::kIoError, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PAP RFID protocol simulator and attack harness"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Execute a scenario and write transcripts + report");
  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string format = "text";
  bool halt_on_error = false;
  run->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--format", format, "Stdout format")->check(CLI::IsMember({"json", "text"}));
  run->add_flag("--halt-on-error", halt_on_error, "Stop at the first failing step");

  auto* summarize = app.add_subcommand("summarize", "Aggregate transcript JSONL files");
  std::string in_dir;
  std::string summary_format = "json";
  summarize->add_option("--in", in_dir, "Directory of *.jsonl transcripts")->required();
  summarize->add_option("--format", summary_format, "Stdout format")
      ->check(CLI::IsMember({"json", "text"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto scenario = paplab::parse_scenario(read_file(scenario_path));
      if (seed) scenario.seed = *seed;
      if (halt_on_error) scenario.halt_on_error = true;
      const auto report = paplab::run_scenario(scenario);
      paplab::write_run(report, out_dir);
      if (format == "json") {
        std::cout << report.to_json().dump(2) << '\n';
      } else {
        std::cout << report.to_text();
      }
      return report.steps_errored == 0 ? 0 : 1;
    }
    const auto summary = paplab::summarize_directory(in_dir);
    if (summary_format == "json") {
      std::cout << summary.to_json().dump(2) << '\n';
    } else {
      std::cout << summary.to_text();
    }
    return 0;
  } catch (const paplab::Error& e) {
    std::cerr << "pap-lab: " << e.what() << '\n';
    return 2;
  }
}
