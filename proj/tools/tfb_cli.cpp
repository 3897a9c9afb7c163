// Command-line front end for the thin obstacle laboratory.
//
// Subcommands: solve, frequency, blowup, geometry (scenario-driven, JSON
// config) and verify (the built-in verification suite).  Exit codes: 0 all
// checks pass, 1 a numerical check failed, 2 usage or configuration error.

#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "tfb/reports.hpp"
#include "tfb/verify.hpp"

namespace {

enum class Mode { Solve, Frequency, Blowup, Geometry, All };

int run_scenario_command(const std::string& config_path, const std::string& out_override,
                         Mode mode) {
  tfb::ScenarioConfig cfg;
  try {
    cfg = tfb::parse_config_file(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    switch (mode) {
      case Mode::Solve:
        cfg.frequency.clear();
        cfg.blowups.clear();
        cfg.geometry = tfb::GeometryAnalysis{};
        break;
      case Mode::Frequency:
        cfg.blowups.clear();
        cfg.geometry = tfb::GeometryAnalysis{};
        break;
      case Mode::Blowup:
        cfg.frequency.clear();
        cfg.geometry = tfb::GeometryAnalysis{};
        break;
      case Mode::Geometry:
        cfg.frequency.clear();
        cfg.blowups.clear();
        break;
      case Mode::All: break;
    }
  } catch (const tfb::ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }

  try {
    const tfb::ScenarioResult result = tfb::run_scenario(cfg);
    for (const auto& c : result.checks)
      std::cout << (c.passed ? "PASS" : "FAIL") << "  " << c.name << "  value "
                << tfb::format_double(c.value) << "  (" << c.detail << ")\n";
    std::cout << "report written to " << cfg.output_dir << "\n";
    if (!result.all_passed()) {
      for (const auto& c : result.checks)
        if (!c.passed) std::cerr << "failed check: " << c.name << "\n";
      return 1;
    }
    return 0;
  } catch (const tfb::ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thin obstacle problem laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir, level = "fast";

  auto add_scenario = [&](const char* name, const char* desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "scenario configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory override");
    return sub;
  };
  CLI::App* cmd_solve = add_scenario("solve", "solve the thin obstacle problem and dump results");
  CLI::App* cmd_freq = add_scenario("frequency", "frequency curves for the configured field");
  CLI::App* cmd_blow = add_scenario("blowup", "blow-up fits at free boundary points");
  CLI::App* cmd_geom = add_scenario("geometry", "free boundary geometry diagnostics");

  CLI::App* cmd_verify = app.add_subcommand("verify", "run the verification suite");
  cmd_verify->add_option("--level", level, "fast or full")
      ->check(CLI::IsMember({"fast", "full"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (cmd_verify->parsed()) {
    const auto results = tfb::verify::run_verification(
        level == "full" ? tfb::verify::Level::Full : tfb::verify::Level::Fast, std::cout);
    for (const auto& r : results)
      if (!r.passed) return 1;
    return 0;
  }
  if (cmd_solve->parsed()) return run_scenario_command(config_path, out_dir, Mode::Solve);
  if (cmd_freq->parsed()) return run_scenario_command(config_path, out_dir, Mode::Frequency);
  if (cmd_blow->parsed()) return run_scenario_command(config_path, out_dir, Mode::Blowup);
  if (cmd_geom->parsed()) return run_scenario_command(config_path, out_dir, Mode::Geometry);
  return 2;
}
