#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <caloric/scenario.hpp>

int main(int argc, char** argv) {
  CLI::App app{"Caloric curves and level-density singularities of separable "
               "few-DoF Hamiltonians"};
  app.require_subcommand(1);

  std::string config_path;
  std::string profile = "strict";
  caloric::RunOptions options;

  CLI::App* run = app.add_subcommand("run", "execute a scenario config");
  run->add_option("config", config_path, "scenario config file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", options.out_root,
                  "output root directory (default: runs)");
  run->add_option("--threads", options.threads, "worker threads for sweeps")
      ->check(CLI::PositiveNumber);
  run->add_option("--tolerance-profile", profile,
                  "quadrature profile: fast or strict")
      ->check(CLI::IsMember({"fast", "strict"}));

  CLI11_PARSE(app, argc, argv);

  std::ifstream in(config_path);
  std::ostringstream buf;
  buf << in.rdbuf();

  caloric::Scenario scenario;
  try {
    scenario = caloric::parse_scenario(buf.str());
  } catch (const caloric::ScenarioError& e) {
    std::fprintf(stderr, "%s: %s\n", config_path.c_str(), e.what());
    return 2;
  }
  for (const auto& warning : scenario.warnings)
    std::fprintf(stderr, "warning: %s\n", warning.c_str());

  options.fast_profile = profile == "fast";
  const caloric::RunResult result = caloric::run_scenario(scenario, options);

  std::printf("%s\n", result.directory.c_str());
  for (const auto& name : result.files) std::printf("  %s\n", name.c_str());
  for (const auto& error : result.errors)
    std::fprintf(stderr, "error: %s\n", error.c_str());
  return result.errors.empty() ? 0 : 1;
}
