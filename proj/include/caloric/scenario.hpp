#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "caloric/potential.hpp"

namespace caloric {

// Raw component parameters as given in a config file, kept verbatim so a
// parse -> serialize -> parse round trip is exact.
struct ComponentSpec {
  std::string kind;  // harmonic | quartic | plateau | power
  double a = 0.0, b = 0.0, c = 0.0;
  std::vector<Plateau> plateaus;
  double power_b = 0.0, power_I = 0.0;
};

struct BetaGridSpec {
  double min = 0.1;
  double max = 10.0;
  int count = 20;
  bool log_spacing = false;
};

struct EnergyGridSpec {
  double max = 10.0;
  int cells = 2000;
};

struct OutputSpec {
  bool canonical_sweep = false;
  bool micro_sweep = false;
  bool caloric_curve = false;
  bool stationary_points = false;
  bool singularity_report = false;
  bool closed_form_checks = false;
  std::vector<double> distribution_betas;
};

struct Scenario {
  std::vector<ComponentSpec> components;
  BetaGridSpec beta_grid;
  EnergyGridSpec energy_grid;
  OutputSpec outputs;
  std::vector<std::string> warnings;  // non-fatal semantic notes
};

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

// Sectioned key-value format; see the scenarios/ directory for samples.
// Unknown keys and malformed values raise ScenarioError with the line.
Scenario parse_scenario(const std::string& text);

std::string serialize_scenario(const Scenario& scenario);

SeparableSystem build_system(const Scenario& scenario);

std::vector<double> beta_values(const BetaGridSpec& grid);

struct RunOptions {
  std::string out_root = "runs";
  int threads = 1;
  bool fast_profile = false;
};

struct RunResult {
  std::string directory;
  std::vector<std::string> files;   // basenames written, in output order
  std::vector<std::string> errors;  // per-output failures, run continued
};

// Executes every requested output; a failing output is recorded in errors
// (and the manifest) without aborting the rest. CSV bytes are deterministic
// for a fixed config and platform.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options);

}  // namespace caloric
