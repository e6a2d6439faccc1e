#pragma once

#include "robusthedge/io.hpp"
#include "robusthedge/random.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace robusthedge {

enum ExitCode : int { kExitOk = 0, kExitMalformed = 1, kExitNumerics = 2, kExitNa1Fails = 3 };

struct RunConfig {
  std::string command;
  std::string model;
  std::string claim;
  std::string spec;
  std::string price;
  std::string surface;
  std::string payoff;
  std::string out;
  std::optional<BsbGrid> grid;
  double grid_step = 0.02;
  std::optional<std::size_t> samples;
  std::uint64_t seed = kDefaultSeed;
  std::optional<double> tolerance;
  double horizon = 1.0;
  std::optional<int> steps;
  Stepper stepper = Stepper::kImplicit;

  /// Resolved configuration, defaults included.
  Json echo() const;
};

struct ConfigError {
  std::string key;
  int line = 0;  // 0 when the key does not come from a file
  std::string message;

  std::string to_string() const;
};

struct ConfigResult {
  std::optional<RunConfig> config;
  std::vector<ConfigError> errors;
};

/// Structural validation of a raw JSON config. Every problem is collected;
/// line numbers refer to `raw_text`.
ConfigResult validate_config(const std::string& raw_text, const std::string& origin = "config");
ConfigResult validate_config_document(const Json& raw, const std::string& raw_text = {}, const std::string& origin = "config");

struct RunReport {
  std::string command;
  Json config;
  double duration_seconds = 0.0;
  Json results = Json::object();
  std::vector<std::string> warnings;
  std::vector<std::string> artifacts;
  int exit_code = kExitOk;
  std::string error;

  Json to_json() const;
};

/// Runs one command. Artifacts go to config.out (plus a `.summary.json`
/// sidecar for CSV artifacts); never throws.
RunReport dispatch(const RunConfig& config);

}  // namespace robusthedge
