#pragma once

// Config-driven experiment runner behind the `rgreen` command line tool.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgreen/drivers.hpp"
#include "rgreen/potential.hpp"

namespace rgreen {

inline constexpr const char* kToolVersion = "0.1.0";

struct DriverConfig {
  DriverKind kind = DriverKind::constant;
  MapFamily family;
  double alpha = 0.0;   ///< circle_rotation
  double factor = 0.5;  ///< contraction
  Param anchor;         ///< constant / contraction
  Param f0;
};

struct ExperimentConfig {
  DriverConfig driver;
  GridSpec grid{128, 2.0};
  int depth = 20;
  std::size_t length = 64;
  std::size_t samples = 10000;
  std::vector<int> depths{2, 3, 4, 5, 6, 7, 8};
  std::vector<std::size_t> indices{0, 1, 2};
  cplx root{2.0, 0.3};
  std::string phi = "cos1";
  std::string psi = "logdist";
  std::vector<Param> perturbations;
  double p_hat = 1.0;
  std::size_t horizon = 100;
  double radius = 0.02;
  std::vector<double> calibration;
  std::string output = "out";
  std::uint64_t seed = 0;
  double tail_tolerance = 1e-4;
  double drift_tolerance = 0.05;
  int max_depth = 60;
};

nlohmann::json to_json(const ExperimentConfig& c);
/// Validates every key; unknown keys are rejected. Errors name the key path.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Parses and validates; errors carry the line of the offending key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

nlohmann::json param_to_json(const Param& p);
Param param_from_json(const nlohmann::json& j);

DriverSystem make_driver(const DriverConfig& c);

struct RunFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool strict = false;
  bool force = false;
  int threads = 0;
};

struct RunResult {
  int exit_code = 0;
  bool hypothesis_violated = false;
  std::vector<std::string> artifacts;
  std::string output_dir;
  std::string message;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitHypothesis = 4;

const std::vector<std::string>& subcommands();

/// Runs one subcommand, writes artifacts and manifest.json into the output
/// directory. Library errors propagate; use exit_code_for to map them.
RunResult run_experiment(const std::string& subcommand, ExperimentConfig config, const RunFlags& flags);

/// 2 for configuration errors, 3 for numeric failures, 4 for hypothesis errors.
int exit_code_for(const std::exception& e) noexcept;

/// Hex SHA-256 of a file.
std::string sha256_file(const std::string& path);

}  // namespace rgreen
