#pragma once

#include "sar/theory.hpp"
#include "sar/wiener.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sar {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Settings shared by the `run` and `rates` subcommands.
struct FlowSettings {
  std::string problem = "elliptic1d";  // elliptic1d | elliptic2d | diagonal
  int n = 0;                           // nodes per axis; 0 picks the preset default
  double delta = 0.02;
  double theta = 0.0;
  int ensemble_size = 1;
  double dt = 0.0;                     // 0 selects dt_factor / ||F'(x_bar)||^2
  double dt_factor = 0.5;
  double tau = 1.5;
  double eps0 = 1.0;
  double eta = 0.1;
  double delta0 = 1.0;
  long max_steps = 100000;
  CovarianceSpec cov;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string initial_guess = "mean";  // "mean" or a number
  std::string scale = "1";             // number or "auto"
  double gamma = 1.0 / 3.0;            // diagonal source condition
  double source_norm = 1.0;
  std::string source_profile = "gaussian";  // "gaussian" or "saturating"
  double exponent = 1.0;               // s_j = j^-exponent
  std::vector<double> bands{0.6, 0.85};
  std::vector<double> deltas;          // rates only
  std::optional<double> inject_exponent;  // rates only: synthetic errors C * delta^p
  double inject_constant = 1.0;

  int nodes_per_axis() const;
};

/// The reference constants are always compared at the default TheoryParams.
struct CheckSettings {
  int samples = 1000;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  FlowSettings run;
  FlowSettings rates;
  TheoryParams constants;
  CheckSettings check;
};

FlowSettings default_rates_settings();

/// Parses the INI-style config. Sections: [run], [rates], [constants],
/// [check]. Unknown sections or keys and malformed values throw ConfigError.
ExperimentConfig parse_config_string(const std::string& text);
ExperimentConfig load_config(const std::string& path);

std::vector<double> parse_real_list(const std::string& text);

}  // namespace sar
