#pragma once

#include "sar/config.hpp"
#include "sar/flow.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

namespace sar {

/// Seed tags for derive_seed.
enum SeedTag : std::uint64_t { kWienerTag = 1, kDataTag = 2, kSourceTag = 3, kLevelTag = 100 };

/// A problem instance with synthetic data, ready for run().
struct Scenario {
  std::unique_ptr<ForwardProblem> problem;
  GridVector truth;
  GridVector y_exact;
  GridVector y_delta;
  GridVector x_bar;
  double noise_norm = 0.0;        // ||y_delta - y_exact||, the level used by the stopping rule
  double scale = 1.0;             // rho for elliptic problems
  double derivative_norm = 0.0;   // power-iteration estimate of ||F'(x_bar)||
  double dt = 0.0;                // effective step
  bool dt_auto = false;
};

/// Builds the preset named in `s` with noise level `delta`. Data noise uses
/// `data_seed`; the diagonal source element uses `source_seed`.
Scenario build_scenario(const FlowSettings& s, double delta, std::uint64_t data_seed, std::uint64_t source_seed);

/// Flow configuration for a scenario; master_seed drives the Wiener increments.
SarConfig make_sar_config(const FlowSettings& s, const Scenario& sc, std::uint64_t master_seed);

/// Writes trajectory.csv, mean.csv, band_<level>.csv and summary.json.
RunRecord cmd_run(const FlowSettings& s, const std::filesystem::path& out);

struct RatesResult {
  std::vector<double> deltas;
  std::vector<long> stop_steps;
  std::vector<double> errors;
  double slope = 0, intercept = 0, r_squared = 0;
  double theoretical_exponent = 0;
};

/// Writes rates.csv and rates_fit.json.
RatesResult cmd_rates(const FlowSettings& s, const std::filesystem::path& out);

/// Writes constants.csv and prints an aligned table to `text`.
ConstantsTable cmd_constants(const TheoryParams& p, const std::filesystem::path& out, std::string* text = nullptr);

/// Writes check.json; returns whether every check passed.
bool cmd_check(const CheckSettings& s, const std::filesystem::path& out);

/// Shortest text that reads back as the same double, for file names.
std::string level_label(double level);

}  // namespace sar
