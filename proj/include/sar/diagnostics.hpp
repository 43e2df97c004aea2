#pragma once

#include "sar/forward_problem.hpp"

#include <utility>
#include <vector>

namespace sar {

using Ensemble = std::vector<GridVector>;

/// sqrt(1/N sum_i ||x_i - x_true||^2)
double rmse(const Ensemble& ensemble, const GridVector& x_true);
/// sqrt(1/N sum_i ||F(x_i) - y_delta||^2)
double rmsr(const Ensemble& ensemble, const ForwardProblem& problem, const GridVector& y_delta);

GridVector ensemble_mean(const Ensemble& ensemble);

/// total = bias_sq + variance, all with divisor N.
struct BiasVariance {
  double bias_sq;
  double variance;
  double total;
};
BiasVariance bias_variance(const Ensemble& ensemble, const GridVector& x_true);

/// Pointwise empirical quantiles (linear interpolation between order
/// statistics) at (1 - level)/2 and (1 + level)/2, plus the pointwise mean.
struct ConfidenceBand {
  double level;
  GridVector lower;
  GridVector mean;
  GridVector upper;
};
ConfidenceBand confidence_band(const Ensemble& ensemble, double level);

/// Linear-interpolation quantile of an unsorted sample, p in [0, 1].
double quantile(std::vector<double> sample, double p);

/// Least-squares fit of log(err) = slope * log(delta) + intercept.
struct RateFit {
  double slope;
  double intercept;
  double r_squared;
};
RateFit rate_fit(const std::vector<std::pair<double, double>>& points);

}  // namespace sar
