#include "sar/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sar {

namespace {

void require_nonempty(const Ensemble& e, const char* where) {
  if (e.empty()) throw std::invalid_argument(std::string(where) + ": empty ensemble");
}

}  // namespace

double rmse(const Ensemble& ensemble, const GridVector& x_true) {
  require_nonempty(ensemble, "rmse");
  double acc = 0.0;
  for (const auto& x : ensemble) {
    const GridVector e = x - x_true;
    acc += inner(e, e);
  }
  return std::sqrt(acc / static_cast<double>(ensemble.size()));
}

double rmsr(const Ensemble& ensemble, const ForwardProblem& problem, const GridVector& y_delta) {
  require_nonempty(ensemble, "rmsr");
  double acc = 0.0;
  for (const auto& x : ensemble) {
    if (!(x.grid == problem.param_grid())) throw GridMismatch("rmsr");
    const GridVector r = problem.apply(x) - y_delta;
    acc += inner(r, r);
  }
  const double out = std::sqrt(acc / static_cast<double>(ensemble.size()));
  if (!std::isfinite(out)) throw std::runtime_error("rmsr: non-finite residual");
  return out;
}

GridVector ensemble_mean(const Ensemble& ensemble) {
  require_nonempty(ensemble, "ensemble_mean");
  GridVector mean(ensemble.front().grid);
  for (const auto& x : ensemble) mean += x;
  mean *= 1.0 / static_cast<double>(ensemble.size());
  return mean;
}

BiasVariance bias_variance(const Ensemble& ensemble, const GridVector& x_true) {
  const GridVector mean = ensemble_mean(ensemble);
  const double n = static_cast<double>(ensemble.size());
  const GridVector b = mean - x_true;
  BiasVariance out{inner(b, b), 0.0, 0.0};
  for (const auto& x : ensemble) {
    const GridVector d = x - mean;
    const GridVector e = x - x_true;
    out.variance += inner(d, d);
    out.total += inner(e, e);
  }
  out.variance /= n;
  out.total /= n;
  return out;
}

double quantile(std::vector<double> sample, double p) {
  if (sample.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(sample.begin(), sample.end());
  const double pos = p * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sample[lo] + frac * (sample[hi] - sample[lo]);
}

ConfidenceBand confidence_band(const Ensemble& ensemble, double level) {
  if (ensemble.size() < 2) throw std::invalid_argument("confidence_band: need at least two particles");
  if (!(level >= 0.0 && level < 1.0)) throw std::invalid_argument("confidence_band: level must lie in [0, 1)");
  const GridSpec& g = ensemble.front().grid;
  for (const auto& x : ensemble) ensemble.front().check_same(x, "confidence_band");

  ConfidenceBand band{level, GridVector(g), ensemble_mean(ensemble), GridVector(g)};
  std::vector<double> column(ensemble.size());
  for (std::size_t node = 0; node < g.size(); ++node) {
    for (std::size_t i = 0; i < ensemble.size(); ++i) column[i] = ensemble[i][node];
    band.lower[node] = quantile(column, 0.5 * (1.0 - level));
    band.upper[node] = quantile(column, 0.5 * (1.0 + level));
  }
  return band;
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("rate_fit: need at least three points");
  const double n = static_cast<double>(points.size());
  double sx = 0, sy = 0;
  for (const auto& [d, e] : points) {
    if (!(d > 0.0) || !(e > 0.0) || !std::isfinite(d) || !std::isfinite(e))
      throw std::invalid_argument("rate_fit: delta and error must be positive");
    sx += std::log(d);
    sy += std::log(e);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [d, e] : points) {
    const double dx = std::log(d) - mx, dy = std::log(e) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("rate_fit: all delta values coincide");
  const double slope = sxy / sxx;
  const double r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return {slope, my - slope * mx, r2};
}

}  // namespace sar
