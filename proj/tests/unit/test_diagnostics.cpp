#include "sar/diagnostics.hpp"
#include "sar/diagonal.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace sar;

namespace {

const GridSpec kPair = GridSpec::line(2, 0.0, 2.0);  // weights 1, 1

Ensemble random_ensemble(const GridSpec& g, std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 2.0);
  Ensemble e(n, GridVector(g));
  for (auto& x : e)
    for (std::size_t i = 0; i < g.size(); ++i) x[i] = normal(rng) + 3.0;
  return e;
}

}  // namespace

TEST_CASE("root mean square error") {
  const GridVector truth = GridVector::constant(kPair, 1.0);
  CHECK(rmse({truth, truth}, truth) == 0.0);

  GridVector a = truth, b = truth;
  a[0] += 1.0;
  b[1] -= 1.0;
  CHECK(rmse({a, b}, truth) == doctest::Approx(1.0));

  GridVector c = truth, d = truth, e = truth;
  c[0] += 1.0;
  d[0] += 2.0;
  e[1] += 2.0;
  CHECK(rmse({c, d, e}, truth) == doctest::Approx(std::sqrt(3.0)));
  CHECK(rmse({e, c, d}, truth) == rmse({c, d, e}, truth));

  CHECK_THROWS_AS(rmse({}, truth), std::invalid_argument);
  CHECK_THROWS_AS(rmse({GridVector(GridSpec::line(3))}, truth), GridMismatch);
}

TEST_CASE("root mean square residual") {
  const DiagonalProblem p(kPair, Eigen::VectorXd::Ones(2));
  const GridVector y = GridVector::constant(kPair, 1.0);
  GridVector a = y, b = y;
  a[0] += 3.0;
  b[1] += 4.0;
  CHECK(rmsr({a, b}, p, y) == doctest::Approx(std::sqrt(12.5)));
  CHECK(rmsr({b, a}, p, y) == rmsr({a, b}, p, y));
}

TEST_CASE("bias variance decomposition") {
  const GridVector truth = GridVector::constant(kPair, 1.0);
  GridVector x = truth;
  x[0] = 4.0;
  const BiasVariance one = bias_variance({x}, truth);
  CHECK(one.variance == 0.0);
  CHECK(one.bias_sq == one.total);

  GridVector e(kPair);
  e[0] = 0.5;
  e[1] = -2.0;
  const BiasVariance pair = bias_variance({truth + e, truth - e}, truth);
  CHECK(pair.bias_sq == doctest::Approx(0.0));
  CHECK(pair.variance == doctest::Approx(inner(e, e)));
  CHECK(pair.total == doctest::Approx(inner(e, e)));

  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const GridSpec g = GridSpec::line(25);
    const Ensemble ens = random_ensemble(g, 50, rng);
    const GridVector t = GridVector::constant(g, 2.0);
    const BiasVariance bv = bias_variance(ens, t);
    CHECK(std::abs(bv.total - bv.bias_sq - bv.variance) <= 1e-12 * bv.total);
  }
}

TEST_CASE("quantiles use linear interpolation") {
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == 2.5);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.0) == 1.0);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 1.0) == 4.0);
  CHECK(quantile({0.0, 10.0}, 0.25) == 2.5);
}

TEST_CASE("confidence bands") {
  const GridSpec g = GridSpec::line(5);
  const GridVector x = GridVector::sample(g, [](double s) { return s * s; });
  const ConfidenceBand flat = confidence_band({x, x, x}, 0.9);
  CHECK((flat.lower.values.array() == x.values.array()).all());
  CHECK((flat.upper.values.array() == x.values.array()).all());

  std::mt19937_64 rng(2);
  const Ensemble ens = random_ensemble(g, 41, rng);
  const ConfidenceBand median = confidence_band(ens, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::vector<double> col;
    for (const auto& p : ens) col.push_back(p[i]);
    std::nth_element(col.begin(), col.begin() + 20, col.end());
    CHECK(median.lower[i] == col[20]);
    CHECK(median.upper[i] == col[20]);
  }

  const ConfidenceBand narrow = confidence_band(ens, 0.6);
  const ConfidenceBand wide = confidence_band(ens, 0.85);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(wide.lower[i] <= narrow.lower[i]);
    CHECK(narrow.upper[i] <= wide.upper[i]);
    CHECK(narrow.lower[i] <= narrow.upper[i]);
  }

  CHECK_THROWS_AS(confidence_band({x}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(confidence_band({x, x}, 1.0), std::invalid_argument);
}

TEST_CASE("gaussian band quantiles") {
  const GridSpec g = GridSpec::line(2);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  Ensemble ens(10000, GridVector(g));
  for (auto& x : ens) x[0] = normal(rng);
  const ConfidenceBand b = confidence_band(ens, 0.9);
  CHECK(b.lower[0] == doctest::Approx(-1.6449).epsilon(0.03 / 1.6449));
  CHECK(b.upper[0] == doctest::Approx(1.6449).epsilon(0.03 / 1.6449));
}

TEST_CASE("rate fit") {
  std::vector<std::pair<double, double>> pts;
  for (double d : {1e-1, 1e-2, 1e-3, 1e-4}) pts.emplace_back(d, 2.0 * std::pow(d, 0.4));
  const RateFit f = rate_fit(pts);
  CHECK(f.slope == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  const RateFit flat = rate_fit({{0.1, 3.0}, {0.01, 3.0}, {0.001, 3.0}});
  CHECK(flat.slope == doctest::Approx(0.0).scale(1.0));

  CHECK_THROWS_AS(rate_fit({{0.1, 1.0}, {0.2, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(rate_fit({{0.1, 1.0}, {0.2, 0.0}, {0.3, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(rate_fit({{-0.1, 1.0}, {0.2, 1.0}, {0.3, 1.0}}), std::invalid_argument);
}
