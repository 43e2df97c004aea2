#include "sar/theory.hpp"

#include "sar/wiener.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace sar {

namespace {

double pow_floor_one(double a) { return std::max(std::pow(a, a), 1.0); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("constants: " + msg);
}

}  // namespace

std::vector<NamedConstant> ConstantsTable::rows() const {
  return {
      {"eps0", params.eps0, "input"},
      {"g0", g0, "sqrt(eps0*eta)/delta0"},
      {"tau", params.tau, "input; threshold (2+2*eta)/(2-(2+eps0)*eta)"},
      {"c_gamma", c_gamma, "max(gamma^gamma,1)"},
      {"c_a", c_a, "max((gamma+sigma)^(gamma+sigma),1)"},
      {"c_b", c_b, "max((gamma+1/2)^(gamma+1/2),1)"},
      {"c0", c0, "c_R*(sqrt(2)*tau/(sqrt(tau^2-2)*(1-eta))+1/2)"},
      {"c1", c1, "sqrt(2)*c_b/((1-eta)*sqrt(tau^2-2))"},
      {"c2", c2, "c_b*c_R*(sqrt(2)*tau/(sqrt(tau^2-2)*(1-eta))+1/2)"},
      {"c3", c3, "sqrt(2*tau^2*eps0*eta/((1-eta)^2*(tau^2-2)))"},
      {"c_Gamma", c_Gamma, "max((4^gamma-1)/gamma,(2^(2*gamma+5/2)-4)/(4*gamma+1))"},
      {"c_star", c_star, "2*c_b*(1+sqrt(c_Gamma)*c3)/(1-c1)"},
      {"E", E_max, "(1-c1)/(2*c2*c_Gamma*c_star)"},
      {"ce0", ce0,
       "(c_star*E*g0/(1-eta)*sqrt((2^(2*gamma+3)-4)/(2*gamma+1))+2*g0*delta0/(1-eta))"
       "*(2*c_star^2/((1-eta)^2*(tau^2-2)))^(1/(4*gamma+2))"},
      {"ce1", ce1, "1+c0*c_star^2*E*(2^(gamma+1)-2)/gamma"},
      {"ce2", ce2, "(1+eta)*(tau+1)+1"},
      {"ce3", ce3, "ce1^(1/(2*gamma+1))*ce2^(2*gamma/(2*gamma+1))"},
      {"ce4", ce4, "(2*c_star^2/((1-eta)^2*(tau^2-2)))^(1/(4*gamma+2))+ce3"},
      {"ce", ce, "sqrt(ce0^2+ce4^2)"},
  };
}

ConstantsTable constants_table(const TheoryParams& p) {
  require(p.eta > 0.0 && p.eta < 1.0, fmt::format("eta = {} outside (0, 1)", p.eta));
  require(p.delta0 > 0.0, fmt::format("delta0 = {} must be positive", p.delta0));
  require(p.gamma > 0.0 && p.gamma <= 0.5, fmt::format("gamma = {} outside (0, 1/2]", p.gamma));
  require(p.c_R >= 0.0, fmt::format("c_R = {} must be >= 0", p.c_R));
  require(p.sigma >= 0.0, fmt::format("sigma = {} must be >= 0", p.sigma));

  ConstantsTable t;
  t.params = p;
  const double eta = p.eta, tau = p.tau, g = p.gamma, eps0 = p.eps0;
  const double sqrt2 = std::numbers::sqrt2;

  t.eps0_upper = 2.0 * (1.0 / eta - 1.0);
  t.eps0_lower = std::max((2.0 - sqrt2) / eta - (2.0 + sqrt2), 0.0);
  require(eps0 > t.eps0_lower && eps0 < t.eps0_upper,
          fmt::format("eps0 = {} outside ({:.6g}, {:.6g})", eps0, t.eps0_lower, t.eps0_upper));
  t.tau_threshold = (2.0 + 2.0 * eta) / (2.0 - (2.0 + eps0) * eta);
  require(tau >= t.tau_threshold, fmt::format("tau = {} below {:.6g}", tau, t.tau_threshold));
  if (!(tau * tau > 2.0)) throw ChainError(fmt::format("chain does not close: tau^2 = {} must exceed 2", tau * tau));

  const double root = std::sqrt(tau * tau - 2.0);
  t.g0 = std::sqrt(eps0 * eta) / p.delta0;
  t.c_gamma = pow_floor_one(g);
  t.c_a = pow_floor_one(g + p.sigma);
  t.c_b = pow_floor_one(g + 0.5);
  t.c1 = sqrt2 * t.c_b / ((1.0 - eta) * root);
  if (!(t.c1 < 1.0))
    throw ChainError(fmt::format("chain does not close: c1 = sqrt(2)*c_b/((1-eta)*sqrt(tau^2-2)) = {} >= 1", t.c1));
  t.c0 = p.c_R * (sqrt2 * tau / (root * (1.0 - eta)) + 0.5);
  t.c2 = t.c_b * t.c0;
  t.c3 = std::sqrt(2.0 * tau * tau * eps0 * eta / ((1.0 - eta) * (1.0 - eta) * (tau * tau - 2.0)));
  t.c_Gamma = std::max((std::pow(4.0, g) - 1.0) / g, (std::pow(2.0, 2.0 * g + 2.5) - 4.0) / (4.0 * g + 1.0));
  t.c_star = 2.0 * t.c_b * (1.0 + std::sqrt(t.c_Gamma) * t.c3) / (1.0 - t.c1);
  t.E_max = (1.0 - t.c1) / (2.0 * t.c2 * t.c_Gamma * t.c_star);

  const double fac =
      std::pow(2.0 * t.c_star * t.c_star / ((1.0 - eta) * (1.0 - eta) * (tau * tau - 2.0)), 1.0 / (4.0 * g + 2.0));
  t.ce0 = (t.c_star * t.E_max * t.g0 / (1.0 - eta) * std::sqrt((std::pow(2.0, 2.0 * g + 3.0) - 4.0) / (2.0 * g + 1.0)) +
           2.0 * t.g0 * p.delta0 / (1.0 - eta)) *
          fac;
  t.ce1 = 1.0 + t.c0 * t.c_star * t.c_star * t.E_max * (std::pow(2.0, g + 1.0) - 2.0) / g;
  t.ce2 = (1.0 + eta) * (tau + 1.0) + 1.0;
  t.ce3 = std::pow(t.ce1, 1.0 / (2.0 * g + 1.0)) * std::pow(t.ce2, 2.0 * g / (2.0 * g + 1.0));
  t.ce4 = fac + t.ce3;
  t.ce = std::hypot(t.ce0, t.ce4);
  return t;
}

const std::vector<ReferenceConstant>& reference_constants() {
  static const std::vector<ReferenceConstant> table = {
      {"eps0", 1.0, 0},       {"g0", 0.7071, 4},     {"tau", 6.0, 0},      {"c_gamma", 1.0, 0},
      {"c_a", 1.0, 0},        {"c_b", 1.0, 0},       {"c0", 3.4104, 4},    {"c1", 0.4851, 4},
      {"c2", 3.4104, 4},      {"c3", 2.0580, 4},     {"c_Gamma", 2.1342, 4}, {"c_star", 15.5612, 4},
      {"E", 0.0023, 4},       {"ce0", 9.8960, 4},    {"ce1", 3.9277, 4},   {"ce2", 11.5000, 4},
      {"ce3", 6.0362, 4},     {"ce4", 9.3990, 4},    {"ce", 13.6482, 4},
  };
  return table;
}

std::vector<GoldenComparison> compare_with_reference(const ConstantsTable& table, double rel_tol) {
  const auto rows = table.rows();
  std::vector<GoldenComparison> out;
  for (const auto& ref : reference_constants()) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const NamedConstant& c) { return c.name == ref.name; });
    if (it == rows.end()) throw std::logic_error("reference constant without table row: " + ref.name);
    const double abs_err = std::abs(it->value - ref.value);
    const double rel = abs_err / std::abs(ref.value);
    const double half_unit = 0.5 * std::pow(10.0, -ref.decimals);
    out.push_back({ref.name, it->value, ref.value, rel, rel <= rel_tol || abs_err <= half_unit});
  }
  return out;
}

BoundCheck integral_decay_bound(double k, double j, double t) {
  if (!(k + j > 1.0)) throw std::invalid_argument(fmt::format("integral_decay_bound: k + j = {} must exceed 1", k + j));
  if (!(t >= 0.0)) throw std::invalid_argument("integral_decay_bound: t must be >= 0");
  const double m = k + j - 1.0;
  const double rhs = (std::pow(2.0, k + j) - 2.0) / m * std::pow(1.0 + t, -m);
  if (t == 0.0) return {0.0, rhs, 0.0 < rhs};

  auto f = [&](double s) { return std::pow(1.0 + t - s, -k) * std::pow(1.0 + s, -j); };
  double error = 0.0;
  const double lhs = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, t, 30, 1e-10, &error);
  return {lhs, rhs, lhs < rhs};
}

namespace {

constexpr int kSupGrid = 1000000;

// log(lambda_i) for the uniform grid lambda_i = i / (kSupGrid - 1), i >= 1.
const std::vector<double>& log_lambda_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> v(kSupGrid);
    v[0] = -std::numeric_limits<double>::infinity();
    for (int i = 1; i < kSupGrid; ++i) v[i] = std::log(static_cast<double>(i) / (kSupGrid - 1));
    return v;
  }();
  return grid;
}

}  // namespace

BoundCheck sup_bound(double gamma, double t) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("sup_bound: gamma must be >= 0");
  if (!(t >= 0.0)) throw std::invalid_argument("sup_bound: t must be >= 0");

  auto value = [&](double lambda) { return std::pow(lambda, gamma) * std::exp(-lambda * t); };

  // maximize the exponent gamma*log(lambda) - lambda*t over the grid
  const auto& logs = log_lambda_grid();
  double best = gamma == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double step = 1.0 / (kSupGrid - 1);
  for (int i = 1; i < kSupGrid; ++i) best = std::max(best, gamma * logs[i] - t * (i * step));
  double sup = std::exp(best);
  sup = std::max(sup, value(t > 0.0 ? std::min(gamma / t, 1.0) : 1.0));

  const double bound = std::max(std::pow(gamma, gamma), 1.0) / std::pow(1.0 + t, gamma);
  return {sup, bound, sup <= bound + 1e-12};
}

ConeEstimate tangential_cone_estimate(const ForwardProblem& problem, const GridVector& center, double radius,
                                      int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("tangential_cone_estimate: samples must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("tangential_cone_estimate: radius must be positive");
  if (!(center.grid == problem.param_grid())) throw GridMismatch("tangential_cone_estimate");

  std::mt19937_64 engine(mix_seed(seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  auto draw = [&]() {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      GridVector d(center.grid);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = normal(engine);
      d *= radius * uniform(engine) / norm(d);
      GridVector x = center + d;
      if (problem.admissible(x)) return x;
    }
    throw std::runtime_error("tangential_cone_estimate: could not sample an admissible point");
  };

  ConeEstimate est;
  for (int s = 0; s < samples; ++s) {
    const GridVector x = draw();
    const GridVector z = draw();
    const GridVector fx = problem.apply(x);
    const GridVector fz = problem.apply(z);
    const double den = norm(fx - fz);
    if (den == 0.0) {
      ++est.zero_denominators;
      continue;
    }
    const double num = norm(fz - fx - problem.derivative_apply(x, z - x));
    est.eta_hat = std::max(est.eta_hat, num / den);
    ++est.evaluated;
  }
  if (est.evaluated == 0) throw std::runtime_error("tangential_cone_estimate: every sampled pair had F(x) = F(z)");
  return est;
}

}  // namespace sar

namespace sar {

namespace {

void tally(SweepResult& r, SweepCase c) {
  ++r.samples;
  if (c.check.rhs > 0.0) r.worst_ratio = std::max(r.worst_ratio, c.check.lhs / c.check.rhs);
  if (c.check.holds) return;
  ++r.failures;
  if (r.first_failures.size() < 10) r.first_failures.push_back(c);
}

}  // namespace

SweepResult sweep_integral_bound(int samples, std::uint64_t seed) {
  std::mt19937_64 engine(mix_seed(seed));
  std::uniform_real_distribution<double> kj(0.0, 3.0), time(0.0, 1000.0);
  SweepResult r;
  while (r.samples < samples) {
    const double k = kj(engine), j = kj(engine);
    if (!(k + j > 1.05 && k + j < 6.0)) continue;
    const double t = time(engine);
    tally(r, {k, j, t, integral_decay_bound(k, j, t)});
  }
  return r;
}

SweepResult sweep_sup_bound(int samples, std::uint64_t seed) {
  std::mt19937_64 engine(mix_seed(seed ^ 0x5bd1e995ULL));
  std::uniform_real_distribution<double> gamma(0.0, 2.0), time(0.0, 1000.0);
  SweepResult r;
  for (int s = 0; s < samples; ++s) {
    const double g = gamma(engine), t = time(engine);
    tally(r, {g, 0.0, t, sup_bound(g, t)});
  }
  return r;
}

}  // namespace sar
