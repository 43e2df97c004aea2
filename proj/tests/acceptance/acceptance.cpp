#include "sar/data.hpp"
#include "sar/diagnostics.hpp"
#include "sar/diagonal.hpp"
#include "sar/elliptic.hpp"
#include "sar/experiment.hpp"
#include "sar/theory.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

using namespace sar;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, fmt::format("exception: {}", e.what())};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  fmt::print("{} {:2d} {}: {} [{:.2f} s]\n", o.pass ? "PASS" : "FAIL", id, title, o.detail, secs);
  std::fflush(stdout);
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GridVector uniform_vector(const GridSpec& g, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  GridVector v(g);
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = u(rng);
  return v;
}

GridVector smooth_direction(const GridSpec& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  const double a = n(rng), b = n(rng), c = n(rng), d = n(rng);
  return GridVector::sample(g, [&](double x, double y) {
    return a + b * std::cos(std::numbers::pi * x) + c * std::sin(2.0 * x + y) + d * x * y;
  });
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Elementwise x + a sin(w x). With a w > 1 the misfit has stationary points
// where F'(x) = 0 and F(x) != y, so the deterministic flow can stall.
class WavyProblem final : public ForwardProblem {
 public:
  WavyProblem(const GridSpec& g, double a, double w) : grid_(g), a_(a), w_(w) {}
  std::string name() const override { return "wavy"; }
  const GridSpec& param_grid() const override { return grid_; }
  const GridSpec& data_grid() const override { return grid_; }
  GridVector apply(const GridVector& x) const override {
    GridVector y(grid_);
    y.values = x.values.array() + a_ * (w_ * x.values.array()).sin();
    return y;
  }
  GridVector derivative_apply(const GridVector& x, const GridVector& q) const override {
    GridVector y(grid_);
    y.values = (1.0 + a_ * w_ * (w_ * x.values.array()).cos()) * q.values.array();
    return y;
  }
  GridVector adjoint_apply(const GridVector& x, const GridVector& w) const override { return derivative_apply(x, w); }

 private:
  GridSpec grid_;
  double a_, w_;
};

FlowSettings elliptic_preset(double theta, int n_particles) {
  FlowSettings s;
  s.problem = "elliptic1d";
  s.delta = 0.02;
  s.theta = theta;
  s.ensemble_size = n_particles;
  s.seed = 11;
  s.threads = 0;
  return s;
}

struct PresetRun {
  RunRecord record;
  double noise_norm = 0.0;
  double tau = 0.0;
};

PresetRun run_preset(const FlowSettings& s) {
  const Scenario sc = build_scenario(s, s.delta, derive_seed(s.seed, kDataTag), derive_seed(s.seed, kSourceTag));
  const SarConfig cfg = make_sar_config(s, sc, derive_seed(s.seed, kWienerTag));
  return {run(*sc.problem, &sc.truth, sc.y_delta, sc.x_bar, cfg), sc.noise_norm, cfg.tau};
}

Outcome golden_constants() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out = fs::temp_directory_path() / "sar_acceptance_constants";
  const ConstantsTable t = cmd_constants(TheoryParams{}, out);
  const double secs = elapsed_since(t0);
  int bad = 0;
  std::string worst;
  double worst_rel = 0.0;
  for (const auto& row : compare_with_reference(t)) {
    if (!row.pass) ++bad;
    if (row.relative_error > worst_rel) {
      worst_rel = row.relative_error;
      worst = row.name;
    }
  }
  const bool admits = t.params.tau >= t.tau_threshold;
  return {bad == 0 && admits && secs < 1.0,
          fmt::format("{} mismatches, tau = 6 admitted: {}, largest relative deviation {:.2e} ({}), {:.3f} s", bad,
                      admits, worst_rel, worst, secs)};
}

Outcome decay_bound_sweeps() {
  const auto t0 = std::chrono::steady_clock::now();
  const SweepResult sup = sweep_sup_bound(1000, 2024);
  const SweepResult integral = sweep_integral_bound(1000, 2024);
  const double secs = elapsed_since(t0);
  std::string first;
  if (!integral.first_failures.empty()) {
    const auto& f = integral.first_failures.front();
    first = fmt::format(", e.g. k = {:.3f}, j = {:.3f}, t = {:.1f}: {:.4g} > {:.4g}", f.a, f.b, f.t, f.check.lhs,
                        f.check.rhs);
  }
  return {sup.failures == 0 && integral.failures == 0 && secs < 30.0,
          fmt::format("sup bound {}/{} violations; integral bound {}/{} violations, worst lhs/rhs {:.3g}{}", sup.failures,
                      sup.samples, integral.failures, integral.samples, integral.worst_ratio, first)};
}

Outcome elliptic_derivatives() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(31);
  double worst_dot = 0.0, lo = 1e300, hi = 0.0;
  for (const GridSpec& g : {GridSpec::line(200), GridSpec::square(32)}) {
    const EllipticProblem p(g);
    for (int trial = 0; trial < 100; ++trial) {
      const GridVector c = uniform_vector(g, rng, 0.5, 3.0);
      const GridVector q = uniform_vector(g, rng, -1.0, 1.0);
      const GridVector w = uniform_vector(g, rng, -1.0, 1.0);
      const double a = inner(p.derivative_apply(c, q), w);
      const double b = inner(q, p.adjoint_apply(c, w));
      worst_dot = std::max(worst_dot, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
    }
    const GridVector c = true_parameter(g);
    const GridVector fc = p.apply(c);
    for (int trial = 0; trial < 20; ++trial) {
      const GridVector q = smooth_direction(g, rng);
      auto remainder = [&](double eps) { return norm(p.apply(c + eps * q) - fc - eps * p.derivative_apply(c, q)); };
      const double ratio = remainder(1e-2) / remainder(5e-3);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  const double secs = elapsed_since(t0);
  return {worst_dot <= 1e-10 && lo >= 3.5 && hi <= 4.5 && secs < 60.0,
          fmt::format("worst dot-product relative error {:.2e}; Taylor ratios in [{:.4f}, {:.4f}]", worst_dot, lo, hi)};
}

Outcome landweber_degeneration() {
  FlowSettings s = elliptic_preset(0.0, 1);
  s.n = 200;
  const Scenario sc = build_scenario(s, s.delta, derive_seed(s.seed, kDataTag), derive_seed(s.seed, kSourceTag));
  SarConfig cfg = make_sar_config(s, sc, derive_seed(s.seed, kWienerTag));
  const ForwardProblem& p = *sc.problem;

  EnsembleState state = initial_state(p, sc.x_bar, sc.y_delta, 1);
  GridVector x = sc.x_bar;
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    state = step(state, cfg, p, sc.y_delta);
    x = x + sc.dt * p.adjoint_apply(x, sc.y_delta - p.apply(x));
    worst = std::max(worst, norm(state.particles[0] - x) / norm(x));
  }
  return {worst <= 1e-14, fmt::format("largest relative iterate deviation over 1000 steps {:.2e}", worst)};
}

Outcome monotone_discrepancy() {
  const PresetRun det = run_preset(elliptic_preset(0.0, 1));
  const auto& r = det.record;
  const long kstar = r.stop_step.value_or(r.steps.back());
  long det_breaks = 0;
  for (long k = 0; k < kstar; ++k)
    if (r.rmsr[k + 1] > r.rmsr[k]) ++det_breaks;

  const PresetRun sto = run_preset(elliptic_preset(0.1, 100));
  const auto& q = sto.record;
  const long kq = q.stop_step.value_or(q.steps.back());
  long sto_breaks = 0;
  double worst = -1e300;
  for (long k = 0; k < kq; ++k) {
    const double excess = (q.rmsr[k + 1] - q.rmsr[k]) / q.rmsr_se[k + 1];
    worst = std::max(worst, excess);
    if (q.rmsr[k + 1] > q.rmsr[k] + 3.0 * q.rmsr_se[k + 1]) ++sto_breaks;
  }
  return {det_breaks == 0 && sto_breaks == 0 && r.stop_step && q.stop_step,
          fmt::format("theta = 0: {} increases in {} steps; theta = 0.1, N = 100: {} excursions beyond 3 SE in {} "
                      "steps (largest increase {:.2f} SE)",
                      det_breaks, kstar, sto_breaks, kq, worst)};
}

Outcome convergence_rate() {
  const auto t0 = std::chrono::steady_clock::now();
  FlowSettings s = default_rates_settings();
  s.threads = 0;
  const RatesResult r = cmd_rates(s, fs::temp_directory_path() / "sar_acceptance_rates");
  const double secs = elapsed_since(t0);
  const bool setup = s.gamma == 1.0 / 3.0 && s.exponent == 1.0 && s.nodes_per_axis() == 200 && s.theta == 0.01 &&
                     r.deltas.size() == 5;
  return {setup && std::abs(r.slope - 0.4) <= 0.1 && r.r_squared >= 0.98 && secs < 300.0,
          fmt::format("slope {:.4f} (expected 0.4), r^2 {:.4f}, stop steps {}..{}", r.slope, r.r_squared,
                      r.stop_steps.front(), r.stop_steps.back())};
}

Outcome linear_oracle() {
  const GridSpec g = GridSpec::line(200, 0.0, 1.0);
  const DiagonalProblem p = DiagonalProblem::power_law(g);
  const SourceCase src = make_source_case(p, 1.0 / 3.0, 1.0, RngStream{17});
  const GridVector y = p.apply(src.x_true);
  const GridVector y_delta = synthesize_data_with_norm(y, 0.01, RngStream{18});

  SarConfig cfg;
  cfg.dt = 1e-4;
  cfg.max_steps = 10000;
  cfg.delta = 0.0;
  const RunRecord rec = run(p, &src.x_true, y_delta, src.x_bar, cfg);

  const Eigen::ArrayXd s = p.singular_values().array();
  const Eigen::ArrayXd lambda = s.square();
  const double t = rec.final_state.time;
  const Eigen::ArrayXd decay = (-lambda * t).exp();
  GridVector exact = src.x_true;
  exact.values.array() += decay * (src.x_bar - src.x_true).values.array() +
                          (1.0 - decay) / lambda * s * (y_delta - y).values.array();
  const double err = norm(rec.final_state.particles[0] - exact);
  return {rec.termination == Termination::MaxSteps && std::abs(t - 1.0) <= 1e-9 && err <= 1e-6,
          fmt::format("t = {:.12g}, ||x_euler - x_exact|| = {:.3e} (relative {:.3e})", t, err, err / norm(exact))};
}

Outcome bias_variance_identity() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> size(1, 60), nodes(2, 80), dims(1, 2);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const GridSpec g = dims(rng) == 1 ? GridSpec::line(nodes(rng)) : GridSpec::square(nodes(rng) / 8 + 2);
    const double spread = std::exp(3.0 * normal(rng)), offset = 5.0 * normal(rng);
    Ensemble ens(static_cast<std::size_t>(size(rng)), GridVector(g));
    for (auto& x : ens)
      for (std::size_t i = 0; i < g.size(); ++i) x[i] = offset + spread * normal(rng);
    GridVector truth(g);
    for (std::size_t i = 0; i < g.size(); ++i) truth[i] = normal(rng);
    const BiasVariance bv = bias_variance(ens, truth);
    double mse = 0.0;
    for (const auto& x : ens) mse += inner(x - truth, x - truth);
    mse /= static_cast<double>(ens.size());
    worst = std::max({worst, std::abs(bv.bias_sq + bv.variance - mse) / mse, std::abs(bv.total - mse) / mse});
  }
  return {worst <= 1e-12, fmt::format("largest relative defect over 1000 ensembles {:.2e}", worst)};
}

Outcome stopping_well_posed() {
  std::string detail;
  bool ok = true;
  for (double theta : {0.0, 0.1}) {
    const PresetRun pr = run_preset(elliptic_preset(theta, 100));
    const auto& r = pr.record;
    const double bound = pr.tau * pr.noise_norm;
    const bool good = r.termination == Termination::Stopped && *r.stop_step < 100000 && r.rmsr.back() <= bound;
    ok = ok && good;
    detail += fmt::format("{}theta = {}: {} at k* = {}, RMSR {:.5f} <= {:.5f}", detail.empty() ? "" : "; ", theta,
                          to_string(r.termination), r.stop_step.value_or(-1), r.rmsr.back(), bound);
  }
  return {ok, detail};
}

Outcome qualitative_orderings() {
  std::vector<double> final_rmse;
  const std::vector<double> thetas{0.0, 0.1, 0.2, 0.3};
  for (double theta : thetas) final_rmse.push_back(run_preset(elliptic_preset(theta, 100)).record.rmse.back());
  bool ordered = true;
  for (std::size_t i = 1; i < thetas.size(); ++i) ordered = ordered && final_rmse[i] > final_rmse[i - 1];

  const GridSpec g = GridSpec::line(10, 0.0, 1.0);
  const WavyProblem p(g, 0.5, 3.0);
  const GridVector truth = GridVector::constant(g, 2.0);
  const double delta = 1e-3;
  const GridVector y_delta = synthesize_data_with_norm(p.apply(truth), delta, RngStream{7});
  const GridVector x_bar = GridVector::constant(g, 0.0);
  SarConfig cfg;
  cfg.dt = 0.05;
  cfg.ensemble_size = 50;
  cfg.delta0 = 0.1;  // admits theta up to sqrt(eps0 eta) / delta0 ~ 7
  cfg.delta = delta;
  cfg.max_steps = 20000;
  cfg.master_seed = 3;
  cfg.threads = 0;
  const double plateau = run(p, &truth, y_delta, x_bar, cfg).rmse.back();
  cfg.theta = 2.0;
  const double escaped = run(p, &truth, y_delta, x_bar, cfg).rmse.back();

  return {ordered && escaped <= plateau,
          fmt::format("final RMSE for theta 0/0.1/0.2/0.3: {:.4f}/{:.4f}/{:.4f}/{:.4f}; local-minimum scenario: theta = 0 "
                      "plateau {:.4f}, theta = 2 {:.4f}",
                      final_rmse[0], final_rmse[1], final_rmse[2], final_rmse[3], plateau, escaped)};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "sar_acceptance_determinism";
  fs::remove_all(root);
  auto produce = [&](const fs::path& dir) {
    FlowSettings run_s = elliptic_preset(0.1, 20);
    run_s.n = 300;
    cmd_run(run_s, dir / "run");
    FlowSettings rate_s = default_rates_settings();
    rate_s.threads = 0;
    cmd_rates(rate_s, dir / "rates");
    cmd_constants(TheoryParams{}, dir / "constants");
    cmd_check(CheckSettings{}, dir / "check");
  };
  produce(root / "a");
  produce(root / "b");
  int files = 0, differ = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path twin = root / "b" / fs::relative(e.path(), root / "a");
    if (!fs::exists(twin) || slurp(e.path()) != slurp(twin)) ++differ;
  }
  return {files > 0 && differ == 0, fmt::format("{} files compared, {} differ", files, differ)};
}

}  // namespace

int main() {
  criterion(1, "golden constants", golden_constants);
  criterion(2, "decay-bound sweeps", decay_bound_sweeps);
  criterion(3, "elliptic adjoint and derivative", elliptic_derivatives);
  criterion(4, "theta = 0 equals the Landweber loop", landweber_degeneration);
  criterion(5, "monotone discrepancy", monotone_discrepancy);
  criterion(6, "convergence rate", convergence_rate);
  criterion(7, "closed-form linear flow", linear_oracle);
  criterion(8, "bias-variance identity", bias_variance_identity);
  criterion(9, "stopping well-posedness", stopping_well_posed);
  criterion(10, "qualitative orderings", qualitative_orderings);
  criterion(11, "determinism", determinism);
  fmt::print("{} of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
