#include "sar/experiment.hpp"

#include "sar/data.hpp"
#include "sar/diagnostics.hpp"
#include "sar/diagonal.hpp"
#include "sar/elliptic.hpp"
#include "sar/theory.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>

namespace sar {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string real(double v) { return fmt::format("{:.17g}", v); }

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  return out;
}

void write_json(const fs::path& dir, const std::string& name, const json& j) {
  auto out = open_output(dir, name);
  out << j.dump(2) << '\n';
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

double weighted_mean(const GridVector& v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += v.grid.weight(i) * v[i];
  return acc / v.grid.measure();
}

void check_settings(const FlowSettings& s) {
  if (s.nodes_per_axis() < 2) throw ConfigError(fmt::format("n = {} must be >= 2", s.n));
  if (s.dt < 0.0) throw ConfigError("dt must be >= 0 (0 selects the automatic step)");
  if (s.dt == 0.0 && !(s.dt_factor > 0.0)) throw ConfigError("dt_factor must be positive");
  if (!(s.delta >= 0.0)) throw ConfigError("delta must be >= 0");
  if (s.problem == "diagonal") {
    if (!(s.gamma > 0.0 && s.gamma <= 0.5)) throw ConfigError(fmt::format("gamma = {} outside (0, 1/2]", s.gamma));
    if (!(s.source_norm > 0.0)) throw ConfigError("source_norm must be positive");
    if (!(s.exponent >= 0.0)) throw ConfigError("exponent must be >= 0");
  }
  for (double b : s.bands)
    if (!(b >= 0.0 && b < 1.0)) throw ConfigError(fmt::format("band level {} outside [0, 1)", b));
  try {
    GridSpec g{s.problem == "elliptic2d" ? 2 : 1, s.nodes_per_axis()};
    s.cov.validate(g);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

json settings_echo(const FlowSettings& s, const Scenario& sc, const SarConfig& cfg) {
  json j;
  j["problem"] = s.problem;
  j["n"] = s.nodes_per_axis();
  j["nodes"] = sc.problem->param_grid().size();
  j["delta"] = s.delta;
  j["noise_norm"] = sc.noise_norm;
  j["theta"] = cfg.theta;
  j["ensemble_size"] = cfg.ensemble_size;
  j["dt"] = cfg.dt;
  j["dt_auto"] = sc.dt_auto;
  j["dt_factor"] = s.dt_factor;
  j["derivative_norm_estimate"] = sc.derivative_norm;
  j["tau"] = cfg.tau;
  j["eps0"] = cfg.eps0;
  j["eta"] = cfg.eta;
  j["delta0"] = cfg.delta0;
  j["tau_threshold"] = tau_threshold(cfg.eta, cfg.eps0);
  j["theta_bound"] = theta_bound(cfg.eps0, cfg.eta, cfg.delta0);
  j["max_steps"] = cfg.max_steps;
  j["covariance"] = {{"kind", to_string(cfg.cov.kind)},
                     {"beta", cfg.cov.beta},
                     {"terms", cfg.cov.term_count(sc.problem->param_grid())},
                     {"basis", to_string(cfg.cov.basis)}};
  j["seed"] = s.seed;
  j["threads"] = s.threads;
  j["initial_guess"] = s.initial_guess;
  j["initial_guess_mean"] = weighted_mean(sc.x_bar);
  j["scale"] = sc.scale;
  j["scale_mode"] = s.scale == "auto" ? "auto" : "fixed";
  if (s.problem == "diagonal") {
    j["gamma"] = s.gamma;
    j["source_norm"] = s.source_norm;
    j["source_profile"] = s.source_profile;
    j["exponent"] = s.exponent;
  }
  j["divergence_factor"] = cfg.divergence_factor;
  return j;
}

}  // namespace

std::string level_label(double level) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, level);
  return std::string(buf, p);
}

Scenario build_scenario(const FlowSettings& s, double delta, std::uint64_t data_seed, std::uint64_t source_seed) {
  check_settings(s);
  const int n = s.nodes_per_axis();
  Scenario sc;

  if (s.problem == "diagonal") {
    const GridSpec g = GridSpec::line(n, 0.0, 1.0);
    auto problem = std::make_unique<DiagonalProblem>(DiagonalProblem::power_law(g, s.exponent));
    const double guess = s.initial_guess == "mean" ? 0.0 : std::stod(s.initial_guess);
    const SourceCase src =
        make_source_case(*problem, s.gamma, s.source_norm, RngStream{source_seed, 0, 0}, GridVector::constant(g, guess),
                         s.source_profile == "saturating" ? SourceProfile::Saturating : SourceProfile::Gaussian);
    sc.truth = src.x_true;
    sc.x_bar = src.x_bar;
    sc.y_exact = problem->apply(sc.truth);
    sc.y_delta = synthesize_data_with_norm(sc.y_exact, delta, RngStream{data_seed, 0, 0});
    sc.problem = std::move(problem);
  } else {
    const GridSpec g = s.problem == "elliptic2d" ? GridSpec::square(n) : GridSpec::line(n);
    auto problem = std::make_unique<EllipticProblem>(g);
    sc.truth = true_parameter(g);
    sc.x_bar = s.initial_guess == "mean" ? GridVector::constant(g, weighted_mean(sc.truth))
                                         : GridVector::constant(g, std::stod(s.initial_guess));
    if (!problem->admissible(sc.x_bar)) throw ConfigError("initial_guess must be positive for elliptic problems");
    if (s.scale == "auto") {
      problem->set_scale(1.0 / derivative_norm_estimate(*problem, sc.truth));
    } else {
      problem->set_scale(std::stod(s.scale));
    }
    sc.scale = problem->scale();
    sc.y_exact = problem->apply(sc.truth);
    sc.y_delta = synthesize_data(sc.y_exact, delta, RngStream{data_seed, 0, 0});
    sc.problem = std::move(problem);
  }

  sc.noise_norm = norm(sc.y_delta - sc.y_exact);
  sc.derivative_norm = derivative_norm_estimate(*sc.problem, sc.x_bar);
  sc.dt_auto = s.dt == 0.0;
  sc.dt = sc.dt_auto ? s.dt_factor / (sc.derivative_norm * sc.derivative_norm) : s.dt;
  return sc;
}

SarConfig make_sar_config(const FlowSettings& s, const Scenario& sc, std::uint64_t master_seed) {
  SarConfig cfg;
  cfg.dt = sc.dt;
  cfg.theta = s.theta;
  cfg.ensemble_size = s.ensemble_size;
  cfg.tau = s.tau;
  cfg.eps0 = s.eps0;
  cfg.eta = s.eta;
  cfg.delta0 = s.delta0;
  cfg.delta = sc.noise_norm;
  cfg.max_steps = s.max_steps;
  cfg.cov = s.cov;
  cfg.master_seed = master_seed;
  cfg.threads = s.threads;
  if (auto v = validate_params(cfg); !v.empty()) throw ConfigError("invalid parameters: " + describe(v));
  return cfg;
}

RunRecord cmd_run(const FlowSettings& s, const fs::path& out) {
  const Scenario sc = build_scenario(s, s.delta, derive_seed(s.seed, kDataTag), derive_seed(s.seed, kSourceTag));
  const SarConfig cfg = make_sar_config(s, sc, derive_seed(s.seed, kWienerTag));
  RunRecord rec = run(*sc.problem, &sc.truth, sc.y_delta, sc.x_bar, cfg);

  {
    auto f = open_output(out, "trajectory.csv");
    f << "step,t,rmsr,rmse,f_k\n";
    for (std::size_t i = 0; i < rec.steps.size(); ++i)
      f << rec.steps[i] << ',' << real(rec.times[i]) << ',' << real(rec.rmsr[i]) << ',' << real(rec.rmse[i]) << ','
        << real(rec.noise_coefficient[i]) << '\n';
  }

  const Ensemble& particles = rec.final_state.particles;
  const GridVector mean = ensemble_mean(particles);
  const GridSpec& g = mean.grid;
  {
    auto f = open_output(out, "mean.csv");
    f << (g.dim == 1 ? "node,x,mean,truth\n" : "node,x1,x2,mean,truth\n");
    for (std::size_t i = 0; i < g.size(); ++i) {
      f << i << ',' << real(g.coordinate(i, 0)) << ',';
      if (g.dim == 2) f << real(g.coordinate(i, 1)) << ',';
      f << real(mean[i]) << ',' << real(sc.truth[i]) << '\n';
    }
  }

  std::vector<std::string> band_files;
  if (particles.size() >= 2) {
    for (double level : s.bands) {
      const ConfidenceBand band = confidence_band(particles, level);
      const std::string name = "band_" + level_label(level) + ".csv";
      auto f = open_output(out, name);
      f << "node,lower,mean,upper\n";
      for (std::size_t i = 0; i < g.size(); ++i)
        f << i << ',' << real(band.lower[i]) << ',' << real(band.mean[i]) << ',' << real(band.upper[i]) << '\n';
      band_files.push_back(name);
    }
  }

  const BiasVariance bv = bias_variance(particles, sc.truth);
  json summary;
  summary["termination"] = rec.termination == Termination::Stopped      ? "Stopped"
                           : rec.termination == Termination::MaxSteps ? "MaxSteps"
                                                                      : "PreconditionFailed";
  summary["stop_step"] = rec.stop_step ? json(*rec.stop_step) : json(nullptr);
  summary["stop_time"] = nullable(rec.stop_time);
  summary["steps_taken"] = rec.final_state.step;
  summary["initial_rmse"] = rec.rmse.front();
  summary["initial_rmsr"] = rec.rmsr.front();
  summary["final_rmse"] = rec.rmse.back();
  summary["final_rmsr"] = rec.rmsr.back();
  summary["stopping_threshold"] = cfg.tau * cfg.delta;
  summary["final_bias_sq"] = bv.bias_sq;
  summary["final_variance"] = bv.variance;
  summary["events"] = {{"projection", rec.projection_events}};
  summary["band_files"] = band_files;
  summary["parameters"] = settings_echo(s, sc, cfg);
  write_json(out, "summary.json", summary);
  return rec;
}

RatesResult cmd_rates(const FlowSettings& s, const fs::path& out) {
  if (s.deltas.size() < 3)
    throw ConfigError(fmt::format("rates: need at least 3 delta values, got {}", s.deltas.size()));
  for (double d : s.deltas)
    if (!(d > 0.0)) throw ConfigError(fmt::format("rates: delta {} must be positive", d));

  RatesResult res;
  res.deltas = s.deltas;
  res.theoretical_exponent = 2.0 * s.gamma / (2.0 * s.gamma + 1.0);
  const bool injected = s.inject_exponent.has_value();

  for (std::size_t i = 0; i < s.deltas.size(); ++i) {
    const double delta = s.deltas[i];
    if (injected) {
      res.stop_steps.push_back(0);
      res.errors.push_back(s.inject_constant * std::pow(delta, *s.inject_exponent));
      continue;
    }
    const std::uint64_t level = derive_seed(s.seed, kLevelTag + i);
    try {
      const Scenario sc = build_scenario(s, delta, derive_seed(level, kDataTag), derive_seed(s.seed, kSourceTag));
      const SarConfig cfg = make_sar_config(s, sc, derive_seed(level, kWienerTag));
      const RunRecord rec = run(*sc.problem, &sc.truth, sc.y_delta, sc.x_bar, cfg);
      if (rec.termination != Termination::Stopped)
        throw std::runtime_error(fmt::format("run ended with {}", to_string(rec.termination)));
      res.stop_steps.push_back(*rec.stop_step);
      res.errors.push_back(rec.rmse.back());
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.step(), e.particle(), fmt::format("rates: delta = {}: {}", delta, e.what()));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("rates: delta = {}: {}", delta, e.what()));
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("rates: delta = {}: {}", delta, e.what()));
    }
  }

  std::vector<std::pair<double, double>> points;
  for (std::size_t i = 0; i < res.deltas.size(); ++i) points.emplace_back(res.deltas[i], res.errors[i]);
  const RateFit fit = rate_fit(points);
  res.slope = fit.slope;
  res.intercept = fit.intercept;
  res.r_squared = fit.r_squared;

  {
    auto f = open_output(out, "rates.csv");
    f << "delta,stop_step,rmse\n";
    for (std::size_t i = 0; i < res.deltas.size(); ++i)
      f << real(res.deltas[i]) << ',' << res.stop_steps[i] << ',' << real(res.errors[i]) << '\n';
  }
  json j;
  j["slope"] = res.slope;
  j["intercept"] = res.intercept;
  j["r_squared"] = res.r_squared;
  j["theoretical_exponent"] = res.theoretical_exponent;
  j["injected"] = injected;
  j["problem"] = s.problem;
  j["n"] = s.nodes_per_axis();
  j["gamma"] = s.gamma;
  j["theta"] = s.theta;
  j["ensemble_size"] = s.ensemble_size;
  j["seed"] = s.seed;
  write_json(out, "rates_fit.json", j);
  return res;
}

ConstantsTable cmd_constants(const TheoryParams& p, const fs::path& out, std::string* text) {
  ConstantsTable t;
  try {
    t = constants_table(p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const ChainError& e) {
    throw ConfigError(e.what());
  }
  const auto rows = t.rows();
  auto f = open_output(out, "constants.csv");
  f << "name,value,formula\n";
  for (const auto& r : rows) f << r.name << ',' << real(r.value) << ",\"" << r.formula << "\"\n";
  if (text) {
    text->clear();
    for (const auto& r : rows) *text += fmt::format("{:<8} {:>14.6f}   {}\n", r.name, r.value, r.formula);
    *text += fmt::format("tau threshold {:.6g}, eps0 range ({:.6g}, {:.6g})\n", t.tau_threshold, t.eps0_lower,
                         t.eps0_upper);
  }
  return t;
}

namespace {

json sweep_json(const SweepResult& r, const char* a, const char* b) {
  json fails = json::array();
  for (const auto& c : r.first_failures) {
    json x{{a, c.a}};
    if (b) x[b] = c.b;
    x["t"] = c.t;
    x["lhs"] = c.check.lhs;
    x["rhs"] = c.check.rhs;
    fails.push_back(x);
  }
  return {{"samples", r.samples},
          {"failures", r.failures},
          {"worst_lhs_over_rhs", r.worst_ratio},
          {"pass", r.failures == 0},
          {"first_failures", fails}};
}

}  // namespace

bool cmd_check(const CheckSettings& s, const fs::path& out) {
  if (s.samples < 1) throw ConfigError("check: samples must be >= 1");
  const ConstantsTable t = constants_table(TheoryParams{});

  json golden = json::array();
  bool golden_ok = true;
  for (const auto& c : compare_with_reference(t)) {
    golden.push_back({{"name", c.name},
                      {"computed", c.computed},
                      {"reference", c.reference},
                      {"relative_error", c.relative_error},
                      {"pass", c.pass}});
    golden_ok = golden_ok && c.pass;
  }

  const SweepResult sup = sweep_sup_bound(s.samples, s.seed);
  const SweepResult integral = sweep_integral_bound(s.samples, s.seed);

  json j;
  const TheoryParams& p = t.params;
  j["parameters"] = {{"eta", p.eta}, {"delta0", p.delta0}, {"gamma", p.gamma}, {"c_r", p.c_R},     {"eps0", p.eps0},
                     {"tau", p.tau}, {"sigma", p.sigma},   {"samples", s.samples}, {"seed", s.seed}};
  j["golden"] = {{"pass", golden_ok}, {"entries", golden}};
  j["sup_bound"] = sweep_json(sup, "gamma", nullptr);
  j["integral_bound"] = sweep_json(integral, "k", "j");
  const bool all = golden_ok && sup.failures == 0 && integral.failures == 0;
  j["all_pass"] = all;
  write_json(out, "check.json", j);
  return all;
}

}  // namespace sar
