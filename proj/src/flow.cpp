#include "sar/flow.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sar {

double tau_threshold(double eta, double eps0) { return (2.0 + 2.0 * eta) / (2.0 - (2.0 + eps0) * eta); }

double theta_bound(double eps0, double eta, double delta0) { return std::sqrt(eps0 * eta) / delta0; }

std::vector<ParamViolation> validate_params(const SarConfig& cfg) {
  std::vector<ParamViolation> out;
  auto fail = [&](const char* name, std::string msg) { out.push_back({name, std::move(msg)}); };

  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) fail("dt", fmt::format("dt = {} must be positive", cfg.dt));
  if (cfg.ensemble_size < 1) fail("ensemble_size", fmt::format("ensemble_size = {} must be >= 1", cfg.ensemble_size));
  if (!(cfg.delta >= 0.0)) fail("delta", fmt::format("delta = {} must be >= 0", cfg.delta));
  if (!(cfg.delta0 > 0.0)) fail("delta0", fmt::format("delta0 = {} must be positive", cfg.delta0));
  if (cfg.max_steps < 0) fail("max_steps", fmt::format("max_steps = {} must be >= 0", cfg.max_steps));

  const bool eta_ok = cfg.eta > 0.0 && cfg.eta < 1.0;
  if (!eta_ok) fail("eta", fmt::format("eta = {} outside (0, 1)", cfg.eta));

  bool eps_ok = cfg.eps0 > 0.0;
  if (eta_ok) {
    const double upper = 2.0 * (1.0 / cfg.eta - 1.0);
    if (!(cfg.eps0 < upper)) eps_ok = false;
    if (!eps_ok) fail("eps0", fmt::format("eps0 = {} outside (0, {:.6g})", cfg.eps0, upper));
  } else if (!eps_ok) {
    fail("eps0", fmt::format("eps0 = {} must be positive", cfg.eps0));
  }

  if (eta_ok && eps_ok) {
    const double lower = tau_threshold(cfg.eta, cfg.eps0);
    if (!(cfg.tau > lower)) fail("tau", fmt::format("tau = {} must exceed {:.6g}", cfg.tau, lower));
  }

  if (!(cfg.theta >= 0.0)) {
    fail("theta", fmt::format("theta = {} must be >= 0", cfg.theta));
  } else if (eta_ok && eps_ok && cfg.delta0 > 0.0) {
    const double upper = theta_bound(cfg.eps0, cfg.eta, cfg.delta0);
    if (cfg.theta > upper) fail("theta", fmt::format("theta = {} exceeds {:.6g}", cfg.theta, upper));
  }
  return out;
}

std::string describe(const std::vector<ParamViolation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.parameter + ": " + v.message;
  }
  return out;
}

double noise_scale(double t, double theta) { return theta / std::sqrt(1.0 + t); }

bool check_stop(double rmsr, const SarConfig& cfg) { return rmsr * rmsr - cfg.tau * cfg.tau * cfg.delta * cfg.delta < 0.0; }

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Stopped: return "stopped";
    case Termination::MaxSteps: return "max_steps";
    case Termination::PreconditionFailed: return "precondition_failed";
  }
  return "unknown";
}

namespace {

double mean_square(const std::vector<double>& values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double rmsr_or_throw(const std::vector<double>& norms2, long step) {
  const double r = std::sqrt(mean_square(norms2));
  if (!std::isfinite(r)) throw DivergenceError(step, 0, fmt::format("non-finite residual at step {}", step));
  return r;
}

int thread_count(const SarConfig& cfg) {
#ifdef _OPENMP
  return cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#else
  (void)cfg;
  return 1;
#endif
}

}  // namespace

double EnsembleState::rmsr_standard_error() const {
  const std::size_t n = residual_norms2.size();
  if (n < 2 || !(rmsr > 0.0)) return 0.0;
  const double m = mean_square(residual_norms2);
  double var = 0.0;
  for (double v : residual_norms2) var += (v - m) * (v - m);
  var /= static_cast<double>(n - 1);
  // delta method for sqrt of a sample mean
  return std::sqrt(var / static_cast<double>(n)) / (2.0 * rmsr);
}

EnsembleState initial_state(const ForwardProblem& problem, const GridVector& x_bar, const GridVector& y_delta,
                            int ensemble_size) {
  if (ensemble_size < 1) throw std::invalid_argument("initial_state: ensemble_size must be >= 1");
  if (!(x_bar.grid == problem.param_grid())) throw GridMismatch("initial_state: x_bar");
  if (!(y_delta.grid == problem.data_grid())) throw GridMismatch("initial_state: y_delta");

  const GridVector fx = problem.apply(x_bar);
  const double res2 = inner(fx - y_delta, fx - y_delta);
  const auto n = static_cast<std::size_t>(ensemble_size);

  EnsembleState s;
  s.particles.assign(n, x_bar);
  s.forward.assign(n, fx);
  s.residual_norms2.assign(n, res2);
  s.x_bar = x_bar;
  s.rmsr = rmsr_or_throw(s.residual_norms2, 0);
  return s;
}

double ensemble_rmsr(const EnsembleState& state, const ForwardProblem& problem, const GridVector& y_delta) {
  if (state.particles.empty()) throw std::invalid_argument("ensemble_rmsr: empty ensemble");
  std::vector<double> norms2(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    const GridVector r = problem.apply(state.particles[i]) - y_delta;
    norms2[i] = inner(r, r);
  }
  return rmsr_or_throw(norms2, state.step);
}

StepResult advance(const EnsembleState& state, const SarConfig& cfg, const ForwardProblem& problem,
                   const GridVector& y_delta, const IncrementSampler& sampler) {
  const std::size_t n = state.size();
  if (n == 0) throw std::invalid_argument("step: empty ensemble");

  StepResult out;
  out.noise_coefficient = state.rmsr * noise_scale(state.time, cfg.theta);
  const double f = out.noise_coefficient;
  const bool noisy = f != 0.0;
  const long next = state.step + 1;
  const double limit = cfg.divergence_factor * (1.0 + norm(state.x_bar));

  EnsembleState& s = out.state;
  s.particles.resize(n);
  s.forward.resize(n);
  s.residual_norms2.assign(n, 0.0);
  s.step = next;
  s.time = static_cast<double>(next) * cfg.dt;
  s.x_bar = state.x_bar;

  std::vector<std::size_t> projected(n, 0);
  std::vector<char> diverged(n, 0);

#pragma omp parallel for schedule(dynamic) num_threads(thread_count(cfg))
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    GridVector x = state.particles[i];
    x += cfg.dt * problem.adjoint_apply(state.particles[i], y_delta - state.forward[i]);
    if (noisy) {
      const RngStream rng{cfg.master_seed, i, static_cast<std::uint64_t>(state.step)};
      x += f * sampler.sample(cfg.dt, rng);
    }
    projected[i] = problem.project(x);
    if (!x.all_finite() || norm(x) > limit) {
      diverged[i] = 1;
      continue;
    }
    GridVector fx = problem.apply(x);
    if (!fx.all_finite()) {
      diverged[i] = 1;
      continue;
    }
    const GridVector r = fx - y_delta;
    s.residual_norms2[i] = inner(r, r);
    s.particles[i] = std::move(x);
    s.forward[i] = std::move(fx);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (diverged[i])
      throw DivergenceError(next, i, fmt::format("particle {} diverged at step {}", i, next));
    out.projected += projected[i];
  }
  s.rmsr = rmsr_or_throw(s.residual_norms2, next);
  return out;
}

EnsembleState step(const EnsembleState& state, const SarConfig& cfg, const ForwardProblem& problem,
                   const GridVector& y_delta) {
  const IncrementSampler sampler(cfg.cov, problem.param_grid());
  return advance(state, cfg, problem, y_delta, sampler).state;
}

RunRecord run(const ForwardProblem& problem, const GridVector* truth, const GridVector& y_delta, const GridVector& x_bar,
              const SarConfig& cfg) {
  if (auto v = validate_params(cfg); !v.empty()) throw std::invalid_argument("run: " + describe(v));
  if (truth && !(truth->grid == problem.param_grid())) throw GridMismatch("run: truth");

  const IncrementSampler sampler(cfg.cov, problem.param_grid());
  RunRecord rec;
  EnsembleState state = initial_state(problem, x_bar, y_delta, cfg.ensemble_size);

  auto record = [&](const EnsembleState& s) {
    rec.steps.push_back(s.step);
    rec.times.push_back(s.time);
    rec.rmsr.push_back(s.rmsr);
    rec.rmsr_se.push_back(s.rmsr_standard_error());
    rec.noise_coefficient.push_back(s.rmsr * noise_scale(s.time, cfg.theta));
    if (truth) {
      double acc = 0.0;
      for (const auto& p : s.particles) {
        const GridVector e = p - *truth;
        acc += inner(e, e);
      }
      rec.rmse.push_back(std::sqrt(acc / static_cast<double>(s.size())));
    } else {
      rec.rmse.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  };

  record(state);
  if (!(state.rmsr > cfg.tau * cfg.delta)) {
    rec.termination = Termination::PreconditionFailed;
    rec.final_state = std::move(state);
    return rec;
  }

  for (;;) {
    if (check_stop(state.rmsr, cfg)) {
      rec.termination = Termination::Stopped;
      rec.stop_step = state.step;
      rec.stop_time = state.time;
      break;
    }
    if (state.step >= cfg.max_steps) {
      rec.termination = Termination::MaxSteps;
      break;
    }
    StepResult next = advance(state, cfg, problem, y_delta, sampler);
    rec.projection_events += next.projected;
    state = std::move(next.state);
    record(state);
  }
  rec.final_state = std::move(state);
  return rec;
}

}  // namespace sar
