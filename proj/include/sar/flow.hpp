#pragma once

#include "sar/forward_problem.hpp"
#include "sar/wiener.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sar {

/// Tunables of the stochastic flow
///   dx = F'(x)^* (y_delta - F(x)) dt + f(t) dB_t,   x(0) = x_bar,
/// integrated by explicit Euler-Maruyama with f_k = r_k * theta / sqrt(1 + t_k)
/// and stopped by the discrepancy principle r_k < tau * delta.
struct SarConfig {
  double dt = 0.1;
  double theta = 0.0;          // randomization level
  int ensemble_size = 1;       // N
  double tau = 6.5;
  double eps0 = 1.0;
  double eta = 0.5;
  double delta0 = 1.0;         // upper bound on admissible noise levels
  double delta = 0.0;          // noise level used by the stopping rule
  long max_steps = 100000;
  CovarianceSpec cov;
  std::uint64_t master_seed = 0;
  int threads = 1;             // 0 = all available
  double divergence_factor = 1e6;
};

struct ParamViolation {
  std::string parameter;
  std::string message;
};

/// Lower bound (2 + 2 eta) / (2 - (2 + eps0) eta) on tau.
double tau_threshold(double eta, double eps0);
/// Upper bound sqrt(eps0 eta) / delta0 on theta, i.e. g(0).
double theta_bound(double eps0, double eta, double delta0);

/// Every violated admissibility constraint; empty when the configuration is usable.
std::vector<ParamViolation> validate_params(const SarConfig& cfg);
std::string describe(const std::vector<ParamViolation>& violations);

/// s(t) = theta / sqrt(1 + t).
double noise_scale(double t, double theta);

/// Discrepancy principle: true iff r^2 - tau^2 delta^2 < 0.
bool check_stop(double rmsr, const SarConfig& cfg);

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long step, std::size_t particle, const std::string& what)
      : std::runtime_error(what), step_(step), particle_(particle) {}
  long step() const { return step_; }
  std::size_t particle() const { return particle_; }

 private:
  long step_;
  std::size_t particle_;
};

struct EnsembleState {
  std::vector<GridVector> particles;
  std::vector<GridVector> forward;        // F(particles[i])
  std::vector<double> residual_norms2;    // ||F(x_i) - y_delta||^2
  long step = 0;
  double time = 0.0;
  double rmsr = 0.0;                      // r_k
  GridVector x_bar;

  std::size_t size() const { return particles.size(); }
  /// Standard error of r_k from the spread of the per-particle squared residuals.
  double rmsr_standard_error() const;
};

/// N copies of x_bar with their residual statistics.
EnsembleState initial_state(const ForwardProblem& problem, const GridVector& x_bar, const GridVector& y_delta,
                            int ensemble_size);

/// sqrt(1/N sum_i ||F(x_i) - y_delta||^2), evaluated afresh from the particles.
double ensemble_rmsr(const EnsembleState& state, const ForwardProblem& problem, const GridVector& y_delta);

struct StepResult {
  EnsembleState state;
  double noise_coefficient = 0.0;  // f_k used for this transition
  std::size_t projected = 0;       // entries moved by ForwardProblem::project
};

/// One Euler-Maruyama step for every particle. All particles share f_k and
/// draw independent increments from stream (master_seed, particle, step).
StepResult advance(const EnsembleState& state, const SarConfig& cfg, const ForwardProblem& problem,
                   const GridVector& y_delta, const IncrementSampler& sampler);
EnsembleState step(const EnsembleState& state, const SarConfig& cfg, const ForwardProblem& problem,
                   const GridVector& y_delta);

enum class Termination { Stopped, MaxSteps, PreconditionFailed };
std::string to_string(Termination t);

struct RunRecord {
  std::vector<long> steps;
  std::vector<double> times;
  std::vector<double> rmsr;
  std::vector<double> rmsr_se;
  std::vector<double> rmse;             // NaN without a reference solution
  std::vector<double> noise_coefficient;
  std::optional<long> stop_step;
  std::optional<double> stop_time;
  Termination termination = Termination::MaxSteps;
  std::size_t projection_events = 0;
  EnsembleState final_state;
};

/// Runs the flow from N copies of x_bar until the discrepancy principle fires
/// or max_steps is reached. Returns PreconditionFailed at k = 0 when
/// ||F(x_bar) - y_delta|| <= tau * delta.
RunRecord run(const ForwardProblem& problem, const GridVector* truth, const GridVector& y_delta, const GridVector& x_bar,
              const SarConfig& cfg);

}  // namespace sar
