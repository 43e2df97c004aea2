#include "sar/experiment.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <optional>

namespace {

enum Exit { kOk = 0, kConfig = 1, kDivergence = 2, kInternal = 3 };

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

sar::ExperimentConfig load(const Options& o) {
  sar::ExperimentConfig cfg = o.config.empty() ? sar::parse_config_string("") : sar::load_config(o.config);
  if (o.seed) {
    cfg.run.seed = *o.seed;
    cfg.rates.seed = *o.seed;
    cfg.check.seed = *o.seed;
  }
  if (o.threads) {
    if (*o.threads < 0) throw sar::ConfigError("--threads must be >= 0");
    cfg.run.threads = *o.threads;
    cfg.rates.threads = *o.threads;
  }
  return cfg;
}

int dispatch(const std::string& command, const Options& o) {
  const sar::ExperimentConfig cfg = load(o);
  if (command == "run") {
    const sar::RunRecord rec = sar::cmd_run(cfg.run, o.out);
    if (rec.termination == sar::Termination::PreconditionFailed)
      fmt::print(stderr, "warning: initial residual does not exceed tau * delta; returning the initial guess\n");
    else if (rec.termination == sar::Termination::MaxSteps)
      fmt::print(stderr, "warning: max_steps reached before the discrepancy principle fired\n");
    fmt::print("{}: {} steps, final rmse {:.6g}, final rmsr {:.6g}\n", sar::to_string(rec.termination),
               rec.final_state.step, rec.rmse.back(), rec.rmsr.back());
  } else if (command == "rates") {
    const sar::RatesResult r = sar::cmd_rates(cfg.rates, o.out);
    fmt::print("slope {:.6f} (theory {:.6f}), r^2 {:.6f}\n", r.slope, r.theoretical_exponent, r.r_squared);
  } else if (command == "constants") {
    std::string text;
    sar::cmd_constants(cfg.constants, o.out, &text);
    fmt::print("{}", text);
  } else {
    const bool ok = sar::cmd_check(cfg.check, o.out);
    fmt::print("{}\n", ok ? "all checks passed" : "some checks failed; see check.json");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized Landweber-flow experiments"};
  app.require_subcommand(1);
  Options o;
  for (const char* name : {"run", "rates", "constants", "check"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", o.config, "INI config file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "master seed, overrides the config");
    sub->add_option("--threads", o.threads, "worker threads, 0 = all");
  }
  app.get_subcommand("run")->description("run the flow on one problem preset");
  app.get_subcommand("rates")->description("convergence-rate sweep over noise levels");
  app.get_subcommand("constants")->description("print and export the constants chain");
  app.get_subcommand("check")->description("decay-bound sweeps and reference-table comparison");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return dispatch(command, o);
  } catch (const sar::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfig;
  } catch (const sar::DivergenceError& e) {
    fmt::print(stderr, "divergence at step {}: {}\n", e.step(), e.what());
    return kDivergence;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInternal;
  }
}
