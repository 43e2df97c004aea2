#include "sar/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace sar {

namespace pt = boost::property_tree;

int FlowSettings::nodes_per_axis() const {
  if (n > 0) return n;
  if (problem == "elliptic2d") return 128;
  if (problem == "diagonal") return 200;
  return 1000;
}

FlowSettings default_rates_settings() {
  FlowSettings s;
  s.problem = "diagonal";
  s.theta = 0.01;
  s.ensemble_size = 20;
  s.source_norm = 10.0;
  s.source_profile = "saturating";
  s.deltas = {1e-1, std::pow(10.0, -1.5), 1e-2, std::pow(10.0, -2.5), 1e-3};
  return s;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ConfigError(fmt::format("{}: '{}' is not a real number", key, raw));
  return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  Int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ConfigError(fmt::format("{}: '{}' is not an integer", key, raw));
  return out;
}

using Setter = std::function<void(const std::string& key, const std::string& value)>;

template <typename T>
Setter real(T& field) {
  return [&field](const std::string& k, const std::string& v) { field = to_real(k, v); };
}
template <typename T>
Setter integer(T& field) {
  return [&field](const std::string& k, const std::string& v) { field = to_int<T>(k, v); };
}

std::map<std::string, Setter> flow_keys(FlowSettings& s, bool rates) {
  std::map<std::string, Setter> keys = {
      {"problem",
       [&s](const std::string& k, const std::string& v) {
         const std::string p = trim(v);
         if (p != "elliptic1d" && p != "elliptic2d" && p != "diagonal")
           throw ConfigError(fmt::format("{}: unknown preset '{}'", k, v));
         s.problem = p;
       }},
      {"n", integer(s.n)},
      {"delta", real(s.delta)},
      {"theta", real(s.theta)},
      {"ensemble_size", integer(s.ensemble_size)},
      {"dt", real(s.dt)},
      {"dt_factor", real(s.dt_factor)},
      {"tau", real(s.tau)},
      {"eps0", real(s.eps0)},
      {"eta", real(s.eta)},
      {"delta0", real(s.delta0)},
      {"max_steps", integer(s.max_steps)},
      {"covariance",
       [&s](const std::string& k, const std::string& v) {
         const std::string c = trim(v);
         if (c == "identity") s.cov.kind = CovarianceSpec::Kind::Identity;
         else if (c == "eigen_decay") s.cov.kind = CovarianceSpec::Kind::EigenDecay;
         else throw ConfigError(fmt::format("{}: unknown covariance '{}'", k, v));
       }},
      {"cov_beta", real(s.cov.beta)},
      {"cov_terms", integer(s.cov.terms)},
      {"cov_basis",
       [&s](const std::string& k, const std::string& v) {
         const std::string b = trim(v);
         if (b == "cosine") s.cov.basis = CovarianceSpec::Basis::Cosine;
         else if (b == "coordinate") s.cov.basis = CovarianceSpec::Basis::Coordinate;
         else throw ConfigError(fmt::format("{}: unknown basis '{}'", k, v));
       }},
      {"seed", integer(s.seed)},
      {"threads", integer(s.threads)},
      {"initial_guess",
       [&s](const std::string& k, const std::string& v) {
         const std::string g = trim(v);
         if (g != "mean") to_real(k, g);
         s.initial_guess = g;
       }},
      {"scale",
       [&s](const std::string& k, const std::string& v) {
         const std::string g = trim(v);
         if (g != "auto" && !(to_real(k, g) > 0.0)) throw ConfigError(k + ": scale must be positive or 'auto'");
         s.scale = g;
       }},
      {"gamma", real(s.gamma)},
      {"source_norm", real(s.source_norm)},
      {"source_profile",
       [&s](const std::string& k, const std::string& v) {
         const std::string g = trim(v);
         if (g != "gaussian" && g != "saturating") throw ConfigError(fmt::format("{}: unknown profile '{}'", k, v));
         s.source_profile = g;
       }},
      {"exponent", real(s.exponent)},
  };
  if (rates) {
    keys["deltas"] = [&s](const std::string& k, const std::string& v) {
      try {
        s.deltas = parse_real_list(v);
      } catch (const ConfigError& e) {
        throw ConfigError(k + ": " + e.what());
      }
    };
    keys["inject_exponent"] = [&s](const std::string& k, const std::string& v) { s.inject_exponent = to_real(k, v); };
    keys["inject_constant"] = real(s.inject_constant);
  } else {
    keys["bands"] = [&s](const std::string& k, const std::string& v) {
      try {
        s.bands = parse_real_list(v);
      } catch (const ConfigError& e) {
        throw ConfigError(k + ": " + e.what());
      }
    };
  }
  return keys;
}

std::map<std::string, Setter> theory_keys(TheoryParams& p) {
  return {
      {"eta", real(p.eta)},   {"delta0", real(p.delta0)}, {"gamma", real(p.gamma)}, {"c_r", real(p.c_R)},
      {"eps0", real(p.eps0)}, {"tau", real(p.tau)},       {"sigma", real(p.sigma)},
  };
}

void apply_section(const std::string& section, const pt::ptree& tree, std::map<std::string, Setter> keys) {
  for (const auto& [key, node] : tree) {
    if (!node.empty()) throw ConfigError(fmt::format("[{}] {}: nested values are not allowed", section, key));
    auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError(fmt::format("[{}]: unknown key '{}'", section, key));
    it->second(fmt::format("[{}] {}", section, key), node.data());
  }
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_real("list item", item));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

ExperimentConfig parse_config_string(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
  }

  ExperimentConfig cfg;
  cfg.rates = default_rates_settings();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(fmt::format("key '{}' outside of any section", section));
    if (section == "run") {
      apply_section(section, body, flow_keys(cfg.run, false));
    } else if (section == "rates") {
      apply_section(section, body, flow_keys(cfg.rates, true));
    } else if (section == "constants") {
      apply_section(section, body, theory_keys(cfg.constants));
    } else if (section == "check") {
      apply_section(section, body, {{"samples", integer(cfg.check.samples)}, {"seed", integer(cfg.check.seed)}});
    } else {
      throw ConfigError(fmt::format("unknown section [{}]", section));
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_string(buf.str());
}

}  // namespace sar
