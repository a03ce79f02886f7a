#include "fastrate/experiment_config.hpp"

#include <cmath>
#include <fstream>

namespace fastrate {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Rates: return "rates";
    case ExperimentKind::Concentration: return "concentration";
    case ExperimentKind::MarginCheck: return "margin-check";
    case ExperimentKind::LowerBound: return "lower-bound";
    case ExperimentKind::CompareBounds: return "compare-bounds";
    case ExperimentKind::SieveVsPlugin: return "sieve-vs-plugin";
    case ExperimentKind::Corridor: return "corridor";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::Rates, ExperimentKind::Concentration, ExperimentKind::MarginCheck,
                 ExperimentKind::LowerBound, ExperimentKind::CompareBounds,
                 ExperimentKind::SieveVsPlugin, ExperimentKind::Corridor}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

int EstimatorConfig::order_for(const SyntheticDistribution& dist) const {
  return order.value_or(dist.holder().floor_beta());
}

LPConfig EstimatorConfig::lp_config(std::size_t n, const SyntheticDistribution& dist) const {
  double h = bandwidth;
  if (bandwidth_rule == BandwidthRule::Rate) {
    h = bandwidth_scale * default_bandwidth(n, dist.holder());
  }
  return LPConfig(order_for(dist), h, KernelSpec(kernel, dist.dim(), kernel_radius),
                  log_guard(guard_scale));
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

double parse_norm_index(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    throw ConfigError("estimator.p must be a number >= 1 or \"inf\"");
  }
  const double p = j.get<double>();
  if (!(p >= 1.0)) throw ConfigError("estimator.p must be >= 1");
  return p;
}

EstimatorConfig parse_estimator(const json& j) {
  EstimatorConfig e;
  if (j.is_null()) return e;
  e.kind = get_or<std::string>(j, "kind", e.kind);
  if (e.kind != "plugin" && e.kind != "sieve") {
    throw ConfigError("estimator.kind must be \"plugin\" or \"sieve\"");
  }
  if (j.contains("order")) {
    e.order = j.at("order").get<int>();
    if (*e.order < 0) throw ConfigError("estimator.order must be >= 0");
  }
  if (j.contains("bandwidth")) {
    const auto& b = j.at("bandwidth");
    if (b.is_string()) {
      if (b.get<std::string>() != "rate") {
        throw ConfigError("estimator.bandwidth must be \"rate\" or a positive number");
      }
      e.bandwidth_rule = BandwidthRule::Rate;
    } else {
      e.bandwidth_rule = BandwidthRule::Fixed;
      e.bandwidth = b.get<double>();
      if (!(e.bandwidth > 0)) throw ConfigError("estimator.bandwidth must be > 0");
    }
  }
  e.bandwidth_scale = get_or(j, "bandwidth_scale", e.bandwidth_scale);
  if (!(e.bandwidth_scale > 0)) throw ConfigError("estimator.bandwidth_scale must be > 0");
  if (j.contains("kernel")) {
    try {
      e.kernel = kernel_kind_from_string(j.at("kernel").get<std::string>());
    } catch (const ValidationError& err) {
      throw ConfigError(err.what());
    }
  }
  e.kernel_radius = get_or(j, "kernel_radius", e.kernel_radius);
  e.guard_scale = get_or(j, "guard_scale", e.guard_scale);
  if (!(e.guard_scale > 0)) throw ConfigError("estimator.guard_scale must be > 0");
  e.epsilon_multiplier = get_or(j, "epsilon_multiplier", e.epsilon_multiplier);
  if (!(e.epsilon_multiplier > 0)) throw ConfigError("estimator.epsilon_multiplier must be > 0");
  if (j.contains("p")) e.p = parse_norm_index(j.at("p"));
  return e;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig c;
    if (!j.contains("experiment")) throw ConfigError("config.experiment is required");
    c.kind = experiment_kind_from_string(j.at("experiment").get<std::string>());
    if (!j.contains("distribution")) throw ConfigError("config.distribution is required");
    c.distribution = j.at("distribution");
    // Fail early on a malformed descriptor.
    make_distribution(c.distribution);
    c.estimator = parse_estimator(j.value("estimator", json()));
    if (j.contains("n_grid")) {
      c.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    } else {
      for (int k = 8; k <= 13; ++k) c.n_grid.push_back(std::size_t{1} << k);
    }
    if (c.n_grid.empty()) throw ConfigError("n_grid must not be empty");
    for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
      if (c.n_grid[i] < 2) throw ConfigError("n_grid entries must be >= 2");
      if (i > 0 && c.n_grid[i] <= c.n_grid[i - 1]) {
        throw ConfigError("n_grid must be strictly increasing");
      }
    }
    c.replicates = get_or<std::size_t>(j, "replicates", c.replicates);
    if (c.replicates < 1) throw ConfigError("replicates must be >= 1");
    c.mc_budget = get_or<std::size_t>(j, "mc_budget", c.mc_budget);
    if (c.mc_budget < 2) throw ConfigError("mc_budget must be >= 2");
    if (!j.contains("seed")) throw ConfigError("config.seed is required");
    c.seed = j.at("seed").get<std::uint64_t>();
    c.workers = get_or(j, "workers", c.workers);
    if (c.workers < 1) throw ConfigError("workers must be >= 1");
    c.holder_trials = get_or<std::size_t>(j, "holder_trials", c.holder_trials);
    if (j.contains("tolerance")) {
      const auto& t = j.at("tolerance");
      c.tolerance.slope = get_or(t, "slope", c.tolerance.slope);
      c.tolerance.sigma = get_or(t, "sigma", c.tolerance.sigma);
      c.tolerance.excess = get_or(t, "excess", c.tolerance.excess);
      c.tolerance.spearman = get_or(t, "spearman", c.tolerance.spearman);
      c.tolerance.plugin_margin = get_or(t, "plugin_margin", c.tolerance.plugin_margin);
    }
    c.options = j.value("options", json::object());
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

HypercubeDistribution make_hypercube(const json& j, std::optional<std::vector<int>> sigma) {
  HypercubeParams p;
  p.dim = get_or(j, "d", 1);
  const std::string regime = get_or<std::string>(j, "regime", "explicit");
  p.beta = get_or(j, "beta", 1.0);
  p.L = get_or(j, "L", 1.0);
  p.c_phi = get_or(j, "C_phi", 0.5);
  p.alpha = get_or(j, "alpha", 1.0);
  if (regime == "strong") {
    p = strong_density_regime(j.at("n").get<std::size_t>(), p.dim, p.alpha, p.beta, p.L, p.c_phi,
                              get_or(j, "C_bar", 1.0), get_or(j, "C_prime", 0.5),
                              get_or(j, "C_dprime", 1.0));
  } else if (regime == "mild") {
    p = mild_density_regime(j.at("n").get<std::size_t>(), p.dim, p.alpha, p.beta, p.L, p.c_phi,
                            get_or(j, "C", 1.0), get_or(j, "C_prime", 0.5));
  } else if (regime == "explicit") {
    p.q = j.at("q").get<int>();
    p.m = j.at("m").get<int>();
    p.w = j.at("w").get<double>();
    p.a0_mode = a0_mode_from_string(get_or<std::string>(j, "a0_mode", "cube-complement"));
  } else {
    throw ConfigError("hypercube.regime must be explicit, strong or mild");
  }
  if (sigma) {
    p.sigma = *sigma;
  } else if (j.contains("sigma")) {
    p.sigma = j.at("sigma").get<std::vector<int>>();
  } else {
    p.sigma.assign(static_cast<std::size_t>(std::max(p.m, 0)), 1);
  }
  return hypercube_build(p);
}

DistributionPtr make_distribution(const json& j) {
  try {
    if (!j.is_object() || !j.contains("kind")) {
      throw ConfigError("distribution must be an object with a \"kind\"");
    }
    const auto kind = j.at("kind").get<std::string>();
    std::optional<double> L;
    if (j.contains("L")) L = j.at("L").get<double>();
    if (kind == "ball") {
      return std::make_shared<BallExampleDistribution>(get_or(j, "d", 2), get_or(j, "C", 0.25),
                                                       get_or(j, "beta", 2.0), L);
    }
    if (kind == "corridor") {
      return std::make_shared<CorridorDistribution>(get_or(j, "a", 0.25), get_or(j, "slope", 0.25),
                                                    L);
    }
    if (kind == "linear") {
      return std::make_shared<LinearThresholdDistribution>(
          get_or(j, "d", 1), get_or(j, "slope", 0.5), get_or(j, "threshold", 0.5),
          get_or(j, "beta", 1.0), L);
    }
    if (kind == "wave") {
      return std::make_shared<WaveDistribution>(get_or(j, "amplitude", 0.2),
                                                get_or(j, "frequency", 2), get_or(j, "phase", 1.0),
                                                get_or(j, "beta", 1.0), L);
    }
    if (kind == "hypercube") {
      return std::make_shared<HypercubeDistribution>(make_hypercube(j, std::nullopt));
    }
    throw ConfigError("unknown distribution kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("distribution: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace fastrate
