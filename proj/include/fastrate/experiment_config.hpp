#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fastrate/distributions.hpp"
#include "fastrate/lp_estimator.hpp"

namespace fastrate {

/// Invalid experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  Rates,
  Concentration,
  MarginCheck,
  LowerBound,
  CompareBounds,
  SieveVsPlugin,
  Corridor,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

enum class BandwidthRule { Rate, Fixed };

struct EstimatorConfig {
  std::string kind = "plugin";  // "plugin" or "sieve"
  std::optional<int> order;     // defaults to floor(beta)
  BandwidthRule bandwidth_rule = BandwidthRule::Rate;
  double bandwidth = 0.0;       // used by the fixed rule
  double bandwidth_scale = 1.0; // h = scale * n^{-1/(2 beta + d)} under the rate rule
  KernelKind kernel = KernelKind::UniformBall;
  double kernel_radius = 1.0;
  double guard_scale = 1.0;     // guard threshold = guard_scale / log n
  double epsilon_multiplier = 1.0;
  double p = std::numeric_limits<double>::infinity();

  LPConfig lp_config(std::size_t n, const SyntheticDistribution& dist) const;
  int order_for(const SyntheticDistribution& dist) const;
};

struct Tolerance {
  double slope = 0.15;
  double sigma = 3.0;
  double excess = 1e-3;
  double spearman = -0.9;
  double plugin_margin = 0.1;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Rates;
  nlohmann::json distribution;
  EstimatorConfig estimator;
  std::vector<std::size_t> n_grid;
  std::size_t replicates = 50;
  std::size_t mc_budget = 20000;
  std::uint64_t seed = 0;
  int workers = 1;
  Tolerance tolerance;
  std::size_t holder_trials = 2000;
  nlohmann::json options;  // experiment-specific block
  bool record_timing = false;
};

/// Parses and validates the config schema; throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Builds a distribution from its JSON descriptor {"kind": ..., params}.
DistributionPtr make_distribution(const nlohmann::json& j);

/// Hypercube with its sign vector replaced; the rest of the descriptor kept.
HypercubeDistribution make_hypercube(const nlohmann::json& j, std::optional<std::vector<int>> sigma);

}  // namespace fastrate
