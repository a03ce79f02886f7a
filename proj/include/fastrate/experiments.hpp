#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fastrate/experiment_config.hpp"

namespace fastrate {

struct ResultRow {
  std::string experiment;
  std::size_t n = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  double excess = 0.0;
  double se = 0.0;
  std::optional<double> wall_ms;
};

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct ExperimentOutcome {
  std::vector<ResultRow> rows;
  nlohmann::json summary;  // always has pass, theoretical, measured, tolerance
  std::vector<PlotSeries> plot;
  bool pass = false;
};

ExperimentOutcome run_rates(const ExperimentConfig& cfg);
ExperimentOutcome run_sieve_vs_plugin(const ExperimentConfig& cfg);
ExperimentOutcome run_corridor(const ExperimentConfig& cfg);
ExperimentOutcome run_concentration(const ExperimentConfig& cfg);
ExperimentOutcome run_margin_check(const ExperimentConfig& cfg);
ExperimentOutcome run_lower_bound(const ExperimentConfig& cfg);
ExperimentOutcome run_compare_bounds(const ExperimentConfig& cfg);

/// Dispatches on cfg.kind.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

// Output writers.
void write_csv(const std::string& path, const std::vector<ResultRow>& rows);
std::string format_csv(const std::vector<ResultRow>& rows);
void write_summary(const std::string& path, const nlohmann::json& summary);
/// Log-log line plot of the series.
std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title);
void write_text(const std::string& path, const std::string& text);

}  // namespace fastrate
