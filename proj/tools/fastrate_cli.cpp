#include <filesystem>
#include <iostream>
#include <utility>

#include <CLI11.hpp>

#include "fastrate/experiments.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"fastrate experiment runner"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", svg_name;
  std::optional<std::uint64_t> seed;
  bool record_timing = false;
  std::vector<CLI::App*> subs;
  const std::pair<const char*, const char*> commands[] = {
      {"rates", "excess-risk slope of the plug-in or sieve classifier"},
      {"concentration", "exceedance probability of the estimator at a fixed point"},
      {"margin-check", "empirical margin mass against the closed form"},
      {"lower-bound", "average excess over all hypercube laws against the lower bound"},
      {"compare-bounds", "excess risk against the sup/Lp comparison bounds"},
      {"sieve-vs-plugin", "both classifiers on shared samples"},
      {"corridor", "excess decay when eta stays away from 1/2"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--svg", svg_name, "write a log-log SVG plot with this file name");
    sub->add_option("--seed", seed, "override the master seed");
    sub->add_flag("--record-timing", record_timing, "fill the wall_ms column");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string subcommand;
  for (auto* s : subs) {
    if (s->parsed()) subcommand = s->get_name();
  }

  fastrate::ExperimentOutcome outcome;
  try {
    auto cfg = fastrate::load_config(config_path);
    if (fastrate::to_string(cfg.kind) != subcommand) {
      throw fastrate::ConfigError("config.experiment is '" + fastrate::to_string(cfg.kind) +
                                  "' but the subcommand is '" + subcommand + "'");
    }
    if (seed) cfg.seed = *seed;
    cfg.record_timing = record_timing;
    outcome = fastrate::run_experiment(cfg);
  } catch (const fastrate::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    fastrate::write_csv((dir / (subcommand + ".csv")).string(), outcome.rows);
    fastrate::write_summary((dir / (subcommand + "_summary.json")).string(), outcome.summary);
    if (!svg_name.empty()) {
      fastrate::write_text((dir / svg_name).string(),
                           fastrate::render_svg(outcome.plot, subcommand));
    }
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return 1;
  }

  std::cout << outcome.summary.dump(2) << "\n";
  return outcome.pass ? 0 : 3;
}
