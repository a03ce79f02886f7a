// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on failure.
// Usage: fastrate_acceptance [criterion ids...]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "fastrate/experiment_config.hpp"
#include "fastrate/experiments.hpp"
#include "fastrate/lp_estimator.hpp"
#include "fastrate/risk_eval.hpp"
#include "fastrate/sieve_classifier.hpp"
#include "sieve_oracle.hpp"

using namespace fastrate;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentConfig config(const std::string& name) {
  return load_config(std::string(FASTRATE_CONFIG_DIR) + "/" + name);
}

Sample uniform_sample(int d, std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> coords(n * d);
  std::vector<std::uint8_t> labels(n);
  for (auto& c : coords) c = unif(rng);
  for (auto& y : labels) y = unif(rng) < 0.5 ? 1 : 0;
  return Sample(d, coords, labels);
}

Verdict polynomial_reproduction() {
  Rng rng = make_rng(1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::size_t solved = 0, singular = 0;
  double worst = 0.0;
  for (int cfg_i = 0; cfg_i < 100; ++cfg_i) {
    const int d = 1 + cfg_i % 3;
    const int l = (cfg_i / 3) % 3;
    const auto basis = enumerate_multiindices(d, l);
    std::vector<double> coef(basis.size());
    for (auto& c : coef) c = 2 * unif(rng) - 1;
    const auto poly = [&](std::span<const double> z) {
      double v = 0;
      for (std::size_t a = 0; a < basis.size(); ++a) v += coef[a] * monomial_eval(z, basis[a]);
      return v;
    };
    const std::size_t n = 20 + static_cast<std::size_t>(unif(rng) * 200);
    const double h = 0.2 + 0.4 * unif(rng);
    const auto kind = cfg_i % 2 ? KernelKind::SmoothBump : KernelKind::UniformBall;
    const Sample s = uniform_sample(d, n, rng);
    const LPConfig cfg(l, h, KernelSpec(kind, d, 1.0), log_guard(1.0));
    std::vector<double> resp(n);
    for (std::size_t i = 0; i < n; ++i) resp[i] = poly(s.x(i));
    for (int q = 0; q < 10; ++q) {
      std::vector<double> x(d);
      for (auto& xi : x) xi = 0.1 + 0.8 * unif(rng);
      const auto fit = lp_solve(build_design(s, resp, x, cfg));
      if (!fit) {
        ++singular;
        continue;
      }
      ++solved;
      worst = std::max(worst, std::abs(*fit - poly(x)));
    }
  }
  return {worst <= 1e-8 && solved >= 500,
          fmt("100 configs, %zu positive-definite queries, %zu singular, max abs error %.3g", solved,
              singular, worst)};
}

Verdict nadaraya_watson() {
  Rng rng = make_rng(2);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0;
  std::size_t compared = 0, empty_agree = 0, mismatched = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const int d = 1 + inst % 3;
    const std::size_t n = 10 + static_cast<std::size_t>(unif(rng) * 300);
    const double h = 0.05 + 0.5 * unif(rng);
    const auto kind = inst % 2 ? KernelKind::SmoothBump : KernelKind::UniformBall;
    const Sample s = uniform_sample(d, n, rng);
    const LPConfig cfg(0, h, KernelSpec(kind, d, 1.0), log_guard(1.0));
    std::vector<double> x(d);
    for (auto& xi : x) xi = unif(rng);
    double num = 0, den = 0;
    std::vector<double> u(d);
    for (std::size_t i = 0; i < n; ++i) {
      for (int k = 0; k < d; ++k) u[k] = (s.x(i)[k] - x[k]) / h;
      const double w = cfg.kernel(u);
      num += w * s.y(i);
      den += w;
    }
    const auto fit = lp_solve(build_design(s, x, cfg));
    if (den > 0 && fit) {
      ++compared;
      worst = std::max(worst, std::abs(*fit - num / den));
    } else if (den == 0 && !fit) {
      ++empty_agree;
    } else {
      ++mismatched;
    }
  }
  return {worst <= 1e-12 && mismatched == 0 && compared >= 90,
          fmt("%zu compared, %zu empty windows agree, %zu mismatched, max abs diff %.3g", compared,
              empty_agree, mismatched, worst)};
}

Verdict margin_closed_forms() {
  bool ok = true;
  std::ostringstream os;
  for (const char* name : {"margin_hypercube.json", "margin_ball.json", "margin_corridor.json"}) {
    const auto cfg = config(name);
    const auto out = run_experiment(cfg);
    const std::size_t ts = out.summary.at("table").size();
    const std::size_t samples = out.summary.at("samples").get<std::size_t>();
    ok = ok && out.pass && samples >= 100000 && ts >= 5;
    os << cfg.distribution.at("kind").get<std::string>() << (out.pass ? " ok" : " FAILED") << " ("
       << ts << " t values); ";
    if (out.summary.contains("step")) {
      const auto& dj = cfg.distribution;
      const double want = dj.at("C_phi").get<double>() /
                          (2.0 * std::pow(dj.at("q").get<double>(), dj.at("beta").get<double>()));
      const double got = out.summary["step"]["location"].get<double>();
      const bool exact = got == want && out.summary["step"]["zero_just_below"].get<bool>() &&
                         out.summary["step"]["positive_at_step"].get<bool>();
      ok = ok && exact;
      os << fmt("step at %.17g (want %.17g)%s; ", got, want, exact ? "" : " MISMATCH");
    }
  }
  return {ok, os.str()};
}

Verdict rate_recovery() {
  const auto cfg = config("rates_ball.json");
  const auto out = run_experiment(cfg);
  const auto& s = out.summary;
  if (s.at("slope").is_null()) return {false, "slope undefined"};
  const double slope = s["slope"].get<double>();
  const bool in_band = slope >= -0.85 && slope <= -0.45;
  return {in_band && out.pass && cfg.replicates >= 50,
          fmt("slope %.4f (se %.4f), theoretical %.4f, band [-0.85,-0.45], summary pass=%s", slope,
              s.at("slope_se").get<double>(), s.at("theoretical").get<double>(),
              out.pass ? "true" : "false")};
}

Verdict sieve_vs_plugin() {
  const auto out = run_experiment(config("sieve_vs_plugin_wave.json"));
  const auto& m = out.summary.at("measured");
  const auto& t = out.summary.at("theoretical");
  if (m.at("plugin").is_null() || m.at("sieve").is_null()) return {false, "slope undefined"};
  const double ps = m["plugin"].get<double>(), ss = m["sieve"].get<double>();
  const double pt = t.at("plugin").get<double>(), st = t.at("sieve").get<double>();
  const bool exps = std::abs(pt - 2.0 / 3.0) <= 1e-12 && std::abs(st - 0.5) <= 1e-12;
  const bool ok = ps < 0 && ss < 0 && ps <= ss + 0.1 && exps && out.pass &&
                  out.summary.at("samples_shared").get<bool>();
  return {ok, fmt("plugin slope %.4f, sieve slope %.4f, theoretical exponents %.6g and %.6g", ps,
                  ss, pt, st)};
}

Verdict corridor() {
  const auto cfg = config("corridor.json");
  const auto out = run_experiment(cfg);
  const auto& s = out.summary;
  const double last = s.at("measured").get<double>();
  const bool monotone = s.at("non_increasing").get<bool>();
  const bool at_4096 = cfg.n_grid.back() == 4096 && last <= 1e-3;

  const auto van = run_experiment(config("corridor_vanished.json"));
  const auto& rf = van.summary.at("rate_fit");
  const std::string status = rf.value("status", std::string("<fitted>"));
  const bool vanished = status == "rate undefined; excess vanished";
  return {monotone && at_4096 && out.pass && vanished,
          fmt("excess at n=4096 %.3g, non-increasing %s, all-zero series reports \"%s\"", last,
              monotone ? "yes" : "no", status.c_str())};
}

Verdict comparison_lemmas() {
  const auto out = run_experiment(config("compare_bounds.json"));
  const auto& m = out.summary.at("measured");
  const auto violations = m.at("violations").get<std::size_t>();
  const auto trials = out.summary.at("trials_per_distribution").get<std::size_t>();
  return {violations == 0 && trials >= 1000 && out.pass,
          fmt("%zu trials x %zu distributions, %zu violations, worst excess/bound %.3f", trials,
              out.summary.at("per_distribution").size(), violations,
              m.at("worst_excess_to_bound").get<double>())};
}

Verdict assouad() {
  const auto cfg = config("lower_bound.json");
  const auto out = run_experiment(cfg);
  const auto& s = out.summary;
  const double bound = s.at("assouad_bound").get<double>();
  bool ok = out.pass && !s.at("vacuous").get<bool>() && s.at("laws").get<int>() <= 16;
  std::ostringstream os;
  os << fmt("bound %.5f, reference classifier average %.5f; ", bound,
            s.at("average_excess").get<double>());

  // further fixed classifiers, exact over all 2^m laws
  const auto& dj = cfg.distribution;
  const int m = dj.at("m").get<int>();
  std::vector<HypercubeDistribution> laws;
  for (int code = 0; code < (1 << m); ++code) {
    std::vector<int> sigma(m);
    for (int j = 0; j < m; ++j) sigma[j] = (code >> j) & 1 ? -1 : 1;
    laws.push_back(make_hypercube(dj, sigma));
  }
  const std::vector<std::pair<std::string, Classifier>> rules{
      {"zero", [](auto) { return 0; }},
      {"one", [](auto) { return 1; }},
      {"half-plane", [](auto x) { return x[0] + 0.7 * x[1] < 0.45 ? 1 : 0; }},
      {"checker", [](auto x) { return (static_cast<int>(8 * x[0]) + static_cast<int>(8 * x[1])) % 2; }},
      {"last-law bayes", [&](auto x) { return laws.back().bayes_label(x); }}};
  for (const auto& [name, f] : rules) {
    double avg = 0;
    for (const auto& law : laws) avg += excess_risk_quadrature(law, f, 400).value;
    avg /= static_cast<double>(laws.size());
    ok = ok && avg >= bound;
    os << fmt("%s %.5f; ", name.c_str(), avg);
  }
  const double ref = assouad_bound(4, 0.1, 25, 0.2, 0.2);
  ok = ok && std::abs(ref - 0.02735) <= 1e-5;
  os << fmt("bound(4,0.1,25,0.2,0.2) = %.6f", ref);
  return {ok, os.str()};
}

Verdict concentration() {
  const auto cfg = config("concentration.json");
  const auto out = run_experiment(cfg);
  const auto& s = out.summary;
  if (s.at("measured").is_null()) return {false, "spearman undefined"};
  const double rho = s["measured"].get<double>();
  const std::size_t cells = s.at("grid").size();
  return {rho <= -0.9 && cells >= 6 && cfg.replicates >= 500 && out.pass,
          fmt("spearman %.4f over %zu grid points (%zu nonzero), R=%zu", rho, cells,
              s.at("nonzero_cells").get<std::size_t>(), cfg.replicates)};
}

Verdict sieve_exhaustive() {
  Rng rng = make_rng(10);
  std::size_t checked = 0, mismatched = 0, skipped = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto inst = oracle::random_instance(rng, trial);
    if (inst.net.cell_count() > 10) continue;
    const auto best = oracle::exhaustive_argmin(inst.sample, inst.net, 2e7);
    if (!best) {
      ++skipped;
      continue;
    }
    ++checked;
    const auto fit = sieve_fit(inst.sample, inst.net);
    const double risk =
        empirical_risk([&](std::span<const double> x) { return fit.classify(x); }, inst.sample);
    if (risk != best->risk || fit.values() != best->values) ++mismatched;
  }
  return {mismatched == 0 && skipped == 0 && checked > 0,
          fmt("%zu instances, %zu mismatched, %zu not enumerated", checked, mismatched, skipped)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Verdict cli_determinism() {
  const fs::path base = fs::temp_directory_path() / ("fastrate_acceptance_" + std::to_string(getpid()));
  fs::remove_all(base);
  bool ok = true;
  std::ostringstream os;
  const std::vector<std::string> subs{"rates",         "sieve-vs-plugin", "corridor",
                                      "concentration", "margin-check",    "lower-bound",
                                      "compare-bounds"};
  for (const auto& sub : subs) {
    const std::string cfg = std::string(FASTRATE_CONFIG_DIR) + "/smoke/" + sub + ".json";
    std::string csv[2], sum[2];
    bool ran = true;
    for (int run = 0; run < 2; ++run) {
      const fs::path dir = base / (sub + std::to_string(run));
      fs::create_directories(dir);
      const std::string cmd = std::string("\"") + FASTRATE_CLI + "\" " + sub + " --config \"" + cfg +
                              "\" --out \"" + dir.string() + "\" > /dev/null";
      const int rc = std::system(cmd.c_str());
      const int code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
      if (code != 0 && code != 3) ran = false;
      csv[run] = slurp(dir / (sub + ".csv"));
      sum[run] = slurp(dir / (sub + "_summary.json"));
    }
    const bool same = ran && !csv[0].empty() && csv[0] == csv[1] && sum[0] == sum[1];
    ok = ok && same;
    os << sub << (same ? " identical" : " DIFFERS") << "; ";
  }
  fs::remove_all(base);
  return {ok, os.str()};
}

struct Criterion {
  int id;
  const char* name;
  double time_limit_s;  // 0 = none
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "polynomial reproduction", 10, polynomial_reproduction},
      {2, "order zero equals Nadaraya-Watson", 0, nadaraya_watson},
      {3, "margin closed forms", 30, margin_closed_forms},
      {4, "rate recovery on the ball example", 600, rate_recovery},
      {5, "sieve versus plug-in", 0, sieve_vs_plugin},
      {6, "corridor exponential regime", 0, corridor},
      {7, "comparison bounds", 0, comparison_lemmas},
      {8, "hypercube lower bound", 0, assouad},
      {9, "pointwise concentration", 300, concentration},
      {10, "sieve ERM equals exhaustive argmin", 0, sieve_exhaustive},
      {11, "CLI determinism", 0, cli_determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit_s > 0 && secs > c.time_limit_s) {
      v.pass = false;
      v.detail += fmt(" [over time limit %.0f s]", c.time_limit_s);
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << v.detail
              << fmt(" (%.1f s)", secs) << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
