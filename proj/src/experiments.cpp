#include "fastrate/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "fastrate/risk_eval.hpp"
#include "fastrate/sieve_classifier.hpp"

namespace fastrate {

using nlohmann::json;

namespace {

constexpr std::uint64_t kHolderStream = 0x486f6c64;
constexpr std::uint64_t kMarginStream = 0x4d617267;
constexpr std::uint64_t kOracleStream = 0x4f72636c;

struct Timer {
  bool on;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::optional<double> elapsed() const {
    if (!on) return std::nullopt;
    const auto d = std::chrono::steady_clock::now() - start;
    return std::chrono::duration<double, std::milli>(d).count();
  }
};

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// Holder and margin invariants checked before any rates-type run.
void check_distribution(const SyntheticDistribution& dist, const ExperimentConfig& cfg) {
  Rng rng = make_rng(derive_seed(cfg.seed, {kHolderStream}));
  const auto report = validate_holder(dist, dist.holder(), cfg.holder_trials, rng);
  if (!report.pass) {
    throw ConfigError("distribution fails the Holder check (worst ratio " +
                      std::to_string(report.worst_ratio) + ")");
  }
  for (int k = 0; k <= 40; ++k) {
    const double t = std::pow(10.0, -4.0 + 0.1 * k);
    const double envelope = dist.c0() * std::pow(t, dist.alpha());
    if (dist.margin_mass(t) > envelope * (1.0 + 1e-9) + 1e-15) {
      throw ConfigError("distribution violates its declared margin envelope at t=" +
                        std::to_string(t));
    }
  }
}

double rho_of(const SyntheticDistribution& dist) {
  return static_cast<double>(dist.dim()) / dist.holder().beta;
}

void require_sieve_class(const SyntheticDistribution& dist) {
  if (dist.holder().beta > 1.0) {
    throw ConfigError("unsupported class: sieve arm needs beta <= 1 (got beta=" +
                      std::to_string(dist.holder().beta) + ")");
  }
}

Classifier fit_plugin(const ExperimentConfig& cfg, const SyntheticDistribution& dist,
                      std::shared_ptr<const Sample> sample) {
  auto est = std::make_shared<LocalPolynomialEstimator>(
      sample, cfg.estimator.lp_config(sample->size(), dist));
  return [est](std::span<const double> x) { return est->classify(x); };
}

Classifier fit_sieve(const ExperimentConfig& cfg, const SyntheticDistribution& dist,
                     const Sample& sample) {
  const double eps = epsilon_schedule(sample.size(), dist.alpha(), rho_of(dist), cfg.estimator.p,
                                      cfg.estimator.epsilon_multiplier);
  auto fit = std::make_shared<SieveClassifier>(sieve_fit(sample, NetSpec(dist.holder(), eps)));
  return [fit](std::span<const double> x) { return fit->classify(x); };
}

json series_json(const std::vector<RatePoint>& pts) {
  json out = json::array();
  for (const auto& p : pts) {
    out.push_back({{"n", p.n}, {"mean_excess", p.excess.value}, {"se", p.excess.se}});
  }
  return out;
}

PlotSeries plot_of(const std::string& label, const std::vector<RatePoint>& pts) {
  PlotSeries s{label, {}, {}};
  for (const auto& p : pts) {
    s.x.push_back(p.n);
    s.y.push_back(p.excess.value);
  }
  return s;
}

struct FitSummary {
  json j;
  std::optional<RateFitResult> fit;
};

FitSummary try_rate_fit(const std::vector<RatePoint>& pts, double exponent) {
  FitSummary out;
  try {
    out.fit = rate_fit(pts, exponent);
    out.j = {{"slope", out.fit->slope},
             {"slope_se", out.fit->slope_se},
             {"intercept", out.fit->intercept},
             {"points_used", out.fit->points_used}};
  } catch (const RateUndefinedError& e) {
    out.j = {{"slope", nullptr}, {"status", e.what()}};
  } catch (const ValidationError& e) {
    out.j = {{"slope", nullptr}, {"status", e.what()}};
  }
  return out;
}

void aggregate(std::vector<RatePoint>& points, const std::vector<std::size_t>& n_grid,
               const std::vector<double>& excess, std::size_t reps, std::size_t budget) {
  points.clear();
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    std::vector<double> v(excess.begin() + static_cast<std::ptrdiff_t>(i * reps),
                          excess.begin() + static_cast<std::ptrdiff_t>((i + 1) * reps));
    points.push_back(RatePoint{static_cast<double>(n_grid[i]),
                               RiskEstimate{mean_of(v), se_of(v), RiskMethod::MonteCarlo, budget}});
  }
}

}  // namespace

ExperimentOutcome run_rates(const ExperimentConfig& cfg) {
  const auto dist = make_distribution(cfg.distribution);
  check_distribution(*dist, cfg);
  const bool sieve = cfg.estimator.kind == "sieve";
  if (sieve) require_sieve_class(*dist);
  const auto ex = theoretical_exponents(dist->alpha(), dist->holder().beta, dist->dim(),
                                        rho_of(*dist), cfg.estimator.p);
  const double exponent = sieve ? ex.sieve_lp : ex.plugin_strong;

  const std::size_t reps = cfg.replicates;
  const std::size_t tasks = cfg.n_grid.size() * reps;
  std::vector<ResultRow> rows(tasks);
  std::vector<double> excess(tasks);
  parallel_for(tasks, cfg.workers, [&](std::size_t t) {
    const std::size_t i = t / reps;
    const std::size_t r = t % reps;
    const std::size_t n = cfg.n_grid[i];
    const std::uint64_t seed = derive_seed(cfg.seed, {i, r});
    Timer timer{cfg.record_timing};
    Rng rng = make_rng(seed);
    auto sample = std::make_shared<const Sample>(dist->sample(n, rng));
    const Classifier f = sieve ? fit_sieve(cfg, *dist, *sample) : fit_plugin(cfg, *dist, sample);
    const auto risk = excess_risk_mc(*dist, f, cfg.mc_budget, rng);
    excess[t] = risk.value;
    rows[t] = ResultRow{"rates", n, r, seed, risk.value, risk.se, timer.elapsed()};
  });

  ExperimentOutcome out;
  out.rows = std::move(rows);
  std::vector<RatePoint> points;
  aggregate(points, cfg.n_grid, excess, reps, cfg.mc_budget);
  const auto fs = try_rate_fit(points, exponent);
  const double theoretical_slope = -exponent;
  out.pass = fs.fit && std::abs(fs.fit->slope - theoretical_slope) <= cfg.tolerance.slope;
  out.summary = {{"experiment", "rates"},
                 {"estimator", cfg.estimator.kind},
                 {"distribution", cfg.distribution},
                 {"theoretical", theoretical_slope},
                 {"theoretical_exponent", exponent},
                 {"measured", fs.fit ? json(fs.fit->slope) : json(nullptr)},
                 {"slope", fs.j.value("slope", json(nullptr))},
                 {"slope_se", fs.fit ? json(fs.fit->slope_se) : json(nullptr)},
                 {"fit", fs.j},
                 {"fast_rate", ex.fast},
                 {"superfast_rate", ex.superfast},
                 {"series", series_json(points)},
                 {"tolerance", cfg.tolerance.slope},
                 {"pass", out.pass}};
  out.plot.push_back(plot_of(cfg.estimator.kind, points));
  return out;
}

ExperimentOutcome run_sieve_vs_plugin(const ExperimentConfig& cfg) {
  const auto dist = make_distribution(cfg.distribution);
  require_sieve_class(*dist);
  check_distribution(*dist, cfg);
  const auto ex = theoretical_exponents(dist->alpha(), dist->holder().beta, dist->dim(),
                                        rho_of(*dist), cfg.estimator.p);

  const std::size_t reps = cfg.replicates;
  const std::size_t tasks = cfg.n_grid.size() * reps;
  std::vector<ResultRow> plug_rows(tasks), sieve_rows(tasks);
  std::vector<double> plug_excess(tasks), sieve_excess(tasks);
  std::vector<std::uint64_t> plug_hash(tasks), sieve_hash(tasks);
  parallel_for(tasks, cfg.workers, [&](std::size_t t) {
    const std::size_t i = t / reps;
    const std::size_t r = t % reps;
    const std::size_t n = cfg.n_grid[i];
    const std::uint64_t seed = derive_seed(cfg.seed, {i, r});
    const std::uint64_t mc_seed = derive_seed(cfg.seed, {i, r, 1});
    Rng rng = make_rng(seed);
    auto sample = std::make_shared<const Sample>(dist->sample(n, rng));
    {
      Timer timer{cfg.record_timing};
      plug_hash[t] = sample->fingerprint();
      const Classifier f = fit_plugin(cfg, *dist, sample);
      Rng mc = make_rng(mc_seed);
      const auto risk = excess_risk_mc(*dist, f, cfg.mc_budget, mc);
      plug_excess[t] = risk.value;
      plug_rows[t] = ResultRow{"sieve-vs-plugin:plugin", n, r, seed, risk.value, risk.se,
                               timer.elapsed()};
    }
    {
      Timer timer{cfg.record_timing};
      sieve_hash[t] = sample->fingerprint();
      const Classifier f = fit_sieve(cfg, *dist, *sample);
      Rng mc = make_rng(mc_seed);
      const auto risk = excess_risk_mc(*dist, f, cfg.mc_budget, mc);
      sieve_excess[t] = risk.value;
      sieve_rows[t] = ResultRow{"sieve-vs-plugin:sieve", n, r, seed, risk.value, risk.se,
                                timer.elapsed()};
    }
  });

  ExperimentOutcome out;
  for (std::size_t t = 0; t < tasks; ++t) {
    out.rows.push_back(plug_rows[t]);
    out.rows.push_back(sieve_rows[t]);
  }
  std::vector<RatePoint> plug_pts, sieve_pts;
  aggregate(plug_pts, cfg.n_grid, plug_excess, reps, cfg.mc_budget);
  aggregate(sieve_pts, cfg.n_grid, sieve_excess, reps, cfg.mc_budget);
  const auto pf = try_rate_fit(plug_pts, ex.plugin_strong);
  const auto sf = try_rate_fit(sieve_pts, ex.sieve_lp);
  const bool hashes_match = plug_hash == sieve_hash;
  out.pass = pf.fit && sf.fit && hashes_match && pf.fit->slope < 0 && sf.fit->slope < 0 &&
             pf.fit->slope <= sf.fit->slope + cfg.tolerance.plugin_margin;
  out.summary = {
      {"experiment", "sieve-vs-plugin"},
      {"distribution", cfg.distribution},
      {"theoretical", {{"plugin", ex.plugin_strong}, {"sieve", ex.sieve_lp}}},
      {"measured",
       {{"plugin", pf.j.value("slope", json(nullptr))}, {"sieve", sf.j.value("slope", json(nullptr))}}},
      {"plugin", {{"fit", pf.j}, {"series", series_json(plug_pts)}}},
      {"sieve", {{"fit", sf.j}, {"series", series_json(sieve_pts)}}},
      {"first_sample_hash", {{"plugin", plug_hash.front()}, {"sieve", sieve_hash.front()}}},
      {"samples_shared", hashes_match},
      {"tolerance", cfg.tolerance.plugin_margin},
      {"pass", out.pass}};
  out.plot.push_back(plot_of("plugin", plug_pts));
  out.plot.push_back(plot_of("sieve", sieve_pts));
  return out;
}

ExperimentOutcome run_corridor(const ExperimentConfig& cfg) {
  const auto dist_ptr = make_distribution(cfg.distribution);
  const auto* dist = dynamic_cast<const CorridorDistribution*>(dist_ptr.get());
  if (dist == nullptr) throw ConfigError("corridor experiment needs a corridor distribution");
  if (cfg.estimator.bandwidth_rule != BandwidthRule::Fixed) {
    throw ConfigError("corridor experiment needs a fixed bandwidth (number), not \"rate\"");
  }
  if (cfg.estimator.kind != "plugin") throw ConfigError("corridor experiment uses the plug-in arm");

  const std::size_t reps = cfg.replicates;
  const std::size_t tasks = cfg.n_grid.size() * reps;
  std::vector<ResultRow> rows(tasks);
  std::vector<double> excess(tasks), bound(tasks);
  parallel_for(tasks, cfg.workers, [&](std::size_t t) {
    const std::size_t i = t / reps;
    const std::size_t r = t % reps;
    const std::size_t n = cfg.n_grid[i];
    const std::uint64_t seed = derive_seed(cfg.seed, {i, r});
    Timer timer{cfg.record_timing};
    Rng rng = make_rng(seed);
    auto sample = std::make_shared<const Sample>(dist->sample(n, rng));
    auto est = std::make_shared<LocalPolynomialEstimator>(sample,
                                                          cfg.estimator.lp_config(n, *dist));
    const RegressionFn eta_hat = [est](std::span<const double> x) { return est->eta_star(x); };
    const auto le = excess_via_deviation(*dist, eta_hat, cfg.mc_budget, rng);
    excess[t] = le.excess.value;
    bound[t] = le.bound.value;
    rows[t] = ResultRow{"corridor", n, r, seed, le.excess.value, le.excess.se, timer.elapsed()};
  });

  ExperimentOutcome out;
  out.rows = std::move(rows);
  std::vector<RatePoint> pts, bound_pts;
  aggregate(pts, cfg.n_grid, excess, reps, cfg.mc_budget);
  aggregate(bound_pts, cfg.n_grid, bound, reps, cfg.mc_budget);

  bool monotone = true;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double slack =
        cfg.tolerance.sigma * std::hypot(pts[i - 1].excess.se, pts[i].excess.se);
    if (pts[i].excess.value > pts[i - 1].excess.value + slack) monotone = false;
  }
  const double last = pts.back().excess.value;
  const auto fs = try_rate_fit(pts, 0.0);

  Rng oracle_rng = make_rng(derive_seed(cfg.seed, {kOracleStream}));
  const Classifier oracle = [dist](std::span<const double> x) { return dist->bayes_label(x); };
  const auto oracle_risk = excess_risk_mc(*dist, oracle, cfg.mc_budget, oracle_rng);

  out.pass = monotone && last <= cfg.tolerance.excess;
  out.summary = {{"experiment", "corridor"},
                 {"distribution", cfg.distribution},
                 {"bandwidth", cfg.estimator.bandwidth},
                 {"t0", dist->t0()},
                 {"theoretical", "exponential decay"},
                 {"measured", last},
                 {"largest_n", cfg.n_grid.back()},
                 {"non_increasing", monotone},
                 {"rate_fit", fs.j},
                 {"series", series_json(pts)},
                 {"deviation_bound_series", series_json(bound_pts)},
                 {"oracle_excess", oracle_risk.value},
                 {"tolerance", {{"excess", cfg.tolerance.excess}, {"sigma", cfg.tolerance.sigma}}},
                 {"pass", out.pass}};
  out.plot.push_back(plot_of("plugin", pts));
  out.plot.push_back(plot_of("P(|eta_hat - eta| > t0)", bound_pts));
  return out;
}

ExperimentOutcome run_concentration(const ExperimentConfig& cfg) {
  const auto dist = make_distribution(cfg.distribution);
  const json opts = cfg.options.value("concentration", json::object());
  if (cfg.replicates < 100) throw ConfigError("concentration needs replicates >= 100");

  std::vector<double> x;
  if (opts.contains("x")) {
    x = opts.at("x").get<std::vector<double>>();
  } else {
    const Box box = dist->support_box();
    for (int k = 0; k < dist->dim(); ++k) x.push_back(box.lo[k] + 0.3 * (box.hi[k] - box.lo[k]));
  }
  if (static_cast<int>(x.size()) != dist->dim()) throw ConfigError("concentration.x dimension");
  if (!(dist->density(x) > 0.0)) throw ConfigError("concentration.x must lie in the support");

  std::vector<ProbeGridPoint> grid;
  if (opts.contains("grid")) {
    for (const auto& g : opts.at("grid")) {
      grid.push_back({g.at("n").get<std::size_t>(), g.at("h").get<double>(),
                      g.at("delta").get<double>()});
    }
  } else {
    const double h = cfg.estimator.bandwidth_rule == BandwidthRule::Fixed ? cfg.estimator.bandwidth
                                                                          : 0.1;
    const double delta = opts.value("delta", 0.1);
    for (auto n : cfg.n_grid) grid.push_back({n, h, delta});
  }
  if (grid.size() < 3) throw ConfigError("concentration needs at least 3 grid points");

  ProbeOptions po;
  po.order = cfg.estimator.order_for(*dist);
  po.kernel = KernelSpec(cfg.estimator.kernel, dist->dim(), cfg.estimator.kernel_radius);
  po.guard_scale = cfg.estimator.guard_scale;
  po.seed = cfg.seed;
  po.workers = cfg.workers;
  ConcentrationProbe probe;
  try {
    probe = concentration_probe(*dist, x, grid, cfg.replicates, po);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }

  ExperimentOutcome out;
  std::vector<double> logp, scaling;
  json table = json::array();
  for (std::size_t i = 0; i < probe.rows.size(); ++i) {
    const auto& row = probe.rows[i];
    const double p = row.probability;
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(cfg.replicates));
    out.rows.push_back(ResultRow{"concentration", row.point.n, i, derive_seed(cfg.seed, {i}), p, se,
                                 std::nullopt});
    table.push_back({{"n", row.point.n},
                     {"h", row.point.h},
                     {"delta", row.point.delta},
                     {"scaling", row.scaling},
                     {"exceed", row.exceed},
                     {"probability", p}});
    if (row.exceed > 0) {
      logp.push_back(std::log(p));
      scaling.push_back(row.scaling);
    }
  }
  std::optional<double> rho;
  if (logp.size() >= 3) rho = spearman(logp, scaling);
  out.pass = rho && *rho <= cfg.tolerance.spearman;
  out.summary = {{"experiment", "concentration"},
                 {"distribution", cfg.distribution},
                 {"x", x},
                 {"replicates", cfg.replicates},
                 {"theoretical", "exceedance decreasing in n h^d delta^2"},
                 {"measured", rho ? json(*rho) : json(nullptr)},
                 {"nonzero_cells", logp.size()},
                 {"grid", table},
                 {"tolerance", cfg.tolerance.spearman},
                 {"pass", out.pass}};
  PlotSeries s{"exceedance", {}, {}};
  for (const auto& row : probe.rows) {
    if (row.exceed > 0 && row.scaling > 0) {
      s.x.push_back(row.scaling);
      s.y.push_back(row.probability);
    }
  }
  out.plot.push_back(s);
  return out;
}

ExperimentOutcome run_margin_check(const ExperimentConfig& cfg) {
  const auto dist = make_distribution(cfg.distribution);
  const json opts = cfg.options.value("margin", json::object());
  const std::size_t samples = opts.value("samples", std::size_t{100000});
  std::vector<double> ts;
  if (opts.contains("t_grid")) {
    ts = opts.at("t_grid").get<std::vector<double>>();
  } else {
    ts = {0.01, 0.03, 0.1, 0.2, 0.4};
  }
  const auto* cube = dynamic_cast<const HypercubeDistribution*>(dist.get());
  std::size_t step_at = 0;
  if (cube != nullptr) {
    step_at = ts.size();
    ts.push_back(std::nextafter(cube->margin_step(), 0.0));
    ts.push_back(cube->margin_step());
  }
  for (double t : ts) {
    if (!(t > 0)) throw ConfigError("margin t values must be > 0");
  }

  const std::uint64_t seed = derive_seed(cfg.seed, {kMarginStream});
  Rng rng = make_rng(seed);
  const auto emp = empirical_margin_mass(*dist, ts, samples, rng);

  ExperimentOutcome out;
  out.pass = true;
  json table = json::array();
  std::vector<double> closed_all;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double closed = dist->margin_mass(ts[i]);
    const double se = std::sqrt(closed * (1.0 - closed) / static_cast<double>(samples));
    const double envelope = dist->c0() * std::pow(ts[i], dist->alpha());
    const bool within = std::abs(emp[i] - closed) <= cfg.tolerance.sigma * se;
    const bool under = closed <= envelope * (1.0 + 1e-12) &&
                       emp[i] <= envelope + cfg.tolerance.sigma * se + 1e-15;
    out.pass = out.pass && within && under;
    closed_all.push_back(closed);
    out.rows.push_back(ResultRow{"margin-check", samples, i, seed, emp[i], se, std::nullopt});
    table.push_back({{"t", ts[i]},
                     {"empirical", emp[i]},
                     {"closed_form", closed},
                     {"se", se},
                     {"envelope", envelope},
                     {"within_se", within},
                     {"under_envelope", under}});
  }
  out.summary = {{"experiment", "margin-check"},
                 {"distribution", cfg.distribution},
                 {"alpha", dist->alpha()},
                 {"C0", dist->c0()},
                 {"samples", samples},
                 {"theoretical", closed_all},
                 {"measured", emp},
                 {"table", table},
                 {"tolerance", cfg.tolerance.sigma}};
  if (cube != nullptr) {
    const bool below_zero = emp[step_at] == 0.0 && closed_all[step_at] == 0.0;
    const bool at_full = closed_all[step_at + 1] > 0.0;
    out.summary["step"] = {{"location", cube->margin_step()},
                           {"zero_just_below", below_zero},
                           {"positive_at_step", at_full}};
    out.pass = out.pass && below_zero && at_full;
  }
  out.summary["pass"] = out.pass;
  PlotSeries s{"empirical", {}, {}}, c{"closed form", {}, {}};
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (emp[i] > 0) {
      s.x.push_back(ts[i]);
      s.y.push_back(emp[i]);
    }
    if (closed_all[i] > 0) {
      c.x.push_back(ts[i]);
      c.y.push_back(closed_all[i]);
    }
  }
  out.plot = {s, c};
  return out;
}

ExperimentOutcome run_lower_bound(const ExperimentConfig& cfg) {
  if (cfg.distribution.value("kind", std::string()) != "hypercube") {
    throw ConfigError("lower-bound needs a hypercube distribution");
  }
  const json opts = cfg.options.value("lower_bound", json::object());
  const auto base = make_hypercube(cfg.distribution, std::nullopt);
  check_distribution(base, cfg);
  const int m = base.params().m;
  if (m > 4) throw ConfigError("lower-bound enumerates 2^m laws; needs m <= 4");
  const std::string which = opts.value("classifier", std::string("fixed"));
  if (which != "fixed" && which != "plugin") {
    throw ConfigError("lower_bound.classifier must be \"fixed\" or \"plugin\"");
  }
  const std::size_t n = opts.value("n", cfg.n_grid.front());
  const std::size_t nodes = opts.value("nodes_per_ball", std::size_t{400});
  const double b = base.bump_height();
  const double w = base.params().w;
  const double bound = assouad_bound(m, w, static_cast<double>(n), b, b);
  const bool vacuous = b * std::sqrt(static_cast<double>(n) * w) >= 1.0;

  const std::size_t laws = std::size_t{1} << m;
  const std::size_t reps = which == "fixed" ? 1 : cfg.replicates;
  std::vector<int> plus(static_cast<std::size_t>(m), 1);
  const auto reference = make_hypercube(cfg.distribution, plus);
  const Classifier fixed = [&reference](std::span<const double> x) {
    return reference.bayes_label(x);
  };

  // values[r * laws + s]: excess of replicate r on law s.
  std::vector<double> values(laws * reps);
  std::vector<std::uint64_t> seeds(laws * reps);
  parallel_for(laws * reps, cfg.workers, [&](std::size_t t) {
    const std::size_t r = t / laws;
    const std::size_t s = t % laws;
    std::vector<int> sigma(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) sigma[static_cast<std::size_t>(j)] = (s >> j) & 1U ? -1 : 1;
    const auto law = make_hypercube(cfg.distribution, sigma);
    const std::uint64_t seed = derive_seed(cfg.seed, {s, r});
    seeds[t] = seed;
    if (which == "fixed") {
      values[t] = excess_risk_quadrature(law, fixed, nodes).value;
    } else {
      Rng rng = make_rng(seed);
      auto sample = std::make_shared<const Sample>(law.sample(n, rng));
      const Classifier f = fit_plugin(cfg, law, sample);
      values[t] = excess_risk_quadrature(law, f, nodes).value;
    }
  });

  ExperimentOutcome out;
  std::vector<double> per_rep(reps, 0.0);
  for (std::size_t r = 0; r < reps; ++r) {
    for (std::size_t s = 0; s < laws; ++s) per_rep[r] += values[r * laws + s];
    per_rep[r] /= static_cast<double>(laws);
  }
  for (std::size_t s = 0; s < laws; ++s) {
    std::vector<double> v;
    for (std::size_t r = 0; r < reps; ++r) v.push_back(values[r * laws + s]);
    out.rows.push_back(
        ResultRow{"lower-bound", n, s, seeds[s], mean_of(v), se_of(v), std::nullopt});
  }
  const double average = mean_of(per_rep);
  const double se = se_of(per_rep);
  out.pass = average >= bound - cfg.tolerance.sigma * se;
  out.summary = {{"experiment", "lower-bound"},
                 {"distribution", cfg.distribution},
                 {"classifier", which},
                 {"n", n},
                 {"laws", laws},
                 {"b", b},
                 {"w", w},
                 {"theoretical", bound},
                 {"assouad_bound", bound},
                 {"measured", average},
                 {"average_excess", average},
                 {"se", se},
                 {"vacuous", vacuous},
                 {"tolerance", cfg.tolerance.sigma},
                 {"pass", out.pass}};
  return out;
}

namespace {

// Random piecewise-constant estimate of eta on a grid over the support box.
struct RandomEtaBar {
  Box box;
  int per_axis = 1;
  int dim = 1;
  std::vector<double> values;

  std::size_t cell(std::span<const double> x) const {
    std::size_t idx = 0, stride = 1;
    for (int k = 0; k < dim; ++k) {
      const double u = (x[k] - box.lo[k]) / (box.hi[k] - box.lo[k]);
      int c = static_cast<int>(std::floor(u * per_axis));
      c = std::clamp(c, 0, per_axis - 1);
      idx += static_cast<std::size_t>(c) * stride;
      stride *= static_cast<std::size_t>(per_axis);
    }
    return idx;
  }
};

}  // namespace

ExperimentOutcome run_compare_bounds(const ExperimentConfig& cfg) {
  const json opts = cfg.options.value("compare", json::object());
  const std::size_t trials = opts.value("trials", std::size_t{1000});
  std::vector<json> descriptors;
  if (opts.contains("distributions")) {
    for (const auto& d : opts.at("distributions")) descriptors.push_back(d);
  } else {
    descriptors.push_back(cfg.distribution);
  }
  std::vector<DistributionPtr> dists;
  for (const auto& d : descriptors) dists.push_back(make_distribution(d));
  const std::vector<double> ps = {1.0, 2.0};

  struct TrialResult {
    double excess = 0, se = 0, sup = 0;
    double bound_sup = 0;
    std::vector<double> bound_lp;
    std::vector<bool> violated;  // sup, then each p
    std::uint64_t seed = 0;
  };
  const std::size_t total = dists.size() * trials;
  std::vector<TrialResult> results(total);
  parallel_for(total, cfg.workers, [&](std::size_t t) {
    const std::size_t di = t / trials;
    const std::size_t k = t % trials;
    const auto& dist = *dists[di];
    TrialResult& res = results[t];
    res.seed = derive_seed(cfg.seed, {di, k});
    Rng rng = make_rng(res.seed);
    std::uniform_int_distribution<int> axis(1, dist.dim() == 1 ? 16 : 8);
    std::uniform_int_distribution<int> kind(0, 2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    RandomEtaBar bar;
    bar.box = dist.support_box();
    bar.dim = dist.dim();
    bar.per_axis = axis(rng);
    std::size_t cells = 1;
    for (int j = 0; j < bar.dim; ++j) cells *= static_cast<std::size_t>(bar.per_axis);
    const int mode = kind(rng);
    const double scale = std::exp(std::log(1e-3) + unit(rng) * (std::log(0.3) - std::log(1e-3)));
    bar.values.resize(cells);
    std::vector<double> center(static_cast<std::size_t>(bar.dim));
    for (std::size_t c = 0; c < cells; ++c) {
      std::size_t rem = c;
      for (int j = 0; j < bar.dim; ++j) {
        const std::size_t cj = rem % static_cast<std::size_t>(bar.per_axis);
        rem /= static_cast<std::size_t>(bar.per_axis);
        center[static_cast<std::size_t>(j)] =
            bar.box.lo[j] + (static_cast<double>(cj) + 0.5) / bar.per_axis *
                                (bar.box.hi[j] - bar.box.lo[j]);
      }
      if (mode == 2) {
        bar.values[c] = unit(rng);
      } else {
        bar.values[c] = gauss(rng) * scale;
        if (mode == 0) bar.values[c] = std::clamp(dist.eta(center) + bar.values[c], 0.0, 1.0);
      }
    }
    // mode 1: eta plus a per-cell offset
    auto eta_bar = [&](std::span<const double> x, double eta) {
      const double v = bar.values[bar.cell(x)];
      return mode == 1 ? std::clamp(eta + v, 0.0, 1.0) : v;
    };

    const std::size_t B = cfg.mc_budget;
    std::vector<double> x(static_cast<std::size_t>(bar.dim));
    double sum = 0, sumsq = 0, sup = 0;
    std::vector<double> lp_sum(ps.size(), 0.0);
    for (std::size_t i = 0; i < B; ++i) {
      dist.draw_x(rng, x);
      const double eta = dist.eta(x);
      const double eb = eta_bar(x, eta);
      const double err = std::abs(eb - eta);
      sup = std::max(sup, err);
      for (std::size_t q = 0; q < ps.size(); ++q) lp_sum[q] += std::pow(err, ps[q]);
      const int f_bar = eb >= 0.5 ? 1 : 0;
      const int f_star = eta >= 0.5 ? 1 : 0;
      const double c = f_bar != f_star ? std::abs(2.0 * eta - 1.0) : 0.0;
      sum += c;
      sumsq += c * c;
    }
    const double bd = static_cast<double>(B);
    res.excess = sum / bd;
    res.se = std::sqrt(std::max(0.0, sumsq / bd - res.excess * res.excess) / (bd - 1.0));
    res.sup = sup;
    const double slack = cfg.tolerance.sigma * res.se;
    res.bound_sup = comparison_bound_linf(dist.alpha(), dist.c0(), sup);
    res.violated.push_back(res.excess > res.bound_sup + slack);
    for (std::size_t q = 0; q < ps.size(); ++q) {
      if (dist.alpha() > 0) {
        const double lp = std::pow(lp_sum[q] / bd, 1.0 / ps[q]);
        res.bound_lp.push_back(comparison_bound_lp(dist.alpha(), dist.c0(), ps[q], lp));
        res.violated.push_back(res.excess > res.bound_lp.back() + slack);
      }
    }
  });

  ExperimentOutcome out;
  std::size_t violations = 0;
  std::vector<std::size_t> per_dist(dists.size(), 0);
  double worst_ratio = 0.0;
  for (std::size_t t = 0; t < total; ++t) {
    const auto& r = results[t];
    const std::size_t di = t / trials;
    const std::size_t v = static_cast<std::size_t>(std::count(r.violated.begin(), r.violated.end(), true));
    violations += v;
    per_dist[di] += v;
    double tightest = r.bound_sup;
    for (double bl : r.bound_lp) tightest = std::min(tightest, bl);
    if (tightest > 0) worst_ratio = std::max(worst_ratio, r.excess / tightest);
    out.rows.push_back(ResultRow{"compare-bounds:" + dists[di]->kind(), cfg.mc_budget, t % trials,
                                 r.seed, r.excess, r.se, std::nullopt});
  }
  json per = json::array();
  for (std::size_t di = 0; di < dists.size(); ++di) {
    per.push_back({{"distribution", descriptors[di]}, {"violations", per_dist[di]}});
  }
  out.pass = violations == 0;
  out.summary = {{"experiment", "compare-bounds"},
                 {"trials_per_distribution", trials},
                 {"norms", {"inf", 1.0, 2.0}},
                 {"theoretical", "excess <= bound"},
                 {"measured", {{"violations", violations}, {"worst_excess_to_bound", worst_ratio}}},
                 {"per_distribution", per},
                 {"tolerance", cfg.tolerance.sigma},
                 {"pass", out.pass}};
  return out;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  try {
    switch (cfg.kind) {
      case ExperimentKind::Rates: return run_rates(cfg);
      case ExperimentKind::Concentration: return run_concentration(cfg);
      case ExperimentKind::MarginCheck: return run_margin_check(cfg);
      case ExperimentKind::LowerBound: return run_lower_bound(cfg);
      case ExperimentKind::CompareBounds: return run_compare_bounds(cfg);
      case ExperimentKind::SieveVsPlugin: return run_sieve_vs_plugin(cfg);
      case ExperimentKind::Corridor: return run_corridor(cfg);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const UnsupportedClassError& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown experiment");
}

}  // namespace fastrate
