#include "fastrate/risk_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fastrate {

std::string to_string(RiskMethod method) {
  switch (method) {
    case RiskMethod::ClosedForm: return "closed-form";
    case RiskMethod::Quadrature: return "quadrature";
    case RiskMethod::MonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

RiskEstimate excess_risk_mc(const SyntheticDistribution& dist, const Classifier& f,
                            std::size_t budget, Rng& rng) {
  if (budget < 2) throw ValidationError("excess_risk: Monte Carlo budget must be >= 2");
  std::vector<double> x(static_cast<std::size_t>(dist.dim()));
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < budget; ++i) {
    dist.draw_x(rng, x);
    const double gap = dist.margin_gap(x);
    if (gap == 0.0) continue;
    if (f(x) == dist.bayes_label(x)) continue;
    const double v = 2.0 * gap;
    sum += v;
    sum_sq += v * v;
  }
  const double nb = static_cast<double>(budget);
  const double mean = sum / nb;
  const double var = std::max(0.0, (sum_sq - nb * mean * mean) / (nb - 1.0));
  return RiskEstimate{mean, std::sqrt(var / nb), RiskMethod::MonteCarlo, budget};
}

RiskEstimate excess_risk_quadrature(const HypercubeDistribution& dist, const Classifier& f,
                                    std::size_t nodes_per_ball) {
  const auto& p = dist.params();
  const int d = p.dim;
  const double fill = unit_ball_volume(d) / std::pow(2.0, d);
  const int per_axis = std::max(
      2, static_cast<int>(std::ceil(std::pow(static_cast<double>(nodes_per_ball) / fill, 1.0 / d))));
  const double r = dist.ball_radius();
  const double step = 2.0 * r / per_axis;

  double total = 0.0;
  std::vector<double> x(d);
  std::vector<int> idx(d);
  for (int j = 0; j < p.m; ++j) {
    const auto z = dist.cell_center(j);
    std::size_t inside = 0;
    std::size_t disagree = 0;
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      double sq = 0.0;
      for (int k = 0; k < d; ++k) {
        const double off = -r + (idx[k] + 0.5) * step;
        x[k] = z[k] + off;
        sq += off * off;
      }
      if (sq <= r * r) {
        ++inside;
        if (f(x) != dist.bayes_label(x)) ++disagree;
      }
      int k = 0;
      while (k < d && ++idx[k] == per_axis) {
        idx[k] = 0;
        ++k;
      }
      if (k == d) break;
    }
    total += p.w * dist.bump_height() * static_cast<double>(disagree) / static_cast<double>(inside);
  }
  return RiskEstimate{total, 0.0, RiskMethod::Quadrature, nodes_per_ball};
}

RiskEstimate excess_risk(const SyntheticDistribution& dist, const Classifier& f,
                         RiskMethod method, std::size_t budget, Rng& rng) {
  if (method == RiskMethod::MonteCarlo) return excess_risk_mc(dist, f, budget, rng);
  const auto* cube = dynamic_cast<const HypercubeDistribution*>(&dist);
  if (cube == nullptr) {
    throw ValidationError("excess_risk: " + to_string(method) +
                          " evaluation is only available for hypercube laws");
  }
  auto est = excess_risk_quadrature(*cube, f, budget);
  est.method = method;
  return est;
}

RateFitResult rate_fit(std::vector<RatePoint> series, double theoretical) {
  std::sort(series.begin(), series.end(),
            [](const RatePoint& a, const RatePoint& b) { return a.n < b.n; });
  RateFitResult out;
  out.theoretical = theoretical;
  std::vector<double> lx, ly;
  for (const auto& pt : series) {
    if (pt.excess.value > 0.0) {
      lx.push_back(std::log(pt.n));
      ly.push_back(std::log(pt.excess.value));
    }
  }
  out.series = std::move(series);
  if (lx.empty()) throw RateUndefinedError();
  if (lx.size() < 3) {
    throw ValidationError("rate_fit: needs at least 3 points with positive excess");
  }
  const double k = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / k;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("rate_fit: n values must not all coincide");
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double res = ly[i] - out.intercept - out.slope * lx[i];
    rss += res * res;
  }
  out.slope_se = k > 2 ? std::sqrt(rss / (k - 2.0) / sxx) : 0.0;
  out.points_used = lx.size();
  return out;
}

ConcentrationProbe concentration_probe(const SyntheticDistribution& dist,
                                       std::span<const double> x,
                                       const std::vector<ProbeGridPoint>& grid, std::size_t R,
                                       const ProbeOptions& opts) {
  if (R < 100) throw ValidationError("concentration: replicate count must be >= 100");
  if (x.size() != static_cast<std::size_t>(dist.dim())) {
    throw ValidationError("concentration: query dimension mismatch");
  }
  if (!(dist.density(x) > 0.0)) throw ValidationError("concentration: x must lie in the support");
  ConcentrationProbe probe;
  probe.replicates = R;
  probe.rows.resize(grid.size());
  const double truth = dist.eta(x);
  const std::vector<double> query(x.begin(), x.end());

  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto& pt = grid[g];
    if (pt.n < 2) throw ValidationError("concentration: n must be >= 2");
    LPConfig cfg(opts.order, pt.h, opts.kernel, log_guard(opts.guard_scale));
    std::vector<std::uint8_t> hit(R, 0);
    parallel_for(R, opts.workers, [&](std::size_t r) {
      Rng rng = make_rng(derive_seed(opts.seed, {g, r}));
      const Sample s = dist.sample(pt.n, rng);
      hit[r] = std::abs(eta_star(s, query, cfg) - truth) >= pt.delta ? 1 : 0;
    });
    auto& row = probe.rows[g];
    row.point = pt;
    row.scaling = static_cast<double>(pt.n) * std::pow(pt.h, dist.dim()) * pt.delta * pt.delta;
    row.exceed = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
    row.probability = static_cast<double>(row.exceed) / static_cast<double>(R);
  }
  return probe;
}

double comparison_bound_linf(double alpha, double c0, double sup_err) {
  if (!(sup_err >= 0.0)) throw ValidationError("comparison: sup error must be >= 0");
  if (!(alpha >= 0.0) || !(c0 > 0.0)) throw ValidationError("comparison: need alpha >= 0, C0 > 0");
  return 2.0 * c0 * std::pow(sup_err, 1.0 + alpha);
}

double comparison_constant_lp(double alpha, double c0, double p) {
  if (!(alpha > 0.0)) {
    throw ValidationError("comparison_lp: requires alpha > 0; use the sup-norm bound for alpha = 0");
  }
  if (!(p >= 1.0)) throw ValidationError("comparison_lp: requires p >= 1");
  if (!(c0 > 0.0)) throw ValidationError("comparison_lp: requires C0 > 0");
  return 2.0 * (alpha + p) / p * std::pow(p / alpha, alpha / (alpha + p)) *
         std::pow(c0, (p - 1.0) / (alpha + p));
}

double comparison_bound_lp(double alpha, double c0, double p, double lp_err) {
  const double c1 = comparison_constant_lp(alpha, c0, p);
  if (!(lp_err >= 0.0)) throw ValidationError("comparison_lp: L_p error must be >= 0");
  return c1 * std::pow(lp_err, p * (1.0 + alpha) / (p + alpha));
}

double assouad_bound(double m, double w, double n, double b, double b_prime) {
  if (!(m > 0) || !(w >= 0) || !(n > 0) || !(b > 0) || !(b_prime > 0)) {
    throw ValidationError("assouad_bound: inputs must be positive");
  }
  const double bracket = 1.0 - b * std::sqrt(n * w);
  return bracket <= 0.0 ? 0.0 : m * w * b_prime * bracket / 2.0;
}

TheoreticalExponents theoretical_exponents(double alpha, double beta, int d, double rho,
                                           double p) {
  if (!(alpha >= 0.0) || !(beta > 0.0) || d < 1 || !(rho > 0.0) || !(p >= 1.0)) {
    throw ValidationError("theoretical_exponents: need alpha >= 0, beta > 0, d >= 1, rho > 0, p >= 1");
  }
  TheoreticalExponents e;
  e.plugin_strong = beta * (1.0 + alpha) / (2.0 * beta + d);
  e.lower_mild = (1.0 + alpha) * beta / ((2.0 + alpha) * beta + d);
  e.sieve_sup = (1.0 + alpha) / (2.0 + alpha + rho);
  e.sieve_lp = std::isinf(p) ? e.sieve_sup
                             : (1.0 + alpha) * p / ((2.0 + alpha) * p + rho * (p + alpha));
  e.fast = alpha * beta > 0.5 * d;
  e.superfast = alpha * beta > d;
  return e;
}

DeviationEstimate excess_via_deviation(const CorridorDistribution& dist, const RegressionFn& eta_hat,
                                   std::size_t budget, Rng& rng) {
  if (budget < 2) throw ValidationError("excess_via_deviation: budget must be >= 2");
  std::vector<double> x(1);
  double bound_sum = 0.0;
  double ex_sum = 0.0, ex_sq = 0.0;
  const double t0 = dist.t0();
  for (std::size_t i = 0; i < budget; ++i) {
    dist.draw_x(rng, x);
    const double est = eta_hat(x);
    const double truth = dist.eta(x);
    if (std::abs(est - truth) > t0) bound_sum += 1.0;
    const int label = est >= 0.5 ? 1 : 0;
    if (label != dist.bayes_label(x)) {
      const double v = 2.0 * dist.margin_gap(x);
      ex_sum += v;
      ex_sq += v * v;
    }
  }
  const double nb = static_cast<double>(budget);
  DeviationEstimate out;
  const double pb = bound_sum / nb;
  out.bound = RiskEstimate{pb, std::sqrt(pb * (1.0 - pb) / nb), RiskMethod::MonteCarlo, budget};
  const double mean = ex_sum / nb;
  const double var = std::max(0.0, (ex_sq - nb * mean * mean) / (nb - 1.0));
  out.excess = RiskEstimate{mean, std::sqrt(var / nb), RiskMethod::MonteCarlo, budget};
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ValidationError("spearman: needs two equal-length series of length >= 2");
  }
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double k = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / k;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / k;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace fastrate
