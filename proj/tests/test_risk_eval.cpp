#include <doctest.h>

#include <cmath>
#include <random>

#include "fastrate/risk_eval.hpp"
#include "fastrate/sieve_classifier.hpp"

using namespace fastrate;

namespace {

HypercubeDistribution cube(std::vector<int> sigma) {
  HypercubeParams p;
  p.dim = 2;
  p.q = 4;
  p.m = static_cast<int>(sigma.size());
  p.w = 0.1;
  p.c_phi = 0.5;
  p.sigma = std::move(sigma);
  return hypercube_build(p);
}

}  // namespace

TEST_CASE("bayes classifier has zero excess") {
  Rng rng = make_rng(1);
  const auto ball = ball_example_build(2, 0.25);
  const auto r = excess_risk_mc(ball, [&](auto x) { return ball.bayes_label(x); }, 5000, rng);
  CHECK(r.value == 0.0);
  CHECK(r.method == RiskMethod::MonteCarlo);
  CHECK(r.budget == 5000);
}

TEST_CASE("constant classifier on the ball example") {
  // f = 1 everywhere: excess = E[1 - 2 eta] = 2 C E|X|^2 = 2 C d / (d + 2)
  Rng rng = make_rng(2);
  const auto ball = ball_example_build(2, 0.25);
  const auto r = excess_risk_mc(ball, [](auto) { return 1; }, 200000, rng);
  CHECK(std::abs(r.value - 0.25) <= 4 * r.se);
  CHECK(r.se > 0.0);
}

TEST_CASE("quadrature on the hypercube") {
  const auto ref = cube({1, 1, 1, 1});
  const auto law = cube({1, -1, -1, 1});
  const Classifier f = [&](auto x) { return ref.bayes_label(x); };
  const auto q = excess_risk_quadrature(law, f, 400);
  CHECK(q.value == doctest::Approx(2 * 0.1 * law.bump_height()).epsilon(1e-12));
  CHECK(q.se == 0.0);
  CHECK(q.method == RiskMethod::Quadrature);
  // half-plane classifier: quadrature agrees with Monte Carlo
  const Classifier g = [](auto x) { return x[0] + 0.7 * x[1] < 0.45 ? 1 : 0; };
  Rng rng = make_rng(3);
  const auto mc = excess_risk_mc(law, g, 400000, rng);
  const auto qd = excess_risk_quadrature(law, g, 4000);
  CHECK(std::abs(mc.value - qd.value) <= 4 * mc.se + 1e-3 * qd.value);
  const auto ball = ball_example_build(2, 0.25);
  CHECK_THROWS_AS(excess_risk(ball, g, RiskMethod::Quadrature, 100, rng), ValidationError);
}

TEST_CASE("rate fit on an exact power law") {
  std::vector<RatePoint> pts;
  for (int k = 8; k <= 13; ++k) {
    const double n = std::ldexp(1.0, k);
    pts.push_back({n, RiskEstimate{3.0 * std::pow(n, -2.0 / 3.0), 0.0, RiskMethod::MonteCarlo, 1}});
  }
  const auto fit = rate_fit(pts, 2.0 / 3.0);
  CHECK(fit.slope == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
  CHECK(std::exp(fit.intercept) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(fit.slope_se == doctest::Approx(0.0).scale(1.0));
  CHECK(fit.points_used == 6);
  CHECK(fit.theoretical == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("rate fit with vanished excess") {
  std::vector<RatePoint> zeros;
  for (double n : {256.0, 512.0, 1024.0}) zeros.push_back({n, RiskEstimate{}});
  CHECK_THROWS_WITH_AS(rate_fit(zeros, 1.0), "rate undefined; excess vanished", RateUndefinedError);
  zeros[0].excess.value = 0.01;
  CHECK_THROWS_AS(rate_fit(zeros, 1.0), ValidationError);
}

TEST_CASE("assouad bound direct substitution") {
  const double want = 4 * 0.1 * 0.2 * (1 - 0.2 * std::sqrt(25 * 0.1)) / 2;
  CHECK(assouad_bound(4, 0.1, 25, 0.2, 0.2) == doctest::Approx(want).epsilon(1e-14));
  CHECK(std::abs(assouad_bound(4, 0.1, 25, 0.2, 0.2) - 0.02735) <= 1e-5);
  CHECK(assouad_bound(4, 0.1, 1000, 0.2, 0.2) == 0.0);
  CHECK_THROWS_AS(assouad_bound(0, 0.1, 25, 0.2, 0.2), ValidationError);
}

TEST_CASE("assouad bound is below the average excess of a fixed classifier") {
  const std::vector<int> plus{1, 1, 1, 1};
  const auto ref = cube(plus);
  const Classifier f = [&](auto x) { return ref.bayes_label(x); };
  double avg = 0;
  for (int s = 0; s < 16; ++s) {
    std::vector<int> sigma(4);
    for (int j = 0; j < 4; ++j) sigma[j] = (s >> j) & 1 ? -1 : 1;
    avg += excess_risk_quadrature(cube(sigma), f, 200).value / 16;
  }
  CHECK(avg >= assouad_bound(4, 0.1, 25, ref.bump_height(), ref.bump_height()));
  CHECK(avg == doctest::Approx(4 * 0.1 * ref.bump_height() / 2));
}

TEST_CASE("theoretical exponents by substitution") {
  const auto e = theoretical_exponents(1.0, 2.0, 2, 1.0, kSupNorm);
  CHECK(e.plugin_strong == doctest::Approx(2.0 / 3.0));
  CHECK(e.lower_mild == doctest::Approx(0.5));
  CHECK(e.fast);
  CHECK_FALSE(e.superfast);
  const auto s = theoretical_exponents(1.0, 1.0, 1, 1.0, kSupNorm);
  CHECK(s.sieve_sup == doctest::Approx(0.5));
  CHECK(s.sieve_lp == doctest::Approx(0.5));
  CHECK(s.plugin_strong == doctest::Approx(2.0 / 3.0));
  const auto p2 = theoretical_exponents(1.0, 1.0, 1, 1.0, 2.0);
  CHECK(p2.sieve_lp == doctest::Approx(4.0 / 9.0));
  CHECK_THROWS_AS(theoretical_exponents(1.0, 0.0, 1, 1.0, 2.0), ValidationError);
}

TEST_CASE("comparison bounds") {
  CHECK(comparison_bound_linf(1.0, 4.0, 0.1) == doctest::Approx(2 * 4 * 0.01));
  const double c1 = 2 * 3.0 / 2.0 * std::pow(2.0, 1.0 / 3.0) * std::pow(4.0, 1.0 / 3.0);
  CHECK(comparison_constant_lp(1.0, 4.0, 2.0) == doctest::Approx(c1));
  CHECK(comparison_bound_lp(1.0, 4.0, 2.0, 0.1) == doctest::Approx(c1 * std::pow(0.1, 4.0 / 3.0)));
  CHECK_THROWS_AS(comparison_bound_lp(0.0, 4.0, 2.0, 0.1), ValidationError);
}

TEST_CASE("comparison bounds hold for perturbed estimates") {
  Rng rng = make_rng(10);
  const auto ball = ball_example_build(2, 0.25);
  std::vector<double> x(2);
  for (int trial = 0; trial < 50; ++trial) {
    const double shift = 0.002 * (trial + 1);
    double sum = 0, sumsq = 0, sup = 0, l2 = 0;
    const int B = 20000;
    for (int i = 0; i < B; ++i) {
      ball.draw_x(rng, x);
      const double eta = ball.eta(x);
      const double eb = std::clamp(eta + shift, 0.0, 1.0);
      sup = std::max(sup, std::abs(eb - eta));
      l2 += (eb - eta) * (eb - eta);
      const double c = (eb >= 0.5) != (eta >= 0.5) ? std::abs(2 * eta - 1) : 0.0;
      sum += c;
      sumsq += c * c;
    }
    const double ex = sum / B;
    const double se = std::sqrt(std::max(0.0, sumsq / B - ex * ex) / (B - 1));
    CHECK(ex <= comparison_bound_linf(ball.alpha(), ball.c0(), sup) + 3 * se);
    CHECK(ex <= comparison_bound_lp(ball.alpha(), ball.c0(), 2.0, std::sqrt(l2 / B)) + 3 * se);
  }
}

TEST_CASE("deviation probability dominates corridor excess") {
  Rng rng = make_rng(4);
  const auto corr = corridor_build(0.25, 0.25);
  std::uniform_real_distribution<double> unif(-0.3, 0.3);
  for (int trial = 0; trial < 20; ++trial) {
    const double bias = unif(rng);
    const RegressionFn eta_hat = [&](auto x) { return corr.eta(x) + bias * std::sin(7 * x[0]); };
    const auto est = excess_via_deviation(corr, eta_hat, 20000, rng);
    const double se = std::hypot(est.bound.se, est.excess.se);
    CHECK(est.excess.value <= est.bound.value + 3 * se);
  }
  const RegressionFn exact = [&](auto x) { return corr.eta(x); };
  const auto zero = excess_via_deviation(corr, exact, 1000, rng);
  CHECK(zero.excess.value == 0.0);
  CHECK(zero.bound.value == 0.0);
}

TEST_CASE("concentration probe contract") {
  const LinearThresholdDistribution lin(1, 0.5, 0.4142);
  std::vector<double> x{0.3};
  ProbeOptions opts;
  opts.kernel = KernelSpec(KernelKind::UniformBall, 1, 1.0);
  opts.seed = 5;
  std::vector<ProbeGridPoint> grid{{100, 0.1, 0.1}, {400, 0.1, 0.1}, {100, 0.1, 1.5}};
  CHECK_THROWS_AS(concentration_probe(lin, x, grid, 50, opts), ValidationError);
  std::vector<double> bad{1.5};
  CHECK_THROWS_AS(concentration_probe(lin, bad, grid, 100, opts), ValidationError);
  const auto probe = concentration_probe(lin, x, grid, 200, opts);
  REQUIRE(probe.rows.size() == 3);
  CHECK(probe.replicates == 200);
  CHECK(probe.rows[2].exceed == 0);
  CHECK(probe.rows[0].scaling == doctest::Approx(100 * 0.1 * 0.01));
  CHECK(probe.rows[1].probability <= probe.rows[0].probability);
  for (const auto& r : probe.rows) {
    CHECK(r.probability >= 0.0);
    CHECK(r.probability <= 1.0);
  }
  opts.workers = 3;
  const auto again = concentration_probe(lin, x, grid, 200, opts);
  for (std::size_t i = 0; i < 3; ++i) CHECK(again.rows[i].exceed == probe.rows[i].exceed);
}

TEST_CASE("spearman correlation") {
  std::vector<double> a{1, 2, 3, 4, 5}, b{10, 20, 30, 40, 50}, c{5, 4, 3, 2, 1};
  CHECK(spearman(a, b) == doctest::Approx(1.0));
  CHECK(spearman(a, c) == doctest::Approx(-1.0));
  std::vector<double> t{1, 1, 2, 3}, u{1, 2, 3, 4};
  // average ranks 1.5 1.5 3 4 against 1 2 3 4
  CHECK(spearman(t, u) == doctest::Approx(0.9486832980505138));
}
