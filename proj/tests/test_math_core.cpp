#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "fastrate/math_core.hpp"

using namespace fastrate;

namespace {

// Composite Simpson on [a, b] with an even number of panels.
template <typename F>
double simpson(F f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("multi-index enumeration order d=2 l=2") {
  const auto idx = enumerate_multiindices(2, 2);
  const std::vector<std::vector<int>> want = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  REQUIRE(idx.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(idx[i].exponents() == want[i]);
}

TEST_CASE("multi-index count and uniqueness against brute force") {
  for (int d = 1; d <= 4; ++d) {
    for (int l = 0; l <= 4; ++l) {
      const auto idx = enumerate_multiindices(d, l);
      std::set<std::vector<int>> seen;
      int prev_degree = 0;
      for (const auto& s : idx) {
        CHECK(s.degree() <= l);
        CHECK(s.degree() >= prev_degree);
        prev_degree = s.degree();
        seen.insert(s.exponents());
      }
      // brute force over the box {0..l}^d
      std::size_t brute = 0;
      std::vector<int> e(d, 0);
      while (true) {
        int sum = 0;
        for (int v : e) sum += v;
        if (sum <= l) ++brute;
        int k = 0;
        while (k < d && ++e[k] > l) e[k++] = 0;
        if (k == d) break;
      }
      CHECK(seen.size() == idx.size());
      CHECK(idx.size() == brute);
      CHECK(monomial_count(d, l) == brute);
    }
  }
}

TEST_CASE("multi-index arithmetic") {
  MultiIndex a({2, 0, 3});
  MultiIndex b({1, 1, 0});
  CHECK((a + b).exponents() == std::vector<int>{3, 1, 3});
  CHECK(a.degree() == 5);
  CHECK(a.factorial() == doctest::Approx(12.0));
}

TEST_CASE("monomial evaluation") {
  std::vector<double> u{2.0, -3.0};
  CHECK(monomial_eval(u, MultiIndex({2, 1})) == doctest::Approx(-12.0));
  CHECK(monomial_eval(u, MultiIndex({0, 0})) == 1.0);
  const auto basis = enumerate_multiindices(2, 2);
  std::vector<double> out(basis.size());
  monomial_vector(u, basis, out);
  const std::vector<double> want{1, 2, -3, 4, -6, 9};
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(out[i] == doctest::Approx(want[i]));
}

TEST_CASE("taylor expansion reproduces a quadratic exactly") {
  // g(x, y) = 1 + 2x - y + 3x^2 + xy - 0.5 y^2
  auto g = [](double x, double y) { return 1 + 2 * x - y + 3 * x * x + x * y - 0.5 * y * y; };
  const double x0 = 0.3, y0 = -0.7;
  std::map<MultiIndex, double> d;
  d[MultiIndex({0, 0})] = g(x0, y0);
  d[MultiIndex({1, 0})] = 2 + 6 * x0 + y0;
  d[MultiIndex({0, 1})] = -1 + x0 - y0;
  d[MultiIndex({2, 0})] = 6;
  d[MultiIndex({1, 1})] = 1;
  d[MultiIndex({0, 2})] = -1;
  std::vector<double> x{x0, y0}, xq{1.1, 0.4};
  CHECK(taylor_eval(d, 2, x, xq) == doctest::Approx(g(1.1, 0.4)).epsilon(1e-13));
  d.erase(MultiIndex({1, 1}));
  CHECK_THROWS_AS(taylor_eval(d, 2, x, xq), ValidationError);
}

TEST_CASE("holder floor beta") {
  CHECK(HolderSpec(2.0, 1.0, 1).floor_beta() == 1);
  CHECK(HolderSpec(1.0, 1.0, 1).floor_beta() == 0);
  CHECK(HolderSpec(1.5, 1.0, 1).floor_beta() == 1);
  CHECK(HolderSpec(0.5, 1.0, 1).floor_beta() == 0);
  CHECK_THROWS_AS(HolderSpec(0.0, 1.0, 1), ValidationError);
}

TEST_CASE("unit ball volume") {
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
  CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 / 3.0 * std::numbers::pi));
}

TEST_CASE("kernels integrate to one and respect the lower bound") {
  for (auto kind : {KernelKind::UniformBall, KernelKind::SmoothBump}) {
    for (double r : {0.5, 1.0, 2.0}) {
      // d = 1
      KernelSpec k1(kind, 1, r);
      const double i1 = simpson([&](double u) { return k1.eval_sq(u * u); }, -r, r, 20000);
      CHECK(i1 == doctest::Approx(1.0).epsilon(1e-4));
      // d = 2 in polar coordinates
      KernelSpec k2(kind, 2, r);
      const double i2 = simpson(
          [&](double s) { return 2 * std::numbers::pi * s * k2.eval_sq(s * s); }, 0.0, r, 20000);
      CHECK(i2 == doctest::Approx(1.0).epsilon(1e-4));
      // d = 3 in spherical coordinates
      KernelSpec k3(kind, 3, r);
      const double i3 = simpson(
          [&](double s) { return 4 * std::numbers::pi * s * s * k3.eval_sq(s * s); }, 0.0, r, 20000);
      CHECK(i3 == doctest::Approx(1.0).epsilon(1e-4));
      for (const KernelSpec* k : {&k1, &k2, &k3}) {
        const double c = k->lower_bound();
        CHECK(c > 0.0);
        for (int i = 0; i <= 100; ++i) {
          const double s = c * i / 100.0;
          CHECK(k->eval_sq(s * s) >= c);
        }
        CHECK(k->eval_sq(r * r * 1.0001) == 0.0);
      }
    }
  }
  CHECK(kernel_kind_from_string("smooth-bump") == KernelKind::SmoothBump);
  CHECK(to_string(KernelKind::UniformBall) == "uniform-ball");
  CHECK_THROWS_AS(kernel_kind_from_string("gaussian"), ValidationError);
}

TEST_CASE("bump function against a Simpson oracle") {
  const double total = simpson(bump_u1, 0.25, 0.5, 4000);
  for (double t : {0.26, 0.3, 0.33, 0.375, 0.41, 0.45, 0.49}) {
    const double tail = simpson(bump_u1, t, 0.5, 4000);
    CHECK(bump_u(t) == doctest::Approx(tail / total).epsilon(1e-8));
  }
  CHECK(bump_u(0.0) == 1.0);
  CHECK(bump_u(0.25) == 1.0);
  CHECK(bump_u(0.5) == 0.0);
  CHECK(bump_u(3.0) == 0.0);
  CHECK_THROWS_AS(bump_u(-0.1), ValidationError);
}

TEST_CASE("bump function derivatives match finite differences") {
  for (double t : {0.27, 0.3, 0.375, 0.44, 0.48}) {
    const double h = 1e-5;
    const double fd1 = (bump_u(t + h) - bump_u(t - h)) / (2 * h);
    CHECK(bump_u_deriv(t) == doctest::Approx(fd1).epsilon(1e-5));
    const double fd2 = (bump_u_deriv(t + h) - bump_u_deriv(t - h)) / (2 * h);
    CHECK(bump_u_deriv2(t) == doctest::Approx(fd2).epsilon(1e-4).scale(1.0));
  }
  CHECK(bump_u_deriv(0.1) == 0.0);
  CHECK(bump_u_deriv(0.6) == 0.0);
}

TEST_CASE("bump is nonincreasing") {
  double prev = bump_u(0.0);
  for (int i = 1; i <= 1000; ++i) {
    const double v = bump_u(0.6 * i / 1000.0);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
}

TEST_CASE("phi evaluation") {
  std::vector<double> x0{0.0, 0.0}, x1{0.6, 0.0}, x2{0.3, 0.2};
  CHECK(phi_eval(x0, 0.5) == 0.5);
  CHECK(phi_eval(x1, 0.5) == 0.0);
  CHECK(phi_eval(x2, 0.5) == doctest::Approx(0.5 * bump_u(std::hypot(0.3, 0.2))));
  CHECK_THROWS_AS(phi_eval(x0, 1.5), ValidationError);
  CHECK_THROWS_AS(phi_eval(x0, 0.0), ValidationError);
}
