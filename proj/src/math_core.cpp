#include "fastrate/math_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace fastrate {

MultiIndex::MultiIndex(std::vector<int> exponents) : exps_(std::move(exponents)) {
  for (int e : exps_) {
    if (e < 0) throw ValidationError("multi-index exponents must be >= 0");
  }
}

int MultiIndex::degree() const { return std::accumulate(exps_.begin(), exps_.end(), 0); }

double MultiIndex::factorial() const {
  double f = 1.0;
  for (int e : exps_) {
    for (int k = 2; k <= e; ++k) f *= k;
  }
  return f;
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (other.dim() != dim()) throw ValidationError("multi-index dimension mismatch");
  std::vector<int> sum(exps_);
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += other.exps_[i];
  return MultiIndex(std::move(sum));
}

namespace {

// Appends every exponent vector of total degree `remaining` over coordinates
// [pos, d), first coordinate taking the largest value first.
void fill_degree(std::vector<int>& cur, std::size_t pos, int remaining,
                 std::vector<MultiIndex>& out) {
  if (pos + 1 == cur.size()) {
    cur[pos] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[pos] = e;
    fill_degree(cur, pos + 1, remaining - e, out);
  }
  cur[pos] = 0;
}

}  // namespace

std::vector<MultiIndex> enumerate_multiindices(int dim, int max_degree) {
  if (dim < 1) throw ValidationError("dimension must be >= 1");
  if (max_degree < 0) throw ValidationError("max degree must be >= 0");
  std::vector<MultiIndex> out;
  out.reserve(monomial_count(dim, max_degree));
  std::vector<int> cur(static_cast<std::size_t>(dim), 0);
  for (int k = 0; k <= max_degree; ++k) fill_degree(cur, 0, k, out);
  return out;
}

std::size_t monomial_count(int dim, int max_degree) {
  // C(d+l, l) computed incrementally; exact for the small sizes used here.
  std::size_t c = 1;
  for (int i = 1; i <= max_degree; ++i) {
    c = c * static_cast<std::size_t>(dim + i) / static_cast<std::size_t>(i);
  }
  return c;
}

double monomial_eval(std::span<const double> u, const MultiIndex& s) {
  if (u.size() != s.dim()) throw ValidationError("monomial: dimension mismatch");
  double v = 1.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (int k = 0; k < s[i]; ++k) v *= u[i];
  }
  return v;
}

void monomial_vector(std::span<const double> u, const std::vector<MultiIndex>& basis,
                     std::span<double> out) {
  for (std::size_t j = 0; j < basis.size(); ++j) out[j] = monomial_eval(u, basis[j]);
}

double taylor_eval(const std::map<MultiIndex, double>& derivs, int order,
                   std::span<const double> x, std::span<const double> xq) {
  if (x.size() != xq.size()) throw ValidationError("taylor: dimension mismatch");
  std::vector<double> diff(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) diff[i] = xq[i] - x[i];
  double total = 0.0;
  for (const auto& s : enumerate_multiindices(static_cast<int>(x.size()), order)) {
    auto it = derivs.find(s);
    if (it == derivs.end()) {
      std::ostringstream msg;
      msg << "taylor: missing derivative of order " << s.degree();
      throw ValidationError(msg.str());
    }
    total += monomial_eval(diff, s) / s.factorial() * it->second;
  }
  return total;
}

HolderSpec::HolderSpec(double beta_, double L_, int dim_) : beta(beta_), L(L_), dim(dim_) {
  if (!(beta > 0)) throw ValidationError("holder: beta must be > 0");
  if (!(L > 0)) throw ValidationError("holder: L must be > 0");
  if (dim < 1) throw ValidationError("holder: dimension must be >= 1");
}

int HolderSpec::floor_beta() const { return static_cast<int>(std::ceil(beta)) - 1; }

std::string to_string(KernelKind kind) {
  return kind == KernelKind::UniformBall ? "uniform-ball" : "smooth-bump";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "uniform-ball") return KernelKind::UniformBall;
  if (name == "smooth-bump") return KernelKind::SmoothBump;
  throw ValidationError("unknown kernel kind '" + name + "'");
}

double unit_ball_volume(int dim) {
  const double half = 0.5 * dim;
  return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

namespace {

double smooth_bump_profile(double rho_sq) {
  if (rho_sq >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - rho_sq));
}

}  // namespace

KernelSpec::KernelSpec(KernelKind kind, int dim, double radius)
    : kind_(kind), dim_(dim), radius_(radius) {
  if (dim < 1) throw ValidationError("kernel: dimension must be >= 1");
  if (!(radius > 0)) throw ValidationError("kernel: radius must be > 0");
  const double ball = unit_ball_volume(dim) * std::pow(radius, dim);
  if (kind == KernelKind::UniformBall) {
    norm_ = 1.0 / ball;
    lower_ = std::min(0.5 * radius, norm_);
  } else {
    // Radial integral: |S^{d-1}| r^d int_0^1 rho^{d-1} exp(-1/(1-rho^2)) drho.
    auto radial = [dim](double rho) {
      return std::pow(rho, dim - 1) * smooth_bump_profile(rho * rho);
    };
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(radial, 0.0, 1.0, 15,
                                                                      1e-14);
    const double sphere = dim * unit_ball_volume(dim);
    norm_ = 1.0 / (sphere * std::pow(radius, dim) * integral);
    // On |u| <= r/2 the profile is at least exp(-4/3).
    lower_ = std::min(0.5 * radius, norm_ * std::exp(-4.0 / 3.0));
  }
}

double KernelSpec::eval_sq(double norm_sq) const {
  const double r2 = radius_ * radius_;
  if (norm_sq > r2) return 0.0;
  if (kind_ == KernelKind::UniformBall) return norm_;
  return norm_ * smooth_bump_profile(norm_sq / r2);
}

double KernelSpec::operator()(std::span<const double> u) const {
  double sq = 0.0;
  for (double v : u) sq += v * v;
  return eval_sq(sq);
}

double bump_u1(double t) {
  if (t <= 0.25 || t >= 0.5) return 0.0;
  return std::exp(-1.0 / ((0.5 - t) * (t - 0.25)));
}

namespace {

// Tail integrals of u1 on a fixed panel partition of [1/4, 1/2], computed
// once with 20-point Gauss-Legendre per panel.
class BumpTable {
 public:
  static constexpr int kPanels = 512;
  static constexpr double kLo = 0.25;
  static constexpr double kHi = 0.5;

  BumpTable() {
    tail_[kPanels] = 0.0;
    for (int i = kPanels - 1; i >= 0; --i) {
      tail_[i] = tail_[i + 1] + panel(edge(i), edge(i + 1));
    }
    total_ = tail_[0];
  }

  static double edge(int i) { return kLo + (kHi - kLo) * i / kPanels; }

  static double panel(double a, double b) {
    return boost::math::quadrature::gauss<double, 20>::integrate(bump_u1, a, b);
  }

  double total() const { return total_; }

  double tail(double t) const {
    int i = static_cast<int>((t - kLo) / (kHi - kLo) * kPanels);
    i = std::clamp(i, 0, kPanels - 1);
    return tail_[i + 1] + panel(t, edge(i + 1));
  }

 private:
  std::array<double, kPanels + 1> tail_{};
  double total_ = 0.0;
};

const BumpTable& bump_table() {
  static const BumpTable table;
  return table;
}

}  // namespace

double bump_u(double t) {
  if (t < 0.0 || std::isnan(t)) throw ValidationError("bump_u: argument must be >= 0");
  if (t <= 0.25) return 1.0;
  if (t >= 0.5) return 0.0;
  const auto& table = bump_table();
  return std::clamp(table.tail(t) / table.total(), 0.0, 1.0);
}

double bump_u_deriv(double t) {
  if (t <= 0.25 || t >= 0.5) return 0.0;
  return -bump_u1(t) / bump_table().total();
}

double bump_u_deriv2(double t) {
  if (t <= 0.25 || t >= 0.5) return 0.0;
  // u1' = u1 * p' / p^2 with p(t) = (1/2 - t)(t - 1/4).
  const double p = (0.5 - t) * (t - 0.25);
  const double dp = 0.75 - 2.0 * t;
  return -bump_u1(t) * dp / (p * p) / bump_table().total();
}

double phi_eval(std::span<const double> x, double c_phi) {
  if (!(c_phi > 0.0 && c_phi <= 1.0)) throw ValidationError("phi: C_phi must lie in (0, 1]");
  double sq = 0.0;
  for (double v : x) sq += v * v;
  return c_phi * bump_u(std::sqrt(sq));
}

}  // namespace fastrate
