#include "fastrate/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fastrate {

double Box::volume() const {
  double v = 1.0;
  for (std::size_t k = 0; k < lo.size(); ++k) v *= hi[k] - lo[k];
  return v;
}

double SyntheticDistribution::margin_gap(std::span<const double> x) const {
  return std::abs(eta(x) - 0.5);
}

std::optional<std::map<MultiIndex, double>> SyntheticDistribution::eta_derivatives(
    std::span<const double>, int) const {
  return std::nullopt;
}

Sample SyntheticDistribution::sample(std::size_t n, Rng& rng) const {
  if (n == 0) throw ValidationError("sample: n must be >= 1");
  Sample s(dim());
  s.reserve(n);
  std::vector<double> x(static_cast<std::size_t>(dim()));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    draw_x(rng, x);
    const int y = unif(rng) < eta(x) ? 1 : 0;
    s.push_back(x, y);
  }
  return s;
}

namespace {

double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

// Uniform draw from the ball B(center, radius).
void draw_in_ball(Rng& rng, std::span<const double> center, double radius,
                  std::span<double> out) {
  const auto d = center.size();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      out[k] = normal(rng);
      norm += out[k] * out[k];
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  const double r = radius * std::pow(unif(rng), 1.0 / static_cast<double>(d));
  for (std::size_t k = 0; k < d; ++k) out[k] = center[k] + r * out[k] / norm;
}

// Packs value, gradient and Hessian into a derivative map over |s| <= order.
// Derivatives of order > 2 are reported as zero when `polynomial` is set and
// unavailable otherwise.
std::optional<std::map<MultiIndex, double>> pack_derivatives(
    int dim, int order, double value, const std::vector<double>& grad,
    const std::vector<std::vector<double>>& hess, bool polynomial) {
  if (order > 2 && !polynomial) return std::nullopt;
  std::map<MultiIndex, double> out;
  for (const auto& s : enumerate_multiindices(dim, order)) {
    double v = 0.0;
    if (s.degree() == 0) {
      v = value;
    } else if (s.degree() == 1) {
      for (int i = 0; i < dim; ++i) {
        if (s[i] == 1) v = grad[i];
      }
    } else if (s.degree() == 2) {
      std::vector<int> idx;
      for (int i = 0; i < dim; ++i) {
        for (int k = 0; k < s[i]; ++k) idx.push_back(i);
      }
      v = hess[idx[0]][idx[1]];
    }
    out.emplace(s, v);
  }
  return out;
}

}  // namespace

std::string to_string(A0Mode mode) {
  return mode == A0Mode::CubeComplement ? "cube-complement" : "outside-ball";
}

A0Mode a0_mode_from_string(const std::string& name) {
  if (name == "cube-complement") return A0Mode::CubeComplement;
  if (name == "outside-ball") return A0Mode::OutsideBall;
  throw ValidationError("unknown a0_mode '" + name + "'");
}

// --- hypercube -------------------------------------------------------------

namespace {

double int_pow(int base, int exp) {
  double v = 1.0;
  for (int i = 0; i < exp; ++i) v *= base;
  return v;
}

void check(bool ok, const std::string& inequality) {
  if (!ok) throw ValidationError("hypercube: violated " + inequality);
}

}  // namespace

HypercubeDistribution::HypercubeDistribution(HypercubeParams params) : p_(std::move(params)) {
  check(p_.dim >= 1, "d >= 1");
  check(p_.q >= 1, "q >= 1");
  const double cells = int_pow(p_.q, p_.dim);
  check(p_.m >= 1, "m >= 1");
  check(p_.m <= cells, "m <= q^d");
  check(p_.w > 0.0, "w > 0");
  check(p_.w * p_.m <= 1.0 + 1e-12, "w <= 1/m");
  check(p_.c_phi > 0.0 && p_.c_phi <= 1.0, "0 < C_phi <= 1");
  check(p_.beta > 0.0, "beta > 0");
  check(p_.L > 0.0, "L > 0");
  check(p_.alpha >= 0.0, "alpha >= 0");
  check(static_cast<int>(p_.sigma.size()) == p_.m, "|sigma| = m");
  for (int s : p_.sigma) check(s == 1 || s == -1, "sigma_j in {-1,+1}");

  bump_height_ = std::pow(static_cast<double>(p_.q), -p_.beta) * p_.c_phi;
  const double ball_volume = unit_ball_volume(p_.dim) * std::pow(ball_radius(), p_.dim);
  ball_density_ = p_.w / ball_volume;

  if (p_.a0_mode == A0Mode::CubeComplement) {
    a0_volume_ = 1.0 - p_.m / cells;
    check(a0_volume_ > 0.0 || 1.0 - p_.m * p_.w <= 1e-12,
          "lambda[A0] > 0 when 1 - m w > 0 (cube-complement needs m < q^d)");
  } else {
    a0_center_.assign(p_.dim, 0.5);
    a0_center_[0] = 1.5;
    a0_volume_ = unit_ball_volume(p_.dim) * std::pow(a0_radius_, p_.dim);
  }

  holder_ = HolderSpec(p_.beta, p_.L, p_.dim);
  alpha_ = p_.alpha;
  c0_ = p_.m * p_.w / std::pow(margin_step(), p_.alpha);
}

std::vector<double> HypercubeDistribution::cell_center(int cell) const {
  std::vector<double> z(static_cast<std::size_t>(p_.dim));
  for (int k = 0; k < p_.dim; ++k) {
    const int i = cell % p_.q;
    cell /= p_.q;
    z[k] = (2.0 * i + 1.0) / (2.0 * p_.q);
  }
  return z;
}

int HypercubeDistribution::cell_index(std::span<const double> x) const {
  int idx = 0;
  for (int k = p_.dim - 1; k >= 0; --k) {
    if (x[k] < 0.0 || x[k] > 1.0) return -1;
    const double scaled = x[k] * p_.q;
    int i = static_cast<int>(std::floor(scaled));
    // On a shared face the grid point closer to 0 wins.
    if (scaled == std::floor(scaled) && i > 0) --i;
    i = std::clamp(i, 0, p_.q - 1);
    idx = idx * p_.q + i;
  }
  return idx;
}

int HypercubeDistribution::ball_index(std::span<const double> x) const {
  const int cell = cell_index(x);
  if (cell < 0 || cell >= p_.m) return -1;
  const auto z = cell_center(cell);
  double sq = 0.0;
  for (int k = 0; k < p_.dim; ++k) sq += (x[k] - z[k]) * (x[k] - z[k]);
  return sq <= ball_radius() * ball_radius() ? cell : -1;
}

double HypercubeDistribution::signed_bump(std::span<const double> x, int cell) const {
  const auto z = cell_center(cell);
  double sq = 0.0;
  for (int k = 0; k < p_.dim; ++k) sq += (x[k] - z[k]) * (x[k] - z[k]);
  const double qpow = std::pow(static_cast<double>(p_.q), -p_.beta);
  const double bump = qpow * (p_.c_phi * bump_u(p_.q * std::sqrt(sq)));
  return p_.sigma[static_cast<std::size_t>(cell)] * bump;
}

void HypercubeDistribution::draw_x(Rng& rng, std::span<double> out) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  const double active_mass = p_.m * p_.w;
  if (u < active_mass) {
    const int j = std::min(static_cast<int>(u / p_.w), p_.m - 1);
    const auto z = cell_center(j);
    draw_in_ball(rng, z, ball_radius(), out);
    return;
  }
  if (p_.a0_mode == A0Mode::OutsideBall) {
    draw_in_ball(rng, a0_center_, a0_radius_, out);
    return;
  }
  // Inactive cells all have volume q^{-d}: pick one, then a uniform point in it.
  const int cells = static_cast<int>(int_pow(p_.q, p_.dim));
  std::uniform_int_distribution<int> pick(p_.m, cells - 1);
  int cell = pick(rng);
  for (int k = 0; k < p_.dim; ++k) {
    const int i = cell % p_.q;
    cell /= p_.q;
    out[k] = (i + unif(rng)) / p_.q;
  }
}

double HypercubeDistribution::eta(std::span<const double> x) const {
  const int cell = cell_index(x);
  if (cell < 0 || cell >= p_.m) return 0.5;
  return (1.0 + signed_bump(x, cell)) / 2.0;
}

double HypercubeDistribution::margin_gap(std::span<const double> x) const {
  const int cell = cell_index(x);
  if (cell < 0 || cell >= p_.m) return 0.0;
  return 0.5 * std::abs(signed_bump(x, cell));
}

double HypercubeDistribution::density(std::span<const double> x) const {
  if (ball_index(x) >= 0) return ball_density_;
  const double residual = 1.0 - p_.m * p_.w;
  if (residual <= 0.0) return 0.0;
  if (p_.a0_mode == A0Mode::CubeComplement) {
    const int cell = cell_index(x);
    return cell >= p_.m ? residual / a0_volume_ : 0.0;
  }
  double sq = 0.0;
  for (int k = 0; k < p_.dim; ++k) sq += (x[k] - a0_center_[k]) * (x[k] - a0_center_[k]);
  return sq <= a0_radius_ * a0_radius_ ? residual / a0_volume_ : 0.0;
}

double HypercubeDistribution::margin_mass(double t) const {
  if (!(t > 0.0)) throw ValidationError("margin_mass: t must be > 0");
  return t >= margin_step() ? p_.m * p_.w : 0.0;
}

Box HypercubeDistribution::support_box() const {
  Box b{std::vector<double>(p_.dim, 0.0), std::vector<double>(p_.dim, 1.0)};
  if (p_.a0_mode == A0Mode::OutsideBall) b.hi[0] = a0_center_[0] + a0_radius_;
  return b;
}

std::optional<std::map<MultiIndex, double>> HypercubeDistribution::eta_derivatives(
    std::span<const double> x, int order) const {
  const int d = p_.dim;
  std::vector<double> grad(d, 0.0);
  std::vector<std::vector<double>> hess(d, std::vector<double>(d, 0.0));
  const int cell = cell_index(x);
  double value = 0.5;
  if (cell >= 0 && cell < p_.m) {
    value = eta(x);
    const auto z = cell_center(cell);
    std::vector<double> v(d);
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
      v[k] = x[k] - z[k];
      r2 += v[k] * v[k];
    }
    const double r = std::sqrt(r2);
    const double s = p_.q * r;
    const double amp = 0.5 * p_.sigma[static_cast<std::size_t>(cell)] *
                       std::pow(static_cast<double>(p_.q), -p_.beta) * p_.c_phi;
    const double du = bump_u_deriv(s);
    const double d2u = bump_u_deriv2(s);
    if (r > 0.0 && (du != 0.0 || d2u != 0.0)) {
      for (int i = 0; i < d; ++i) {
        grad[i] = amp * p_.q * du * v[i] / r;
        for (int j = 0; j < d; ++j) {
          const double vv = v[i] * v[j] / r2;
          const double delta = i == j ? 1.0 : 0.0;
          hess[i][j] = amp * (p_.q * p_.q * d2u * vv + p_.q * du / r * (delta - vv));
        }
      }
    }
  }
  return pack_derivatives(d, order, value, grad, hess, false);
}

HypercubeDistribution hypercube_build(const HypercubeParams& params) {
  return HypercubeDistribution(params);
}

HypercubeParams strong_density_regime(std::size_t n, int dim, double alpha, double beta,
                                      double L, double c_phi, double c_bar, double c_prime,
                                      double c_dprime) {
  if (alpha * beta > dim) throw ValidationError("hypercube regime: violated alpha beta <= d");
  HypercubeParams p;
  p.dim = dim;
  p.q = static_cast<int>(std::floor(c_bar * std::pow(static_cast<double>(n), 1.0 / (2 * beta + dim))));
  check(p.q >= 1, "q = floor(Cbar n^{1/(2beta+d)}) >= 1");
  p.w = c_prime * std::pow(static_cast<double>(p.q), -dim);
  p.m = static_cast<int>(std::floor(c_dprime * std::pow(static_cast<double>(p.q), dim - alpha * beta)));
  check(p.m >= 1, "m = floor(C'' q^{d - alpha beta}) >= 1");
  check(p.m * p.w <= std::pow(static_cast<double>(p.q), -alpha * beta) + 1e-12,
        "m w <= q^{-alpha beta}");
  p.beta = beta;
  p.L = L;
  p.c_phi = c_phi;
  p.sigma.assign(static_cast<std::size_t>(p.m), 1);
  p.a0_mode = A0Mode::CubeComplement;
  p.alpha = alpha;
  return p;
}

HypercubeParams mild_density_regime(std::size_t n, int dim, double alpha, double beta, double L,
                                    double c_phi, double c, double c_prime) {
  HypercubeParams p;
  p.dim = dim;
  p.q = static_cast<int>(
      std::floor(c * std::pow(static_cast<double>(n), 1.0 / ((2 + alpha) * beta + dim))));
  check(p.q >= 1, "q = floor(C n^{1/((2+alpha)beta+d)}) >= 1");
  p.w = c_prime * std::pow(static_cast<double>(p.q), 2 * beta) / static_cast<double>(n);
  p.m = static_cast<int>(int_pow(p.q, dim));
  check(p.m * p.w <= std::pow(static_cast<double>(p.q), -alpha * beta) + 1e-12,
        "m w <= q^{-alpha beta}");
  p.beta = beta;
  p.L = L;
  p.c_phi = c_phi;
  p.sigma.assign(static_cast<std::size_t>(p.m), 1);
  p.a0_mode = A0Mode::OutsideBall;
  p.alpha = alpha;
  return p;
}

// --- ball example ----------------------------------------------------------

BallExampleDistribution::BallExampleDistribution(int dim, double C, double beta,
                                                 std::optional<double> L)
    : dim_(dim), C_(C) {
  if (dim < 1) throw ValidationError("ball: dimension must be >= 1");
  if (!(C > 0.0 && C <= 0.5)) throw ValidationError("ball: violated 0 < C <= 1/2");
  holder_ = HolderSpec(beta, L.value_or(2.0 * C), dim);
  alpha_ = 0.5 * dim;
  c0_ = std::pow(C, -0.5 * dim);
}

void BallExampleDistribution::draw_x(Rng& rng, std::span<double> out) const {
  const std::vector<double> origin(static_cast<std::size_t>(dim_), 0.0);
  draw_in_ball(rng, origin, 1.0, out);
}

double BallExampleDistribution::eta(std::span<const double> x) const {
  return 0.5 - C_ * squared_norm(x);
}

double BallExampleDistribution::margin_gap(std::span<const double> x) const {
  return C_ * squared_norm(x);
}

double BallExampleDistribution::density(std::span<const double> x) const {
  return squared_norm(x) <= 1.0 ? 1.0 / unit_ball_volume(dim_) : 0.0;
}

double BallExampleDistribution::margin_mass(double t) const {
  if (!(t > 0.0)) throw ValidationError("margin_mass: t must be > 0");
  return std::pow(std::min(t / C_, 1.0), 0.5 * dim_);
}

Box BallExampleDistribution::support_box() const {
  return Box{std::vector<double>(dim_, -1.0), std::vector<double>(dim_, 1.0)};
}

std::optional<std::map<MultiIndex, double>> BallExampleDistribution::eta_derivatives(
    std::span<const double> x, int order) const {
  std::vector<double> grad(dim_);
  std::vector<std::vector<double>> hess(dim_, std::vector<double>(dim_, 0.0));
  for (int i = 0; i < dim_; ++i) {
    grad[i] = -2.0 * C_ * x[i];
    hess[i][i] = -2.0 * C_;
  }
  return pack_derivatives(dim_, order, eta(x), grad, hess, true);
}

double BallExampleDistribution::bayes_risk() const {
  return 0.5 - C_ * dim_ / (dim_ + 2.0);
}

BallExampleDistribution ball_example_build(int dim, double C) {
  return BallExampleDistribution(dim, C);
}

// --- corridor --------------------------------------------------------------

CorridorDistribution::CorridorDistribution(double gap, double slope, std::optional<double> L)
    : gap_(gap), slope_(slope) {
  if (!(gap > 0.0 && gap < 1.0)) throw ValidationError("corridor: violated 0 < a < 1");
  if (!(slope > 0.0 && slope <= 0.5)) throw ValidationError("corridor: violated 0 < slope <= 1/2");
  const double lip = L.value_or(slope);
  if (lip < slope) throw ValidationError("corridor: violated slope <= L");
  holder_ = HolderSpec(1.0, lip, 1);
  // For t >= t0 the mass (t/slope - a)/(1 - a) stays below t/slope.
  alpha_ = 1.0;
  c0_ = 1.0 / slope;
}

void CorridorDistribution::draw_x(Rng& rng, std::span<double> out) const {
  std::uniform_real_distribution<double> unif(gap_, 1.0);
  std::bernoulli_distribution sign(0.5);
  const double v = unif(rng);
  out[0] = sign(rng) ? v : -v;
}

double CorridorDistribution::eta(std::span<const double> x) const {
  return 0.5 + slope_ * std::clamp(x[0], -1.0, 1.0);
}

double CorridorDistribution::margin_gap(std::span<const double> x) const {
  return slope_ * std::abs(std::clamp(x[0], -1.0, 1.0));
}

double CorridorDistribution::density(std::span<const double> x) const {
  const double a = std::abs(x[0]);
  return a >= gap_ && a <= 1.0 ? 0.5 / (1.0 - gap_) : 0.0;
}

double CorridorDistribution::margin_mass(double t) const {
  if (!(t > 0.0)) throw ValidationError("margin_mass: t must be > 0");
  return std::clamp((t / slope_ - gap_) / (1.0 - gap_), 0.0, 1.0);
}

Box CorridorDistribution::support_box() const { return Box{{-1.0}, {1.0}}; }

std::optional<std::map<MultiIndex, double>> CorridorDistribution::eta_derivatives(
    std::span<const double> x, int order) const {
  const double g = std::abs(x[0]) < 1.0 ? slope_ : 0.0;
  return pack_derivatives(1, order, eta(x), {g}, {{0.0}}, true);
}

CorridorDistribution corridor_build(double gap, double slope) {
  return CorridorDistribution(gap, slope);
}

// --- linear threshold ------------------------------------------------------

LinearThresholdDistribution::LinearThresholdDistribution(int dim, double slope, double threshold,
                                                         double beta, std::optional<double> L)
    : dim_(dim), slope_(slope), threshold_(threshold) {
  if (dim < 1) throw ValidationError("linear: dimension must be >= 1");
  if (!(slope > 0.0)) throw ValidationError("linear: violated slope > 0");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("linear: violated 0 < threshold < 1");
  if (slope * std::max(threshold, 1.0 - threshold) > 0.5) {
    throw ValidationError("linear: violated slope max(threshold, 1-threshold) <= 1/2");
  }
  holder_ = HolderSpec(beta, L.value_or(slope), dim);
  alpha_ = 1.0;
  c0_ = 2.0 / slope;
}

void LinearThresholdDistribution::draw_x(Rng& rng, std::span<double> out) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < dim_; ++k) out[k] = unif(rng);
}

double LinearThresholdDistribution::eta(std::span<const double> x) const {
  return 0.5 + slope_ * (x[0] - threshold_);
}

double LinearThresholdDistribution::margin_gap(std::span<const double> x) const {
  return slope_ * std::abs(x[0] - threshold_);
}

double LinearThresholdDistribution::density(std::span<const double> x) const {
  for (int k = 0; k < dim_; ++k) {
    if (x[k] < 0.0 || x[k] > 1.0) return 0.0;
  }
  return 1.0;
}

double LinearThresholdDistribution::margin_mass(double t) const {
  if (!(t > 0.0)) throw ValidationError("margin_mass: t must be > 0");
  const double r = t / slope_;
  return std::min(threshold_, r) + std::min(1.0 - threshold_, r);
}

Box LinearThresholdDistribution::support_box() const {
  return Box{std::vector<double>(dim_, 0.0), std::vector<double>(dim_, 1.0)};
}

std::optional<std::map<MultiIndex, double>> LinearThresholdDistribution::eta_derivatives(
    std::span<const double> x, int order) const {
  std::vector<double> grad(dim_, 0.0);
  grad[0] = slope_;
  std::vector<std::vector<double>> hess(dim_, std::vector<double>(dim_, 0.0));
  return pack_derivatives(dim_, order, eta(x), grad, hess, true);
}

WaveDistribution::WaveDistribution(double amplitude, int frequency, double phase, double beta,
                                   std::optional<double> L)
    : a_(amplitude), k_(frequency), phase_(phase) {
  if (!(amplitude > 0.0 && amplitude <= 0.5)) throw ValidationError("wave: violated 0 < a <= 1/2");
  if (frequency < 1) throw ValidationError("wave: violated frequency >= 1");
  if (!(beta > 0.0 && beta <= 2.0)) throw ValidationError("wave: violated 0 < beta <= 2");
  const double omega = 2.0 * std::numbers::pi * frequency;
  double lip = omega * amplitude;
  if (beta < 1.0) lip = std::pow(2.0 * amplitude, 1.0 - beta) * std::pow(lip, beta);
  if (beta > 1.0) lip = omega * omega * amplitude;
  holder_ = HolderSpec(beta, L.value_or(lip), 1);
  alpha_ = 1.0;
  c0_ = 1.0 / amplitude;
}

void WaveDistribution::draw_x(Rng& rng, std::span<double> out) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  out[0] = unif(rng);
}

double WaveDistribution::eta(std::span<const double> x) const {
  return 0.5 + a_ * std::sin(2.0 * std::numbers::pi * k_ * x[0] + phase_);
}

double WaveDistribution::margin_gap(std::span<const double> x) const {
  return std::abs(a_ * std::sin(2.0 * std::numbers::pi * k_ * x[0] + phase_));
}

double WaveDistribution::density(std::span<const double> x) const {
  return x[0] >= 0.0 && x[0] <= 1.0 ? 1.0 : 0.0;
}

double WaveDistribution::margin_mass(double t) const {
  if (!(t > 0.0)) throw ValidationError("margin_mass: t must be > 0");
  return 2.0 / std::numbers::pi * std::asin(std::min(t / a_, 1.0));
}

Box WaveDistribution::support_box() const { return Box{{0.0}, {1.0}}; }

std::optional<std::map<MultiIndex, double>> WaveDistribution::eta_derivatives(
    std::span<const double> x, int order) const {
  const double omega = 2.0 * std::numbers::pi * k_;
  const double arg = omega * x[0] + phase_;
  std::vector<double> grad{a_ * omega * std::cos(arg)};
  std::vector<std::vector<double>> hess{{-a_ * omega * omega * std::sin(arg)}};
  return pack_derivatives(1, order, eta(x), grad, hess, false);
}

// --- checks ----------------------------------------------------------------

HolderReport validate_holder(const SyntheticDistribution& dist, const HolderSpec& spec,
                             std::size_t trials, Rng& rng) {
  const int d = dist.dim();
  if (spec.dim != d) throw ValidationError("validate_holder: dimension mismatch");
  const int order = spec.floor_beta();
  const Box box = dist.support_box();
  double diam = 0.0;
  for (int k = 0; k < d; ++k) diam += (box.hi[k] - box.lo[k]) * (box.hi[k] - box.lo[k]);
  diam = std::sqrt(diam);

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double log_lo = std::log(1e-4 * diam);
  const double log_hi = std::log(diam);

  HolderReport report;
  report.trials = trials;
  std::vector<double> x(d), xq(d), dir(d);
  for (std::size_t t = 0; t < trials; ++t) {
    if (t % 2 == 0) {
      dist.draw_x(rng, x);
    } else {
      for (int k = 0; k < d; ++k) x[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * unif(rng);
    }
    double norm = 0.0;
    for (int k = 0; k < d; ++k) {
      dir[k] = normal(rng);
      norm += dir[k] * dir[k];
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const double r = std::exp(log_lo + (log_hi - log_lo) * unif(rng));
    for (int k = 0; k < d; ++k) xq[k] = x[k] + r * dir[k] / norm;

    const auto derivs = dist.eta_derivatives(x, order);
    if (!derivs) {
      std::ostringstream msg;
      msg << "validate_holder: " << dist.kind() << " provides no derivatives of order " << order;
      throw ValidationError(msg.str());
    }
    double dist_sq = 0.0;
    for (int k = 0; k < d; ++k) dist_sq += (xq[k] - x[k]) * (xq[k] - x[k]);
    const double remainder = std::abs(dist.eta(xq) - taylor_eval(*derivs, order, x, xq));
    const double ratio = remainder / (spec.L * std::pow(std::sqrt(dist_sq), spec.beta));
    if (ratio > report.worst_ratio) {
      report.worst_ratio = ratio;
      report.worst_x = x;
      report.worst_xq = xq;
    }
  }
  report.pass = report.worst_ratio <= 1.0 + 1e-9;
  return report;
}

std::vector<double> empirical_margin_mass(const SyntheticDistribution& dist,
                                          std::span<const double> ts, std::size_t n, Rng& rng) {
  std::vector<std::size_t> counts(ts.size(), 0);
  std::vector<double> x(static_cast<std::size_t>(dist.dim()));
  for (std::size_t i = 0; i < n; ++i) {
    dist.draw_x(rng, x);
    const double g = dist.margin_gap(x);
    if (!(g > 0.0)) continue;
    for (std::size_t j = 0; j < ts.size(); ++j) {
      if (g <= ts[j]) ++counts[j];
    }
  }
  std::vector<double> out(ts.size());
  for (std::size_t j = 0; j < ts.size(); ++j) {
    out[j] = static_cast<double>(counts[j]) / static_cast<double>(n);
  }
  return out;
}

}  // namespace fastrate
