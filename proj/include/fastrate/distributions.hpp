#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fastrate/math_core.hpp"
#include "fastrate/sample.hpp"

namespace fastrate {

/// Axis-aligned box [lo, hi] containing the support.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
  double volume() const;
};

/// A law P of (X, Y) on R^d x {0,1} with known regression function.
///
/// Every implementation declares the margin parameters (alpha, C0) for which
/// P_X(0 < |eta(X) - 1/2| <= t) <= C0 t^alpha holds, and a Hoelder class
/// containing eta.
class SyntheticDistribution {
 public:
  virtual ~SyntheticDistribution() = default;

  virtual std::string kind() const = 0;
  virtual int dim() const = 0;

  /// Draws one X from P_X into `out`.
  virtual void draw_x(Rng& rng, std::span<double> out) const = 0;
  virtual double eta(std::span<const double> x) const = 0;
  virtual double density(std::span<const double> x) const = 0;
  /// P_X(0 < |eta(X) - 1/2| <= t) in closed form.
  virtual double margin_mass(double t) const = 0;
  /// Box containing the support of P_X.
  virtual Box support_box() const = 0;

  /// |eta(x) - 1/2|, computed without cancellation where it matters.
  virtual double margin_gap(std::span<const double> x) const;

  /// D^s eta(x) for all |s| <= order, or nullopt when not available.
  virtual std::optional<std::map<MultiIndex, double>> eta_derivatives(
      std::span<const double> x, int order) const;

  double alpha() const { return alpha_; }
  double c0() const { return c0_; }
  const HolderSpec& holder() const { return holder_; }

  int bayes_label(std::span<const double> x) const { return eta(x) >= 0.5 ? 1 : 0; }

  /// n i.i.d. draws, Y ~ Bernoulli(eta(X)). Throws for n = 0.
  Sample sample(std::size_t n, Rng& rng) const;

 protected:
  double alpha_ = 0.0;
  double c0_ = 1.0;
  HolderSpec holder_;
};

using DistributionPtr = std::shared_ptr<const SyntheticDistribution>;

enum class A0Mode { CubeComplement, OutsideBall };

std::string to_string(A0Mode mode);
A0Mode a0_mode_from_string(const std::string& name);

struct HypercubeParams {
  int dim = 1;
  int q = 1;
  int m = 1;
  double w = 1.0;
  double beta = 1.0;
  double L = 1.0;
  double c_phi = 0.5;
  std::vector<int> sigma;  // entries +1 / -1, size m
  A0Mode a0_mode = A0Mode::CubeComplement;
  double alpha = 1.0;      // declared margin exponent
};

/// Assouad hypercube law: m active grid cells of side 1/q, each carrying a
/// ball of radius 1/(4q) with mass w and a bump of sign sigma_j; the residual
/// mass 1 - m w sits on A0 where eta = 1/2.
class HypercubeDistribution final : public SyntheticDistribution {
 public:
  explicit HypercubeDistribution(HypercubeParams params);

  std::string kind() const override { return "hypercube"; }
  int dim() const override { return p_.dim; }
  void draw_x(Rng& rng, std::span<double> out) const override;
  double eta(std::span<const double> x) const override;
  double density(std::span<const double> x) const override;
  double margin_mass(double t) const override;
  Box support_box() const override;
  double margin_gap(std::span<const double> x) const override;
  std::optional<std::map<MultiIndex, double>> eta_derivatives(std::span<const double> x,
                                                              int order) const override;

  const HypercubeParams& params() const { return p_; }
  /// C_phi q^{-beta}: the value of |2 eta - 1| on every support ball.
  double bump_height() const { return bump_height_; }
  /// Margin step location C_phi / (2 q^beta).
  double margin_step() const { return 0.5 * bump_height_; }
  double ball_radius() const { return 0.25 / p_.q; }
  std::vector<double> cell_center(int cell) const;
  /// Index of the grid cell containing x, or -1 outside [0,1]^d.
  int cell_index(std::span<const double> x) const;
  /// Active cell whose support ball contains x, or -1.
  int ball_index(std::span<const double> x) const;
  double a0_volume() const { return a0_volume_; }

 private:
  double signed_bump(std::span<const double> x, int cell) const;

  HypercubeParams p_;
  double bump_height_;
  double ball_density_;
  double a0_volume_;
  std::vector<double> a0_center_;
  double a0_radius_ = 0.25;
};

/// Validates the parameters and builds the law; violations throw
/// ValidationError naming the inequality.
HypercubeDistribution hypercube_build(const HypercubeParams& params);

/// q = floor(Cbar n^{1/(2beta+d)}), w = C' q^{-d}, m = floor(C'' q^{d - alpha beta}),
/// A0 = [0,1]^d minus the active cells. Requires alpha beta <= d.
HypercubeParams strong_density_regime(std::size_t n, int dim, double alpha, double beta,
                                      double L, double c_phi, double c_bar = 1.0,
                                      double c_prime = 0.5, double c_dprime = 1.0);

/// q = floor(C n^{1/((2+alpha)beta+d)}), w = C' q^{2 beta}/n, m = q^d,
/// A0 = a ball outside the unit cube.
HypercubeParams mild_density_regime(std::size_t n, int dim, double alpha, double beta, double L,
                                    double c_phi, double c = 1.0, double c_prime = 0.5);

/// P_X uniform on the unit ball, eta(x) = 1/2 - C |x|^2, alpha = d/2.
class BallExampleDistribution final : public SyntheticDistribution {
 public:
  BallExampleDistribution(int dim, double C = 0.25, double beta = 2.0,
                          std::optional<double> L = std::nullopt);

  std::string kind() const override { return "ball"; }
  int dim() const override { return dim_; }
  void draw_x(Rng& rng, std::span<double> out) const override;
  double eta(std::span<const double> x) const override;
  double density(std::span<const double> x) const override;
  double margin_mass(double t) const override;
  Box support_box() const override;
  double margin_gap(std::span<const double> x) const override;
  std::optional<std::map<MultiIndex, double>> eta_derivatives(std::span<const double> x,
                                                              int order) const override;

  double curvature() const { return C_; }
  /// E[eta(X)] = 1/2 - C d/(d+2), the Bayes risk (f* = 0 a.e.).
  double bayes_risk() const;

 private:
  int dim_;
  double C_;
};

BallExampleDistribution ball_example_build(int dim, double C = 0.25);

/// d = 1, P_X uniform on [-1,-a] U [a,1], eta(x) = 1/2 + slope clamp(x,-1,1).
/// No mass within t0 = slope a of the level 1/2.
class CorridorDistribution final : public SyntheticDistribution {
 public:
  CorridorDistribution(double gap = 0.25, double slope = 0.25,
                       std::optional<double> L = std::nullopt);

  std::string kind() const override { return "corridor"; }
  int dim() const override { return 1; }
  void draw_x(Rng& rng, std::span<double> out) const override;
  double eta(std::span<const double> x) const override;
  double density(std::span<const double> x) const override;
  double margin_mass(double t) const override;
  Box support_box() const override;
  double margin_gap(std::span<const double> x) const override;
  std::optional<std::map<MultiIndex, double>> eta_derivatives(std::span<const double> x,
                                                              int order) const override;

  double gap() const { return gap_; }
  double slope() const { return slope_; }
  double t0() const { return slope_ * gap_; }

 private:
  double gap_;
  double slope_;
};

CorridorDistribution corridor_build(double gap = 0.25, double slope = 0.25);

/// P_X uniform on [0,1]^d, eta(x) = 1/2 + slope (x_1 - threshold): a
/// Lipschitz boundary crossing with alpha = 1, C0 = 2/slope.
class LinearThresholdDistribution final : public SyntheticDistribution {
 public:
  LinearThresholdDistribution(int dim, double slope = 0.5, double threshold = 0.5,
                              double beta = 1.0, std::optional<double> L = std::nullopt);

  std::string kind() const override { return "linear"; }
  int dim() const override { return dim_; }
  void draw_x(Rng& rng, std::span<double> out) const override;
  double eta(std::span<const double> x) const override;
  double density(std::span<const double> x) const override;
  double margin_mass(double t) const override;
  Box support_box() const override;
  double margin_gap(std::span<const double> x) const override;
  std::optional<std::map<MultiIndex, double>> eta_derivatives(std::span<const double> x,
                                                              int order) const override;

  double slope() const { return slope_; }
  double threshold() const { return threshold_; }

 private:
  int dim_;
  double slope_;
  double threshold_;
};

/// P_X uniform on [0,1], eta(x) = 1/2 + a sin(2 pi k x + phase) with integer
/// k: 2k boundary crossings, alpha = 1, C0 = 1/a.
class WaveDistribution final : public SyntheticDistribution {
 public:
  WaveDistribution(double amplitude = 0.2, int frequency = 2, double phase = 1.0,
                   double beta = 1.0, std::optional<double> L = std::nullopt);

  std::string kind() const override { return "wave"; }
  int dim() const override { return 1; }
  void draw_x(Rng& rng, std::span<double> out) const override;
  double eta(std::span<const double> x) const override;
  double density(std::span<const double> x) const override;
  double margin_mass(double t) const override;
  Box support_box() const override;
  double margin_gap(std::span<const double> x) const override;
  std::optional<std::map<MultiIndex, double>> eta_derivatives(std::span<const double> x,
                                                              int order) const override;

  double amplitude() const { return a_; }
  int frequency() const { return k_; }

 private:
  double a_;
  int k_;
  double phase_;
};

struct HolderReport {
  bool pass = true;
  double worst_ratio = 0.0;
  std::vector<double> worst_x;
  std::vector<double> worst_xq;
  std::size_t trials = 0;
};

/// Checks |eta(x') - eta_x(x')| <= L |x - x'|^beta on `trials` random pairs
/// (x from P_X or the support box, x' at log-uniform distances from x).
/// Reports the worst ratio of the left side to the right side; pass allows
/// a relative rounding slack of 1e-9.
HolderReport validate_holder(const SyntheticDistribution& dist, const HolderSpec& spec,
                             std::size_t trials, Rng& rng);

/// Empirical fraction of `n` draws with 0 < |eta(X) - 1/2| <= t, for each t.
std::vector<double> empirical_margin_mass(const SyntheticDistribution& dist,
                                          std::span<const double> ts, std::size_t n, Rng& rng);

}  // namespace fastrate
