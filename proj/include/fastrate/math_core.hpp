#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fastrate {

/// Raised when a constructor or operation receives parameters that violate
/// its stated preconditions. The message names the violated inequality.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exponent vector s = (s_1, ..., s_d) of a monomial x^s.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);

  std::size_t dim() const { return exps_.size(); }
  int operator[](std::size_t i) const { return exps_[i]; }
  const std::vector<int>& exponents() const { return exps_; }

  /// |s| = sum of exponents.
  int degree() const;
  /// s! = prod s_i!, exact in double for |s| <= 20.
  double factorial() const;

  MultiIndex operator+(const MultiIndex& other) const;

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;

 private:
  std::vector<int> exps_;
};

/// All multi-indices with |s| <= max_degree, graded lexicographic order:
/// grouped by increasing degree, and within a degree the first coordinate
/// decreases fastest, e.g. d=2, l=2: (0,0) (1,0) (0,1) (2,0) (1,1) (0,2).
/// Row/column order of every local design matrix follows this list.
std::vector<MultiIndex> enumerate_multiindices(int dim, int max_degree);

/// Number of monomials of degree <= l in d variables, C(d+l, l).
std::size_t monomial_count(int dim, int max_degree);

double monomial_eval(std::span<const double> u, const MultiIndex& s);

/// Evaluates all monomials of `basis` at u into `out` (same order).
void monomial_vector(std::span<const double> u, const std::vector<MultiIndex>& basis,
                     std::span<double> out);

/// Taylor polynomial g_x(xq) = sum_{|s|<=order} (xq-x)^s / s! * D^s g(x).
/// Throws ValidationError if any derivative with |s| <= order is missing.
double taylor_eval(const std::map<MultiIndex, double>& derivs, int order,
                   std::span<const double> x, std::span<const double> xq);

/// Smoothness parameters (beta, L) of a Hoelder class on R^d.
struct HolderSpec {
  double beta = 1.0;
  double L = 1.0;
  int dim = 1;

  HolderSpec() = default;
  HolderSpec(double beta, double L, int dim);

  /// Largest integer strictly less than beta (beta = 2 gives 1).
  int floor_beta() const;
};

enum class KernelKind { UniformBall, SmoothBump };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

/// A compactly supported, bounded, normalized kernel on R^d.
///
/// UniformBall: K(u) = 1{|u| <= r} / (v_d r^d).
/// SmoothBump:  K(u) = c exp(-1 / (1 - |u|^2 / r^2)) on |u| < r.
///
/// Both satisfy K(u) >= c 1{|u| <= c} for the stored lower_bound().
class KernelSpec {
 public:
  KernelSpec() : KernelSpec(KernelKind::UniformBall, 1, 1.0) {}
  KernelSpec(KernelKind kind, int dim, double radius = 1.0);

  KernelKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double radius() const { return radius_; }
  double normalization() const { return norm_; }
  double lower_bound() const { return lower_; }

  /// K evaluated from the squared norm |u|^2.
  double eval_sq(double norm_sq) const;
  double operator()(std::span<const double> u) const;

 private:
  KernelKind kind_;
  int dim_;
  double radius_;
  double norm_;
  double lower_;
};

/// Lebesgue measure of the unit ball in R^d.
double unit_ball_volume(int dim);

/// exp(-1 / ((1/2 - t)(t - 1/4))) on (1/4, 1/2), zero elsewhere.
double bump_u1(double t);

/// Smooth nonincreasing step: 1 on [0, 1/4], 0 on [1/2, inf), and the
/// normalized tail integral of bump_u1 in between. Throws on t < 0.
double bump_u(double t);

/// First and second derivatives of bump_u (zero outside (1/4, 1/2)).
double bump_u_deriv(double t);
double bump_u_deriv2(double t);

/// phi(x) = C_phi * u(|x|), C_phi in (0, 1].
double phi_eval(std::span<const double> x, double c_phi);

}  // namespace fastrate
