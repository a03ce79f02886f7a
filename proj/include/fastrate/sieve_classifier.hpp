#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "fastrate/math_core.hpp"
#include "fastrate/sample.hpp"

namespace fastrate {

/// Raised for regression classes the sieve cannot cover (beta > 1).
class UnsupportedClassError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

inline constexpr double kSupNorm = std::numeric_limits<double>::infinity();

/// n^{-1/(2+alpha+rho)} for p = inf, n^{-(p+alpha)/((2+alpha)p + rho(p+alpha))}
/// for finite p >= 1, times `multiplier`.
double epsilon_schedule(std::size_t n, double alpha, double rho, double p,
                        double multiplier = 1.0);

/// Sup-norm epsilon-net on Sigma(beta, L) restricted to [0,1]^d for
/// beta <= 1: functions that are constant on the cells of a regular grid,
/// with values on a fixed grid in [0,1].
struct NetSpec {
  HolderSpec holder;
  double epsilon = 0.1;

  NetSpec() = default;
  NetSpec(HolderSpec holder, double epsilon);
};

/// Implicit net description; the product set of per-cell values is never
/// enumerated.
class Net {
 public:
  explicit Net(const NetSpec& spec);

  const NetSpec& spec() const { return spec_; }
  int dim() const { return spec_.holder.dim; }
  int cells_per_axis() const { return per_axis_; }
  std::size_t cell_count() const { return cell_count_; }
  double cell_side() const { return 1.0 / per_axis_; }
  const std::vector<double>& value_grid() const { return values_; }

  /// Cell index of a point; coordinates are clamped into [0,1].
  std::size_t cell_of(std::span<const double> x) const;
  /// Center of a cell.
  std::vector<double> cell_center(std::size_t cell) const;

  /// log(card N) = (#cells) log(#values).
  double log_cardinality() const;

 private:
  NetSpec spec_;
  int per_axis_ = 1;
  std::size_t cell_count_ = 1;
  std::vector<double> values_;
};

/// Throws UnsupportedClassError for beta > 1.
Net build_net(const NetSpec& spec);

/// Piecewise-constant plug-in rule selected from a net.
class SieveClassifier {
 public:
  SieveClassifier(Net net, std::vector<std::uint8_t> labels, std::vector<double> values);

  int classify(std::span<const double> x) const { return labels_[net_.cell_of(x)]; }
  double value(std::span<const double> x) const { return values_[net_.cell_of(x)]; }

  const Net& net() const { return net_; }
  const std::vector<std::uint8_t>& labels() const { return labels_; }
  const std::vector<double>& values() const { return values_; }

 private:
  Net net_;
  std::vector<std::uint8_t> labels_;
  std::vector<double> values_;
};

/// Fraction of sample points with f(X_i) != Y_i.
double empirical_risk(const Classifier& f, const Sample& sample);

/// Empirical risk minimizer over the net. Per-cell majority vote; ties and
/// empty cells take label 0. The stored value is the smallest grid entry on
/// the chosen side of 1/2. When the grid has entries on one side only every
/// cell takes that side.
SieveClassifier sieve_fit(const Sample& sample, const Net& net);
SieveClassifier sieve_fit(const Sample& sample, const NetSpec& spec);

}  // namespace fastrate
