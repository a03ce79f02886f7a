#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fastrate/math_core.hpp"
#include "fastrate/sample.hpp"

namespace fastrate {

/// Threshold on the smallest eigenvalue of the normalized design below which
/// the guarded estimator returns 0.
using GuardThreshold = std::function<double(std::size_t n)>;

/// scale / log(n), floored at 1e-12 for n <= 2 where log n is degenerate.
GuardThreshold log_guard(double scale = 1.0);

struct LPConfig {
  int order = 0;
  double bandwidth = 1.0;
  KernelSpec kernel;
  GuardThreshold guard_threshold = log_guard();

  LPConfig() = default;
  LPConfig(int order, double bandwidth, KernelSpec kernel,
           GuardThreshold guard = log_guard());

  void validate() const;
};

/// Local least-squares system at a query point x.
///
/// Q and V use the raw offsets X_i - x; omega_bar and v_bar use the scaled
/// offsets (X_i - x)/h and the 1/(n h^d) normalization. Rows follow
/// enumerate_multiindices(d, order).
struct LocalDesign {
  Eigen::MatrixXd Q;
  Eigen::VectorXd V;
  Eigen::MatrixXd omega_bar;
  Eigen::VectorXd v_bar;
  std::size_t n = 0;
  std::size_t support_count = 0;  // points with nonzero kernel weight
};

/// Assembles the design from every sample point (no neighbor search).
LocalDesign build_design(const Sample& sample, std::span<const double> x, const LPConfig& cfg);

/// Same system with real-valued responses in place of the labels.
LocalDesign build_design(const Sample& sample, std::span<const double> responses,
                         std::span<const double> x, const LPConfig& cfg);

/// Constant coefficient of the local polynomial fit, or nullopt when Q is not
/// numerically positive definite (lambda_min <= 1e-12 lambda_max).
std::optional<double> lp_solve(const LocalDesign& design);

/// Smallest eigenvalue of a symmetric matrix (0 for an empty matrix).
double min_eigenvalue(const Eigen::MatrixXd& sym);

/// Guarded and clipped estimate built from an assembled design.
double eta_star_from_design(const LocalDesign& design, const LPConfig& cfg);

/// Guarded estimator: the LP fit projected on [0,1] when the normalized
/// design is well conditioned (lambda_min > guard threshold), 0 otherwise.
double eta_star(const Sample& sample, std::span<const double> x, const LPConfig& cfg);

/// h = n^{-1/(2 beta + d)}.
double default_bandwidth(std::size_t n, const HolderSpec& spec);

/// 1 iff eta_hat(x) >= 1/2.
int plugin_classify(const RegressionFn& eta_hat, std::span<const double> x);

/// LP estimator bound to a sample, with a uniform-grid neighbor index so
/// that each query only visits points inside the kernel support.
class LocalPolynomialEstimator {
 public:
  LocalPolynomialEstimator(std::shared_ptr<const Sample> sample, LPConfig cfg);

  LocalDesign design(std::span<const double> x) const;
  double eta_star(std::span<const double> x) const;
  int classify(std::span<const double> x) const { return eta_star(x) >= 0.5 ? 1 : 0; }

  const LPConfig& config() const { return cfg_; }
  const Sample& sample() const { return *sample_; }

 private:
  void build_index();

  std::shared_ptr<const Sample> sample_;
  LPConfig cfg_;
  std::vector<MultiIndex> basis_;

  double cell_ = 1.0;
  std::vector<double> origin_;
  std::vector<long> extent_;
  std::vector<std::size_t> cell_start_;
  std::vector<std::size_t> order_;
};

}  // namespace fastrate
