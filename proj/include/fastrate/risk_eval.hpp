#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "fastrate/distributions.hpp"
#include "fastrate/lp_estimator.hpp"
#include "fastrate/sample.hpp"

namespace fastrate {

enum class RiskMethod { ClosedForm, Quadrature, MonteCarlo };

std::string to_string(RiskMethod method);

struct RiskEstimate {
  double value = 0.0;
  double se = 0.0;
  RiskMethod method = RiskMethod::MonteCarlo;
  std::size_t budget = 0;  // draws for MonteCarlo, nodes per ball for Quadrature
};

/// E_X[|2 eta(X) - 1| 1{f(X) != f*(X)}] by Monte Carlo over `budget` draws
/// of X (labels are not needed since eta is known).
RiskEstimate excess_risk_mc(const SyntheticDistribution& dist, const Classifier& f,
                            std::size_t budget, Rng& rng);

/// Same quantity for a hypercube law: per support ball the constant
/// |2 eta - 1| times the disagreement fraction on a stratified lattice of
/// about `nodes_per_ball` points inside the ball. Deterministic (se = 0).
RiskEstimate excess_risk_quadrature(const HypercubeDistribution& dist, const Classifier& f,
                                    std::size_t nodes_per_ball);

/// Dispatch by method; Quadrature requires a HypercubeDistribution.
RiskEstimate excess_risk(const SyntheticDistribution& dist, const Classifier& f,
                         RiskMethod method, std::size_t budget, Rng& rng);

/// Raised by rate_fit when every excess value is zero (exponential regime).
class RateUndefinedError : public std::runtime_error {
 public:
  RateUndefinedError() : std::runtime_error("rate undefined; excess vanished") {}
};

struct RatePoint {
  double n = 0;
  RiskEstimate excess;
};

struct RateFitResult {
  std::vector<RatePoint> series;  // sorted by n
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double theoretical = 0.0;  // exponent e of the predicted rate n^{-e}
  std::size_t points_used = 0;
};

/// OLS of log(excess) on log(n) over the strictly positive entries.
/// Needs >= 3 positive points; an all-zero series throws RateUndefinedError.
RateFitResult rate_fit(std::vector<RatePoint> series, double theoretical);

struct ProbeGridPoint {
  std::size_t n = 0;
  double h = 0.0;
  double delta = 0.0;
};

struct ProbeRow {
  ProbeGridPoint point;
  double scaling = 0.0;       // n h^d delta^2
  std::size_t exceed = 0;     // replicates with |eta*(x) - eta(x)| >= delta
  double probability = 0.0;
};

struct ConcentrationProbe {
  std::vector<ProbeRow> rows;
  std::size_t replicates = 0;
};

struct ProbeOptions {
  int order = 0;
  KernelSpec kernel;
  double guard_scale = 1.0;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Exceedance frequencies of the guarded estimator at a fixed point over R
/// independent samples per grid point. R must be >= 100.
ConcentrationProbe concentration_probe(const SyntheticDistribution& dist,
                                       std::span<const double> x,
                                       const std::vector<ProbeGridPoint>& grid, std::size_t R,
                                       const ProbeOptions& opts);

/// 2 C0 sup_err^{1+alpha}.
double comparison_bound_linf(double alpha, double c0, double sup_err);

/// C1(alpha,p) lp_err^{p(1+alpha)/(p+alpha)} with
/// C1 = 2 (alpha+p)/p (p/alpha)^{alpha/(alpha+p)} C0^{(p-1)/(alpha+p)}. Needs alpha > 0.
double comparison_bound_lp(double alpha, double c0, double p, double lp_err);
double comparison_constant_lp(double alpha, double c0, double p);

/// m w b' (1 - b sqrt(n w)) / 2, floored at 0.
double assouad_bound(double m, double w, double n, double b, double b_prime);

struct TheoreticalExponents {
  double plugin_strong = 0.0;  // beta(1+alpha)/(2beta+d)
  double lower_mild = 0.0;     // (1+alpha)beta/((2+alpha)beta+d)
  double sieve_sup = 0.0;      // (1+alpha)/(2+alpha+rho)
  double sieve_lp = 0.0;       // (1+alpha)p/((2+alpha)p+rho(p+alpha)); sieve_sup for p = inf
  bool fast = false;           // alpha beta > d/2
  bool superfast = false;      // alpha beta > d
};

TheoreticalExponents theoretical_exponents(double alpha, double beta, int d, double rho, double p);

struct DeviationEstimate {
  RiskEstimate bound;   // P(|eta_hat(X) - eta(X)| > t0)
  RiskEstimate excess;  // direct excess risk of 1{eta_hat >= 1/2}
};

/// Both quantities from the same draws of X.
DeviationEstimate excess_via_deviation(const CorridorDistribution& dist, const RegressionFn& eta_hat,
                                   std::size_t budget, Rng& rng);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace fastrate
