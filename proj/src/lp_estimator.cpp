#include "fastrate/lp_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fastrate {

GuardThreshold log_guard(double scale) {
  if (!(scale > 0)) throw ValidationError("guard scale must be > 0");
  return [scale](std::size_t n) {
    if (n <= 2) return 1e-12;
    return scale / std::log(static_cast<double>(n));
  };
}

LPConfig::LPConfig(int order_, double bandwidth_, KernelSpec kernel_, GuardThreshold guard)
    : order(order_), bandwidth(bandwidth_), kernel(kernel_), guard_threshold(std::move(guard)) {
  validate();
}

void LPConfig::validate() const {
  if (order < 0) throw ValidationError("lp: order must be >= 0");
  if (!(bandwidth > 0)) throw ValidationError("lp: bandwidth must be > 0");
  if (!guard_threshold) throw ValidationError("lp: guard threshold missing");
}

namespace {

// Accumulates the scaled system sum K(u) U(u) U(u)^T, sum K(u) Y U(u)
// with u = (X_i - x)/h.
class DesignAccumulator {
 public:
  DesignAccumulator(const std::vector<MultiIndex>& basis, const LPConfig& cfg, int dim)
      : basis_(basis),
        cfg_(cfg),
        dim_(dim),
        inv_h_(1.0 / cfg.bandwidth),
        q_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(basis.size()),
                                 static_cast<Eigen::Index>(basis.size()))),
        v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()))),
        u_(static_cast<std::size_t>(dim)),
        powers_(static_cast<std::size_t>(dim * (cfg.order + 1))),
        mono_(basis.size()) {}

  void add(std::span<const double> xi, double yi, std::span<const double> x) {
    double sq = 0.0;
    for (int k = 0; k < dim_; ++k) {
      u_[k] = (xi[k] - x[k]) * inv_h_;
      sq += u_[k] * u_[k];
    }
    const double w = cfg_.kernel.eval_sq(sq);
    if (w == 0.0) return;
    ++support_;
    const int stride = cfg_.order + 1;
    for (int k = 0; k < dim_; ++k) {
      double p = 1.0;
      for (int e = 0; e <= cfg_.order; ++e) {
        powers_[k * stride + e] = p;
        p *= u_[k];
      }
    }
    for (std::size_t j = 0; j < basis_.size(); ++j) {
      double m = 1.0;
      for (int k = 0; k < dim_; ++k) m *= powers_[k * stride + basis_[j][k]];
      mono_[j] = m;
    }
    const auto M = static_cast<Eigen::Index>(basis_.size());
    for (Eigen::Index a = 0; a < M; ++a) {
      const double wa = w * mono_[a];
      for (Eigen::Index b = a; b < M; ++b) q_(a, b) += wa * mono_[b];
      if (yi != 0.0) v_(a) += wa * yi;
    }
  }

  LocalDesign finish(std::size_t n) {
    const auto M = static_cast<Eigen::Index>(basis_.size());
    for (Eigen::Index a = 0; a < M; ++a) {
      for (Eigen::Index b = 0; b < a; ++b) q_(a, b) = q_(b, a);
    }
    LocalDesign d;
    d.n = n;
    d.support_count = support_;
    const double h = cfg_.bandwidth;
    const double norm = 1.0 / (static_cast<double>(n) * std::pow(h, dim_));
    d.omega_bar = q_ * norm;
    d.v_bar = v_ * norm;
    // Undo the 1/h scaling of each monomial: raw = h^{|s1|+|s2|} * scaled.
    Eigen::VectorXd hp(M);
    for (Eigen::Index a = 0; a < M; ++a) hp(a) = std::pow(h, basis_[a].degree());
    d.Q = hp.asDiagonal() * q_ * hp.asDiagonal();
    d.V = hp.asDiagonal() * v_;
    return d;
  }

 private:
  const std::vector<MultiIndex>& basis_;
  const LPConfig& cfg_;
  int dim_;
  double inv_h_;
  Eigen::MatrixXd q_;
  Eigen::VectorXd v_;
  std::vector<double> u_;
  std::vector<double> powers_;
  std::vector<double> mono_;
  std::size_t support_ = 0;
};

constexpr double kPdRelTol = 1e-12;

// First coordinate of A^{-1} b when A is numerically positive definite.
std::optional<double> solve_constant_term(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  if (A.rows() == 0) return std::nullopt;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
  if (eig.info() != Eigen::Success) return std::nullopt;
  const auto& ev = eig.eigenvalues();
  const double lmax = ev(ev.size() - 1);
  const double lmin = ev(0);
  if (!(lmax > 0.0) || !(lmin > kPdRelTol * lmax)) return std::nullopt;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() == Eigen::Success) {
    Eigen::VectorXd t = llt.solve(b);
    if (t.allFinite()) return t(0);
  }
  // Cholesky failed numerically: solve in the eigenbasis instead.
  const Eigen::VectorXd coeff = eig.eigenvectors().transpose() * b;
  const Eigen::VectorXd t = eig.eigenvectors() * coeff.cwiseQuotient(ev);
  return t(0);
}

}  // namespace

LocalDesign build_design(const Sample& sample, std::span<const double> x, const LPConfig& cfg) {
  cfg.validate();
  if (sample.empty()) throw ValidationError("lp: sample is empty");
  if (x.size() != static_cast<std::size_t>(sample.dim())) {
    throw ValidationError("lp: query dimension mismatch");
  }
  const auto basis = enumerate_multiindices(sample.dim(), cfg.order);
  DesignAccumulator acc(basis, cfg, sample.dim());
  for (std::size_t i = 0; i < sample.size(); ++i) acc.add(sample.x(i), sample.y(i), x);
  return acc.finish(sample.size());
}

LocalDesign build_design(const Sample& sample, std::span<const double> responses,
                         std::span<const double> x, const LPConfig& cfg) {
  cfg.validate();
  if (sample.empty()) throw ValidationError("lp: sample is empty");
  if (responses.size() != sample.size()) throw ValidationError("lp: one response per point");
  if (x.size() != static_cast<std::size_t>(sample.dim())) {
    throw ValidationError("lp: query dimension mismatch");
  }
  const auto basis = enumerate_multiindices(sample.dim(), cfg.order);
  DesignAccumulator acc(basis, cfg, sample.dim());
  for (std::size_t i = 0; i < sample.size(); ++i) acc.add(sample.x(i), responses[i], x);
  return acc.finish(sample.size());
}

std::optional<double> lp_solve(const LocalDesign& design) {
  return solve_constant_term(design.Q, design.V);
}

double min_eigenvalue(const Eigen::MatrixXd& sym) {
  if (sym.rows() == 0) return 0.0;
  if (sym.rows() == 1) return sym(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

double eta_star_from_design(const LocalDesign& design, const LPConfig& cfg) {
  const double lmin = min_eigenvalue(design.omega_bar);
  if (!(lmin > cfg.guard_threshold(design.n))) return 0.0;
  // Same constant coefficient as Q T = V; the scaled system is better conditioned.
  const auto value = solve_constant_term(design.omega_bar, design.v_bar);
  if (!value) return 0.0;
  return std::clamp(*value, 0.0, 1.0);
}

double eta_star(const Sample& sample, std::span<const double> x, const LPConfig& cfg) {
  if (sample.size() < 2) throw ValidationError("eta_star: needs n >= 2");
  return eta_star_from_design(build_design(sample, x, cfg), cfg);
}

double default_bandwidth(std::size_t n, const HolderSpec& spec) {
  if (n < 1) throw ValidationError("bandwidth: n must be >= 1");
  return std::pow(static_cast<double>(n), -1.0 / (2.0 * spec.beta + spec.dim));
}

int plugin_classify(const RegressionFn& eta_hat, std::span<const double> x) {
  return eta_hat(x) >= 0.5 ? 1 : 0;
}

LocalPolynomialEstimator::LocalPolynomialEstimator(std::shared_ptr<const Sample> sample,
                                                   LPConfig cfg)
    : sample_(std::move(sample)), cfg_(std::move(cfg)) {
  cfg_.validate();
  if (!sample_ || sample_->size() < 2) throw ValidationError("lp: needs n >= 2");
  if (cfg_.kernel.dim() != sample_->dim()) throw ValidationError("lp: kernel dimension mismatch");
  basis_ = enumerate_multiindices(sample_->dim(), cfg_.order);
  build_index();
}

void LocalPolynomialEstimator::build_index() {
  const int d = sample_->dim();
  const std::size_t n = sample_->size();
  origin_.assign(d, std::numeric_limits<double>::infinity());
  std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    auto p = sample_->x(i);
    for (int k = 0; k < d; ++k) {
      origin_[k] = std::min(origin_[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  }
  cell_ = cfg_.bandwidth * cfg_.kernel.radius();
  // Keep the cell count near n so sparse samples do not blow up memory.
  const double cap = 4.0 * static_cast<double>(n) + 64.0;
  auto total_cells = [&](double cell) {
    double t = 1.0;
    for (int k = 0; k < d; ++k) t *= std::floor((hi[k] - origin_[k]) / cell) + 1.0;
    return t;
  };
  while (total_cells(cell_) > cap) cell_ *= 2.0;

  extent_.assign(d, 1);
  for (int k = 0; k < d; ++k) {
    extent_[k] = static_cast<long>(std::floor((hi[k] - origin_[k]) / cell_)) + 1;
  }
  std::size_t cells = 1;
  for (int k = 0; k < d; ++k) cells *= static_cast<std::size_t>(extent_[k]);

  std::vector<std::size_t> cell_of(n);
  cell_start_.assign(cells + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto p = sample_->x(i);
    std::size_t idx = 0;
    for (int k = d - 1; k >= 0; --k) {
      long c = static_cast<long>(std::floor((p[k] - origin_[k]) / cell_));
      c = std::clamp(c, 0L, extent_[k] - 1);
      idx = idx * static_cast<std::size_t>(extent_[k]) + static_cast<std::size_t>(c);
    }
    cell_of[i] = idx;
    ++cell_start_[idx + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) cell_start_[c + 1] += cell_start_[c];
  order_.resize(n);
  std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < n; ++i) order_[fill[cell_of[i]]++] = i;
}

LocalDesign LocalPolynomialEstimator::design(std::span<const double> x) const {
  const int d = sample_->dim();
  if (x.size() != static_cast<std::size_t>(d)) throw ValidationError("lp: query dimension mismatch");
  DesignAccumulator acc(basis_, cfg_, d);
  const double reach = cfg_.bandwidth * cfg_.kernel.radius();
  std::vector<long> lo(d), hi(d);
  for (int k = 0; k < d; ++k) {
    lo[k] = static_cast<long>(std::floor((x[k] - reach - origin_[k]) / cell_));
    hi[k] = static_cast<long>(std::floor((x[k] + reach - origin_[k]) / cell_));
    lo[k] = std::max(lo[k], 0L);
    hi[k] = std::min(hi[k], extent_[k] - 1);
    if (lo[k] > hi[k]) return acc.finish(sample_->size());
  }
  std::vector<long> cur(lo);
  while (true) {
    std::size_t idx = 0;
    for (int k = d - 1; k >= 0; --k) {
      idx = idx * static_cast<std::size_t>(extent_[k]) + static_cast<std::size_t>(cur[k]);
    }
    for (std::size_t j = cell_start_[idx]; j < cell_start_[idx + 1]; ++j) {
      const std::size_t i = order_[j];
      acc.add(sample_->x(i), sample_->y(i), x);
    }
    int k = 0;
    while (k < d && ++cur[k] > hi[k]) {
      cur[k] = lo[k];
      ++k;
    }
    if (k == d) break;
  }
  return acc.finish(sample_->size());
}

double LocalPolynomialEstimator::eta_star(std::span<const double> x) const {
  return eta_star_from_design(design(x), cfg_);
}

}  // namespace fastrate
