#include "fastrate/sieve_classifier.hpp"

#include <algorithm>
#include <cmath>

namespace fastrate {

namespace {
constexpr double kMaxNetCells = 1e9;
}  // namespace

double epsilon_schedule(std::size_t n, double alpha, double rho, double p, double multiplier) {
  if (n < 1) throw ValidationError("epsilon schedule: n must be >= 1");
  if (!(alpha >= 0)) throw ValidationError("epsilon schedule: alpha must be >= 0");
  if (!(rho > 0)) throw ValidationError("epsilon schedule: rho must be > 0");
  if (!(p >= 1)) throw ValidationError("epsilon schedule: p must be >= 1");
  if (!(multiplier > 0)) throw ValidationError("epsilon schedule: multiplier must be > 0");
  const double exponent = std::isinf(p)
                              ? 1.0 / (2.0 + alpha + rho)
                              : (p + alpha) / ((2.0 + alpha) * p + rho * (p + alpha));
  return multiplier * std::pow(static_cast<double>(n), -exponent);
}

NetSpec::NetSpec(HolderSpec holder_, double epsilon_) : holder(holder_), epsilon(epsilon_) {
  if (!(epsilon > 0)) throw ValidationError("net: epsilon must be > 0");
}

Net::Net(const NetSpec& spec) : spec_(spec) {
  if (spec.holder.beta > 1.0) {
    throw UnsupportedClassError("sieve: piecewise-constant nets need beta <= 1");
  }
  if (!(spec.epsilon > 0)) throw ValidationError("net: epsilon must be > 0");
  const double eps = spec.epsilon;
  const double side = std::min(std::pow(eps / (2.0 * spec.holder.L), 1.0 / spec.holder.beta), 1.0);
  if (eps >= 1.0) {
    per_axis_ = 1;
  } else {
    // The small slack keeps exact reciprocals (1/0.125 = 8) from rounding up.
    const double per_axis = std::ceil(1.0 / side - 1e-9);
    if (std::pow(per_axis, spec.holder.dim) > kMaxNetCells) {
      throw ValidationError("net: more than 1e9 cells; increase epsilon");
    }
    per_axis_ = std::max(1, static_cast<int>(per_axis));
  }
  cell_count_ = 1;
  for (int k = 0; k < spec.holder.dim; ++k) cell_count_ *= static_cast<std::size_t>(per_axis_);

  for (int k = 0;; ++k) {
    const double v = eps * (k + 0.5);
    if (v > 1.0) break;
    values_.push_back(v);
  }
  // Cover the top of [0,1] within eps/2 when 1/eps is not an integer.
  const double top = 1.0 - 0.5 * eps;
  if (values_.empty()) {
    values_.push_back(0.5);
  } else if (top > values_.back() + 1e-12 && top >= 0.0) {
    values_.push_back(top);
  }
}

std::size_t Net::cell_of(std::span<const double> x) const {
  std::size_t idx = 0;
  for (int k = dim() - 1; k >= 0; --k) {
    long c = static_cast<long>(std::floor(x[k] * per_axis_));
    c = std::clamp(c, 0L, static_cast<long>(per_axis_) - 1);
    idx = idx * static_cast<std::size_t>(per_axis_) + static_cast<std::size_t>(c);
  }
  return idx;
}

std::vector<double> Net::cell_center(std::size_t cell) const {
  std::vector<double> c(static_cast<std::size_t>(dim()));
  for (int k = 0; k < dim(); ++k) {
    const auto i = cell % static_cast<std::size_t>(per_axis_);
    cell /= static_cast<std::size_t>(per_axis_);
    c[k] = (static_cast<double>(i) + 0.5) / per_axis_;
  }
  return c;
}

double Net::log_cardinality() const {
  return static_cast<double>(cell_count_) * std::log(static_cast<double>(values_.size()));
}

Net build_net(const NetSpec& spec) { return Net(spec); }

SieveClassifier::SieveClassifier(Net net, std::vector<std::uint8_t> labels,
                                 std::vector<double> values)
    : net_(std::move(net)), labels_(std::move(labels)), values_(std::move(values)) {
  if (labels_.size() != net_.cell_count() || values_.size() != net_.cell_count()) {
    throw ValidationError("sieve: per-cell arrays must match the cell count");
  }
  for (std::size_t c = 0; c < labels_.size(); ++c) {
    if ((values_[c] >= 0.5) != (labels_[c] == 1)) {
      throw ValidationError("sieve: label inconsistent with cell value");
    }
  }
}

double empirical_risk(const Classifier& f, const Sample& sample) {
  if (sample.empty()) throw ValidationError("empirical risk: sample is empty");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (f(sample.x(i)) != sample.y(i)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(sample.size());
}

SieveClassifier sieve_fit(const Sample& sample, const Net& net) {
  if (sample.dim() != net.dim()) throw ValidationError("sieve: dimension mismatch");
  std::vector<std::size_t> ones(net.cell_count(), 0);
  std::vector<std::size_t> zeros(net.cell_count(), 0);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto c = net.cell_of(sample.x(i));
    (sample.y(i) ? ones : zeros)[c]++;
  }

  const auto& grid = net.value_grid();
  const auto below = std::find_if(grid.begin(), grid.end(), [](double v) { return v < 0.5; });
  const auto above = std::find_if(grid.begin(), grid.end(), [](double v) { return v >= 0.5; });
  const bool has_below = below != grid.end();
  const bool has_above = above != grid.end();

  std::vector<std::uint8_t> labels(net.cell_count(), 0);
  std::vector<double> values(net.cell_count(), 0.0);
  for (std::size_t c = 0; c < net.cell_count(); ++c) {
    const bool pick_one = !has_below || (has_above && ones[c] > zeros[c]);
    labels[c] = pick_one ? 1 : 0;
    values[c] = pick_one ? *above : *below;
  }
  return SieveClassifier(net, std::move(labels), std::move(values));
}

SieveClassifier sieve_fit(const Sample& sample, const NetSpec& spec) {
  return sieve_fit(sample, build_net(spec));
}

}  // namespace fastrate
