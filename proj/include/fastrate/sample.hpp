#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace fastrate {

using Rng = std::mt19937_64;

/// n labeled points (X_i, Y_i) in R^d x {0,1}; points stored row-major.
class Sample {
 public:
  Sample() = default;
  explicit Sample(int dim) : dim_(dim) {}
  Sample(int dim, std::vector<double> coords, std::vector<std::uint8_t> labels);

  int dim() const { return dim_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }

  std::span<const double> x(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  int y(std::size_t i) const { return labels_[i]; }

  const std::vector<double>& coords() const { return coords_; }
  const std::vector<std::uint8_t>& labels() const { return labels_; }

  void push_back(std::span<const double> point, int label);
  void reserve(std::size_t n);

  /// FNV-1a hash over the raw coordinate bytes and labels.
  std::uint64_t fingerprint() const;

 private:
  int dim_ = 1;
  std::vector<double> coords_;
  std::vector<std::uint8_t> labels_;
};

/// A deterministic classifier x -> {0,1}.
using Classifier = std::function<int(std::span<const double>)>;

/// Regression estimate x -> [0,1].
using RegressionFn = std::function<double(std::span<const double>)>;

/// Independent stream derived from a master seed and a path of indices.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);
Rng make_rng(std::uint64_t seed);

/// Runs fn(i) for i in [0, count) on `workers` threads; results must be
/// written by index so output does not depend on scheduling.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace fastrate
