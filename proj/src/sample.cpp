#include "fastrate/sample.hpp"

#include <atomic>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>

#include "fastrate/math_core.hpp"

namespace fastrate {

Sample::Sample(int dim, std::vector<double> coords, std::vector<std::uint8_t> labels)
    : dim_(dim), coords_(std::move(coords)), labels_(std::move(labels)) {
  if (dim < 1) throw ValidationError("sample: dimension must be >= 1");
  if (coords_.size() != labels_.size() * static_cast<std::size_t>(dim)) {
    throw ValidationError("sample: coordinate count != n * d");
  }
  for (auto y : labels_) {
    if (y > 1) throw ValidationError("sample: labels must be 0 or 1");
  }
}

void Sample::push_back(std::span<const double> point, int label) {
  if (point.size() != static_cast<std::size_t>(dim_)) {
    throw ValidationError("sample: point dimension mismatch");
  }
  coords_.insert(coords_.end(), point.begin(), point.end());
  labels_.push_back(static_cast<std::uint8_t>(label != 0));
}

void Sample::reserve(std::size_t n) {
  coords_.reserve(n * static_cast<std::size_t>(dim_));
  labels_.reserve(n);
}

std::uint64_t Sample::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  mix(coords_.data(), coords_.size() * sizeof(double));
  mix(labels_.data(), labels_.size());
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::vector<std::uint32_t> words;
  words.push_back(static_cast<std::uint32_t>(master));
  words.push_back(static_cast<std::uint32_t>(master >> 32));
  for (auto p : path) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Rng(seq);
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  pool.reserve(n);
  for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace fastrate
