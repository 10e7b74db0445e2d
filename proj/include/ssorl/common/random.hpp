#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace ssorl {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for a named sub-stream of `seed`. Distinct (seed, stream) pairs give
/// statistically independent generators.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Thin wrapper over mt19937_64 with the handful of draws the library needs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();                       // standard normal
  std::size_t index(std::size_t n);      // uniform in [0, n)

  /// Fisher-Yates shuffle of `values`.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(values[i - 1], values[j]);
    }
  }

  /// `count` distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Counter-based generator: every draw is a pure function of
/// (key, counter), so sequences can be produced in any order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(derive_seed(seed, stream)) {}

  std::uint64_t at(std::uint64_t counter) const { return mix64(key_ ^ mix64(counter + 0x632be59bd9b4e019ULL)); }
  std::size_t index_at(std::uint64_t counter, std::size_t n) const;

 private:
  std::uint64_t key_;
};

}  // namespace ssorl
