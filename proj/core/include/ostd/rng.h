#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace ostd {

// Seedable generator used for every randomized step (splits, bootstrap
// resampling, MLP init and shuffling). The engine is std::mt19937_64, whose
// output sequence is fixed by the C++ standard; the bounded and real-valued
// draws below are defined here rather than through <random> distributions so
// results do not depend on the standard library vendor.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64+splitmix64-streams";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for (master seed, stream index). Used so parallel and
  // serial execution of seeded runs draw identical numbers.
  static Rng stream(std::uint64_t master_seed, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0. Rejection sampling on
  // the top bits, unbiased.
  std::uint64_t uniform_below(std::uint64_t bound);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = uniform_below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ostd
