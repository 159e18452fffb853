#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace lpgnn {

// 64-bit FNV-1a. Used for config hashes and seed derivation.
std::uint64_t hash64(std::string_view text);

// Derives an independent seed for a named stream ("weights", "dataset", ...)
// so adding a consumer never shifts the draws seen by existing ones.
std::uint64_t derive_seed(std::uint64_t base, std::string_view stream);

// mt19937_64 engine with hand-rolled distributions. The std:: distribution
// objects are implementation-defined, which would break bit-identical reruns
// of a (config, seed) pair across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], inclusive. Rejection sampling, unbiased.
  int uniform_int(int lo, int hi);

  bool bernoulli(double p) { return uniform() < p; }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(
          uniform_int(0, static_cast<int>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

  // Child generator for a named purpose; consumes one draw.
  Rng fork(std::string_view stream) {
    return Rng(derive_seed(next_u64(), stream));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lpgnn
