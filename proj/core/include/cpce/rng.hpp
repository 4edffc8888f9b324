#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace cpce {

// Derives an independent stream seed from (seed, stream) using the
// splitmix64 finalizer. Used to give every replication / purpose its own
// deterministic generator regardless of execution order.
inline std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t a,
                             std::uint64_t b) {
  return MixSeed(MixSeed(seed, a), b);
}

inline std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t a,
                             std::uint64_t b, std::uint64_t c) {
  return MixSeed(MixSeed(MixSeed(seed, a), b), c);
}

// Deterministic random generator with explicit sampling transforms, so
// that draws are reproducible bit-for-bit across platforms independent of
// standard-library distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Standard normal via Box-Muller; caches the second variate.
  double Normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = 0.0;
    do {
      u1 = Uniform();
    } while (u1 <= 0.0);
    const double u2 = Uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Fisher-Yates permutation of {0, ..., n-1}.
  std::vector<std::size_t> Permutation(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j =
          static_cast<std::size_t>(Uniform() * static_cast<double>(i));
      std::swap(idx[i - 1], idx[j < i ? j : i - 1]);
    }
    return idx;
  }

 private:
  std::mt19937_64 engine_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace cpce
