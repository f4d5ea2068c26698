#pragma once

// Deterministic random number generation. All sampling in this library is a
// pure function of (sizes, seed): a SplitMix64 expander seeds a xoshiro256++
// stream, and normal variates come from Box-Muller with both variates
// consumed. Identical seeds give byte-identical output sequences, which makes
// traces comparable across machines and implementations.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace onebit {

struct SplitMix64 {
  std::uint64_t state;

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

/// Per-trial seeds: seed_t = SplitMix64(master_seed XOR t). Invariant to
/// execution order, so concurrent trials never share a stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id) {
  SplitMix64 sm{master ^ stream_id};
  return sm.next();
}

class Xoshiro256PlusPlus {
 public:
  explicit Xoshiro256PlusPlus(std::uint64_t seed) {
    SplitMix64 sm{seed};
    for (auto& word : state_) word = sm.next();
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Unbiased uniform integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("below: bound must be positive");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_;
};

/// N(0,1) stream over xoshiro256++. Box-Muller with both variates consumed:
/// u1 in (0,1] feeds the radius, u2 in [0,1) the angle; the sine variate is
/// cached and returned on the next call.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = static_cast<double>((gen_.next() >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(gen_.next() >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  Xoshiro256PlusPlus& raw() { return gen_; }

 private:
  Xoshiro256PlusPlus gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Uniform k-subset of {0, ..., n-1}, returned sorted. Partial Fisher-Yates.
inline std::vector<std::ptrdiff_t> sample_subset(std::ptrdiff_t n, std::ptrdiff_t k,
                                                 Xoshiro256PlusPlus& gen) {
  if (k < 0 || k > n) throw std::invalid_argument("sample_subset: need 0 <= k <= n");
  std::vector<std::ptrdiff_t> pool(static_cast<std::size_t>(n));
  for (std::ptrdiff_t i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (std::ptrdiff_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::ptrdiff_t>(
                           gen.below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace onebit
