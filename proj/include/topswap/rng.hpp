#pragma once

#include <cstdint>
#include <random>

namespace topswap {

/// Seedable, splittable generator. A stream is identified by (seed, stream id);
/// split() derives a child stream deterministically, so parallel workers can be
/// handed disjoint substreams without sharing state.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x746f7073u};
    engine_.seed(seq);
  }

  Rng split(std::uint64_t child) const {
    // splitmix64 finalizer on (stream, child) keeps children of different parents apart
    std::uint64_t z = stream_ + 0x9e3779b97f4a7c15ULL * (child + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return Rng(seed_, z);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform integer in [lo, hi].
  template <class Int>
  Int uniform_int(Int lo, Int hi) {
    return std::uniform_int_distribution<Int>(lo, hi)(engine_);
  }

  double uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace topswap
