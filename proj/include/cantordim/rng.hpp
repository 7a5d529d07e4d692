#pragma once

#include <cstdint>

namespace cantordim {

/// Counter-based generator: output i is mix64(seed + i * GAMMA) with the
/// splitmix64 finalizer. Stateless apart from the counter, so identical
/// seeds give bit-identical streams on every platform, and per-trial
/// substreams are derived by hashing (seed, stream_id) instead of jumping.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : base_(mix(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)))), counter_(0) {}

  std::uint64_t next_u64() { return mix(base_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

 private:
  std::uint64_t base_;
  std::uint64_t counter_;
};

}  // namespace cantordim
