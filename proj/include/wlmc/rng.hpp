#pragma once

#include <cstdint>
#include <cmath>

namespace wlmc::rng {

/// Identifies one reproducible random stream: stream `stream_index` of the
/// run keyed by `master_seed`.  Distinct (seed, index) pairs map to
/// well-separated xoshiro256++ states (256-bit state space, SplitMix64
/// expansion), so streams can be consumed concurrently and in any order.
struct StreamSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
};

inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// xoshiro256++ generator.  Normal deviates use the Marsaglia polar method,
/// which is exact to floating point (pure rejection + transform, no table
/// or ziggurat approximation).
class Stream {
public:
  explicit Stream(StreamSpec spec) {
    // SplitMix64 chain seeded from a mix of (seed, index); the finalizer is
    // a bijection of the index, so streams of one run never collide.
    std::uint64_t x = spec.master_seed ^ splitmix64_mix(spec.stream_index + 0x9E3779B97F4A7C15ull);
    for (auto& w : s_) {
      x += 0x9E3779B97F4A7C15ull;
      w = splitmix64_mix(x);
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal deviate (polar method; second member of each pair cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace wlmc::rng
