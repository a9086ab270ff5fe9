#pragma once

#include <cmath>
#include <cstddef>

namespace wlmc::stats {

/// Mergeable (count, mean, sum of squared deviations) state for parallel
/// Monte-Carlo reduction.  merge() uses the pairwise update formula, so any
/// partition of a sample set reduces to the same mean up to a few ulps and
/// to the exact same count.
struct Accumulator {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  double variance() const { return count > 0 ? m2 / static_cast<double>(count) : 0.0; }

  /// sqrt(m2/count)/sqrt(count): standard error of the mean.
  double std_error() const {
    return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
  }
};

inline Accumulator merge(const Accumulator& a, const Accumulator& b) {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  Accumulator out;
  out.count = a.count + b.count;
  const double na = static_cast<double>(a.count);
  const double nb = static_cast<double>(b.count);
  const double n = na + nb;
  const double delta = b.mean - a.mean;
  out.mean = a.mean + delta * (nb / n);
  out.m2 = a.m2 + b.m2 + delta * delta * (na * nb / n);
  return out;
}

}  // namespace wlmc::stats
