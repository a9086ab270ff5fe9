#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wlmc/rng.hpp"

namespace wlmc::bridges {

/// A closed, pinned random walk of n_steps steps per coordinate axis:
/// values[0] = values[N] = 0 exactly.  Axis data is stored contiguously
/// (axis-major), so per-axis spans are cache-friendly in the estimator loops.
class StandardBridge {
public:
  StandardBridge(std::size_t n_steps, std::size_t n_axes);

  std::size_t n_steps() const { return n_steps_; }
  std::size_t n_axes() const { return n_axes_; }

  std::span<double> axis(std::size_t a);
  std::span<const double> axis(std::size_t a) const;

  std::span<const double> raw() const { return values_; }
  std::span<double> raw() { return values_; }

private:
  std::size_t n_steps_;
  std::size_t n_axes_;
  std::vector<double> values_;  // (N+1) per axis, axis-major
};

/// A bridge scaled by sqrt(T) and shifted to start at source_point:
/// points[k] = x0 + sqrt(T) * B_k, so points[0] = points[N] = x0.
struct ScaledPath {
  std::vector<double> source_point;  // per axis
  double proper_time = 0.0;
  std::size_t n_steps = 0;
  std::size_t n_axes = 0;
  std::vector<double> points;  // axis-major, (N+1) per axis

  std::span<const double> axis(std::size_t a) const {
    return {points.data() + a * (n_steps + 1), n_steps + 1};
  }
};

/// v-loop bridge generator: B_k = sqrt(c_k/N) z_k + c_k B_{k-1} with
/// c_k = (N-k)/(N-k+1) and B_0 = B_N = 0.  The joint law of the returned
/// points is the exact finite-N Gaussian bridge measure, i.e. the continuum
/// bridge restricted to the grid times k/N.
StandardBridge generate_vloop(std::size_t n_steps, std::size_t n_axes, rng::Stream& stream);
StandardBridge generate_vloop(std::size_t n_steps, std::size_t n_axes, rng::StreamSpec spec);

/// Allocation-free single-axis v-loop kernel: writes N+1 values (endpoints
/// bit-exact zero) into `values`.  The hot path of the estimator loops.
void fill_vloop(std::span<double> values, rng::Stream& stream);

/// Drift-subtracted generator B_k = W_k - (k/N) W_N.  Closes exactly but its
/// per-step variance is dt(1-dt) rather than dt; kept for cross-validation.
StandardBridge generate_drift_subtracted(std::size_t n_steps, std::size_t n_axes,
                                         rng::Stream& stream);
StandardBridge generate_drift_subtracted(std::size_t n_steps, std::size_t n_axes,
                                         rng::StreamSpec spec);

ScaledPath scale_shift(const StandardBridge& bridge, std::span<const double> x0, double T);
ScaledPath scale_shift(const StandardBridge& bridge, double x0, double T);

/// (min_k B_k, max_k B_k) over one axis.
std::pair<double, double> extremes(const StandardBridge& bridge, std::size_t axis_index);
std::pair<double, double> extremes(std::span<const double> values);

/// Binary ensemble dump/load.  Little-endian layout:
///   magic "WLBR", u32 version, u64 N, u64 n_axes, u64 count, u64 seed,
///   then count * n_axes * (N+1) raw float64 values.
void dump_ensemble(const std::string& path, const std::vector<StandardBridge>& bridges,
                   std::uint64_t seed);
std::vector<StandardBridge> load_ensemble(const std::string& path, std::uint64_t* seed_out = nullptr);

}  // namespace wlmc::bridges
