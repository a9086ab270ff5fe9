#include "wlmc/bridge.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace wlmc::bridges {

StandardBridge::StandardBridge(std::size_t n_steps, std::size_t n_axes)
    : n_steps_(n_steps), n_axes_(n_axes), values_((n_steps + 1) * n_axes, 0.0) {
  if (n_steps < 1) throw std::invalid_argument("StandardBridge: n_steps must be >= 1");
  if (n_axes < 1) throw std::invalid_argument("StandardBridge: n_axes must be >= 1");
}

std::span<double> StandardBridge::axis(std::size_t a) {
  return {values_.data() + a * (n_steps_ + 1), n_steps_ + 1};
}

std::span<const double> StandardBridge::axis(std::size_t a) const {
  return {values_.data() + a * (n_steps_ + 1), n_steps_ + 1};
}

void fill_vloop(std::span<double> values, rng::Stream& stream) {
  const std::size_t n_steps = values.size() - 1;
  const double n = static_cast<double>(n_steps);
  values[0] = 0.0;
  values[n_steps] = 0.0;
  double prev = 0.0;
  for (std::size_t k = 1; k < n_steps; ++k) {
    const double ck = (n - k) / (n - k + 1.0);
    prev = std::sqrt(ck / n) * stream.normal() + ck * prev;
    values[k] = prev;
  }
}

StandardBridge generate_vloop(std::size_t n_steps, std::size_t n_axes, rng::Stream& stream) {
  StandardBridge bridge(n_steps, n_axes);
  for (std::size_t a = 0; a < n_axes; ++a) fill_vloop(bridge.axis(a), stream);
  return bridge;
}

StandardBridge generate_vloop(std::size_t n_steps, std::size_t n_axes, rng::StreamSpec spec) {
  rng::Stream stream(spec);
  return generate_vloop(n_steps, n_axes, stream);
}

StandardBridge generate_drift_subtracted(std::size_t n_steps, std::size_t n_axes,
                                         rng::Stream& stream) {
  StandardBridge bridge(n_steps, n_axes);
  const double sqrt_dt = std::sqrt(1.0 / static_cast<double>(n_steps));
  for (std::size_t a = 0; a < n_axes; ++a) {
    auto b = bridge.axis(a);
    double w = 0.0;
    for (std::size_t k = 1; k <= n_steps; ++k) {
      w += sqrt_dt * stream.normal();
      b[k] = w;
    }
    const double w_end = b[n_steps];
    for (std::size_t k = 1; k < n_steps; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(n_steps);
      b[k] -= t * w_end;
    }
    b[n_steps] = 0.0;
  }
  return bridge;
}

StandardBridge generate_drift_subtracted(std::size_t n_steps, std::size_t n_axes,
                                         rng::StreamSpec spec) {
  rng::Stream stream(spec);
  return generate_drift_subtracted(n_steps, n_axes, stream);
}

ScaledPath scale_shift(const StandardBridge& bridge, std::span<const double> x0, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("scale_shift: proper time must be positive");
  if (x0.size() != bridge.n_axes()) throw std::invalid_argument("scale_shift: axis count mismatch");
  ScaledPath path;
  path.source_point.assign(x0.begin(), x0.end());
  path.proper_time = T;
  path.n_steps = bridge.n_steps();
  path.n_axes = bridge.n_axes();
  path.points.resize((path.n_steps + 1) * path.n_axes);
  const double scale = std::sqrt(T);
  for (std::size_t a = 0; a < path.n_axes; ++a) {
    auto b = bridge.axis(a);
    double* out = path.points.data() + a * (path.n_steps + 1);
    for (std::size_t k = 0; k <= path.n_steps; ++k) out[k] = x0[a] + scale * b[k];
  }
  return path;
}

ScaledPath scale_shift(const StandardBridge& bridge, double x0, double T) {
  return scale_shift(bridge, std::span<const double>(&x0, 1), T);
}

std::pair<double, double> extremes(std::span<const double> values) {
  double lo = values[0], hi = values[0];
  for (double v : values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return {lo, hi};
}

std::pair<double, double> extremes(const StandardBridge& bridge, std::size_t axis_index) {
  if (axis_index >= bridge.n_axes()) throw std::invalid_argument("extremes: axis out of range");
  return extremes(bridge.axis(axis_index));
}

namespace {
constexpr char kMagic[4] = {'W', 'L', 'B', 'R'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}
}  // namespace

void dump_ensemble(const std::string& path, const std::vector<StandardBridge>& bridges,
                   std::uint64_t seed) {
  if (bridges.empty()) throw std::invalid_argument("dump_ensemble: empty ensemble");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("dump_ensemble: cannot open " + path);
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod<std::uint64_t>(out, bridges.front().n_steps());
  write_pod<std::uint64_t>(out, bridges.front().n_axes());
  write_pod<std::uint64_t>(out, bridges.size());
  write_pod<std::uint64_t>(out, seed);
  for (const auto& b : bridges) {
    if (b.n_steps() != bridges.front().n_steps() || b.n_axes() != bridges.front().n_axes())
      throw std::invalid_argument("dump_ensemble: inhomogeneous ensemble");
    auto raw = b.raw();
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("dump_ensemble: write failed for " + path);
}

std::vector<StandardBridge> load_ensemble(const std::string& path, std::uint64_t* seed_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_ensemble: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("load_ensemble: bad magic");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion) throw std::runtime_error("load_ensemble: unsupported version");
  const auto n_steps = read_pod<std::uint64_t>(in);
  const auto n_axes = read_pod<std::uint64_t>(in);
  const auto count = read_pod<std::uint64_t>(in);
  const auto seed = read_pod<std::uint64_t>(in);
  if (seed_out) *seed_out = seed;
  std::vector<StandardBridge> bridges;
  bridges.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    StandardBridge b(n_steps, n_axes);
    auto raw = b.raw();
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(double)));
    if (!in) throw std::runtime_error("load_ensemble: truncated file");
    bridges.push_back(std::move(b));
  }
  return bridges;
}

}  // namespace wlmc::bridges
