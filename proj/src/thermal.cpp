#include "wlmc/thermal.hpp"

#include "wlmc/analytic.hpp"
#include "wlmc/bridge.hpp"
#include "wlmc/quadrature.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wlmc::thermal {

DispersionModel DispersionModel::lorentz(double omega0) {
  if (!(omega0 > 0.0)) throw std::invalid_argument("DispersionModel: omega0 must be positive");
  DispersionModel m;
  m.kind = Kind::lorentz;
  m.omega0 = omega0;
  return m;
}

std::vector<double> matsubara_frequencies(const ThermalConfig& tc, const PhysicalConstants& k) {
  if (tc.n_max < 0) throw std::invalid_argument("matsubara_frequencies: n_max must be >= 0");
  if (!(tc.beta > 0.0)) throw std::invalid_argument("matsubara_frequencies: beta must be positive");
  std::vector<double> s(tc.n_max + 1);
  for (int n = 0; n <= tc.n_max; ++n) s[n] = 2.0 * M_PI * n / (k.hbar * tc.beta);
  return s;
}

namespace {

struct ScratchPool {
  explicit ScratchPool(int workers, std::size_t n) : buffers(workers) {
    for (auto& b : buffers) b.resize(n);
  }
  std::span<double> get() {
#ifdef _OPENMP
    return buffers[omp_get_thread_num()];
#else
    return buffers[0];
#endif
  }
  std::vector<std::vector<double>> buffers;
};

// Matsubara index beyond which mode damping exp(-s_n^2 len^2 / (2 c^2))
// drops below e^-60 for the given length scale.
int resolve_mode_cap(const ThermalConfig& tc, const PhysicalConstants& k, double length_scale) {
  if (tc.n_max >= 0) return tc.n_max;
  const double s_cut = std::sqrt(120.0) * k.c / length_scale;
  const int cap = static_cast<int>(std::ceil(k.hbar * tc.beta * s_cut / (2.0 * M_PI))) + 2;
  return std::min(cap, 8192);
}

// Tail bound from the geometric decay of the last two mode magnitudes.
void attach_tail(ThermalResult& r, const std::vector<double>& mode_values, double tol) {
  r.tail_bound = 0.0;
  r.truncation_warning = false;
  if (mode_values.size() < 2) return;
  const double last = std::abs(mode_values.back());
  const double prev = std::abs(mode_values[mode_values.size() - 2]);
  double total = 0.0;
  for (double v : mode_values) total += v;
  if (last == 0.0) return;
  if (prev > 0.0 && last < prev) {
    const double ratio = last / prev;
    r.tail_bound = last * ratio / (1.0 - ratio);
  } else {
    r.tail_bound = std::numeric_limits<double>::infinity();
  }
  if (!(std::abs(total) > 0.0) || !(r.tail_bound <= tol * std::abs(total)))
    r.truncation_warning = true;
}

}  // namespace

ThermalResult cp_thermal(const engine::RunConfig& cfg, double atom_position,
                         const DispersionModel& dispersion, const ThermalConfig& tc) {
  cfg.validate();
  if (!(tc.beta > 0.0)) throw std::invalid_argument("cp_thermal: beta must be positive");
  if (cfg.geometry.kind() != media::DielectricProfile::Kind::half_space)
    throw std::invalid_argument("cp_thermal: half-space geometry required");
  if (cfg.constants.spacetime_dim < 4)
    throw std::invalid_argument("cp_thermal: needs D >= 4 for the proper-time sampling");
  const double chi0 = cfg.geometry.chi();
  if (media::is_dirichlet(chi0)) throw std::invalid_argument("cp_thermal: finite chi required");
  const bool above = cfg.geometry.side() == media::Side::above;
  const double signed_dist =
      above ? cfg.geometry.boundary() - atom_position : atom_position - cfg.geometry.boundary();
  if (!(signed_dist > 0.0)) throw std::invalid_argument("cp_thermal: atom must be on the vacuum side");
  const double ell = signed_dist;

  const auto t0c = std::chrono::steady_clock::now();
  const auto& k = cfg.constants;
  const int n_cap = resolve_mode_cap(tc, k, ell);
  ThermalConfig tc_full = tc;
  tc_full.n_max = n_cap;
  const auto s_n = matsubara_frequencies(tc_full, k);
  std::vector<double> chi_n(n_cap + 1), coeff(n_cap + 1);
  const double pref = 1.0 / (2.0 * std::pow(2.0 * M_PI, 0.5 * (k.spacetime_dim - 1)) * k.eps0 *
                             k.c * k.c * tc.beta);
  for (int n = 0; n <= n_cap; ++n) {
    chi_n[n] = chi0 * dispersion.scale(s_n[n]);
    coeff[n] = pref * s_n[n] * s_n[n] * k.alpha0 * (n == 0 ? 0.5 : 1.0);  // primed sum
  }
  const double kappa = 0.5 * (k.spacetime_dim - 3);
  const std::size_t n_steps = cfg.n_steps;
  ScratchPool pool(engine::resolve_workers(cfg.workers), n_steps + 1);

  // column 0: coefficient-weighted total (for the combined standard error);
  // columns 1..n_cap: raw per-mode integrand means (for the tail bound).
  auto per_path = [&](std::size_t, rng::Stream& stream, std::span<double> out) {
    auto b = pool.get();
    bridges::fill_vloop(b, stream);
    double reach = 0.0;
    if (above) {
      for (std::size_t j = 1; j < n_steps; ++j) reach = std::max(reach, b[j]);
    } else {
      for (std::size_t j = 1; j < n_steps; ++j) reach = std::max(reach, -b[j]);
    }
    if (!(reach > 0.0)) return;
    const double T0 = (ell / reach) * (ell / reach);
    const auto draw = engine::sample_T_power(T0, kappa, stream.uniform());
    const double thr = (above ? ell : -ell) / std::sqrt(draw.T);
    const double frac = [&] {
      std::size_t count = 0;
      if (above) {
        for (std::size_t j = 0; j < n_steps; ++j) count += b[j] >= thr;
      } else {
        for (std::size_t j = 0; j < n_steps; ++j) count += b[j] <= thr;
      }
      return static_cast<double>(count) / static_cast<double>(n_steps);
    }();
    const double c2 = k.c * k.c;
    double total = 0.0;
    for (int n = 1; n <= n_cap; ++n) {
      const double q = s_n[n] * s_n[n] * draw.T / (2.0 * c2);
      // e^{-q <eps>} - e^{-q}: the far-interface reference is subtracted pathwise
      const double value = std::exp(-q) * std::expm1(-q * chi_n[n] * frac) * draw.weight;
      out[1 + (n - 1)] = value;
      total += coeff[n] * value;
    }
    out[0] = total;
  };

  auto acc = engine::run_paths(cfg.n_paths, static_cast<std::size_t>(n_cap) + 1, cfg.seed,
                               cfg.workers, cfg.reduction, per_path);
  ThermalResult r;
  r.value = acc[0].mean;
  r.std_error = acc[0].std_error();
  r.n_paths_used = acc[0].count;
  r.n_modes = n_cap;
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0c).count();
  std::vector<double> mode_values(n_cap);
  for (int n = 1; n <= n_cap; ++n) mode_values[n - 1] = coeff[n] * acc[n].mean;
  attach_tail(r, mode_values, tc.tail_tolerance);
  if (k.spacetime_dim == 4) {
    const double ref = analytic::cp_reference_magnitude(ell, k);
    r.normalized = -r.value / ref;
    r.normalized_std_error = r.std_error / ref;
  }
  return r;
}

namespace {

struct GapSetup {
  double d1, d2, gap, center, d0;
  double chi1, chi2;
};

GapSetup gap_setup(const engine::RunConfig& cfg) {
  if (cfg.geometry.kind() != media::DielectricProfile::Kind::gap)
    throw std::invalid_argument("thermal free energy: gap geometry required");
  GapSetup s;
  s.d1 = cfg.geometry.d1();
  s.d2 = cfg.geometry.d2();
  s.gap = s.d2 - s.d1;
  s.center = 0.5 * (s.d1 + s.d2);
  s.d0 = cfg.d0 > 0.0 ? cfg.d0 : s.gap;
  s.chi1 = cfg.geometry.chi1();
  s.chi2 = cfg.geometry.chi2();
  if (media::is_dirichlet(s.chi1) || media::is_dirichlet(s.chi2))
    throw std::invalid_argument("thermal free energy: finite chi required");
  return s;
}

struct PathGeometry {
  double x0, weight_x, T0;
  bool valid = false;
};

PathGeometry draw_gap_geometry(const GapSetup& s, std::span<const double> b, std::size_t n,
                               rng::Stream& stream) {
  PathGeometry g;
  double lo = 0.0, hi = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    lo = std::min(lo, b[j]);
    hi = std::max(hi, b[j]);
  }
  const auto dx = engine::sample_x0(s.d0, stream.uniform());
  g.x0 = s.center + dx.x0;
  g.weight_x = dx.weight;
  double t1 = 0.0, t2 = 0.0;
  if (g.x0 > s.d1) {
    if (!(lo < 0.0)) return g;
    const double r = (g.x0 - s.d1) / (-lo);
    t1 = r * r;
  }
  if (g.x0 < s.d2) {
    if (!(hi > 0.0)) return g;
    const double r = (s.d2 - g.x0) / hi;
    t2 = r * r;
  }
  g.T0 = std::max(t1, t2);
  g.valid = g.T0 > 0.0;
  return g;
}

}  // namespace

ThermalResult free_energy_thermal(const engine::RunConfig& cfg, const DispersionModel& dispersion,
                                  const ThermalConfig& tc) {
  cfg.validate();
  if (!(tc.beta > 0.0)) throw std::invalid_argument("free_energy_thermal: beta must be positive");
  const GapSetup s = gap_setup(cfg);
  const auto& k = cfg.constants;
  const auto t0c = std::chrono::steady_clock::now();
  const int n_cap = resolve_mode_cap(tc, k, 0.5 * s.gap);
  ThermalConfig tc_full = tc;
  tc_full.n_max = n_cap;
  const auto s_n = matsubara_frequencies(tc_full, k);
  std::vector<double> scale_n(n_cap + 1);
  for (int n = 0; n <= n_cap; ++n) scale_n[n] = dispersion.scale(s_n[n]);
  const double coeff = -1.0 / (std::pow(2.0 * M_PI, 0.5 * (k.spacetime_dim - 1)) * tc.beta);
  const double kappa = 0.5 * (k.spacetime_dim - 1);
  const std::size_t n_steps = cfg.n_steps;
  ScratchPool pool(engine::resolve_workers(cfg.workers), n_steps + 1);

  auto per_path = [&](std::size_t, rng::Stream& stream, std::span<double> out) {
    auto b = pool.get();
    bridges::fill_vloop(b, stream);
    const auto g = draw_gap_geometry(s, b, n_steps, stream);
    if (!g.valid) return;
    const auto draw = engine::sample_T_power(g.T0, kappa, stream.uniform());
    const double sc = std::sqrt(draw.T);
    const double thr1 = (s.d1 - g.x0) / sc, thr2 = (s.d2 - g.x0) / sc;
    std::size_t c1 = 0, c2 = 0;
    for (std::size_t j = 0; j < n_steps; ++j) {
      c1 += b[j] <= thr1;
      c2 += b[j] >= thr2;
    }
    const double f1 = static_cast<double>(c1) / static_cast<double>(n_steps);
    const double f2 = static_cast<double>(c2) / static_cast<double>(n_steps);
    const double e1x0 = g.x0 <= s.d1 ? 1.0 : 0.0;  // occupation of x0 in each body
    const double e2x0 = g.x0 >= s.d2 ? 1.0 : 0.0;
    const double w = g.weight_x * draw.weight;
    const double c2l = k.c * k.c;
    double total = 0.0;
    for (int n = 1; n <= n_cap; ++n) {
      const double q = s_n[n] * s_n[n] * draw.T / (2.0 * c2l);
      const double x1 = s.chi1 * scale_n[n], x2 = s.chi2 * scale_n[n];
      // [E(<eps12>) - E(eps12(x0))] - [E(<eps1>) - E(eps1(x0))] - [E(<eps2>) - E(eps2(x0))]
      const double eq = std::exp(-q);
      const double combo = eq * (std::exp(-q * (x1 * f1 + x2 * f2)) - std::exp(-q * x1 * f1) -
                                 std::exp(-q * x2 * f2) - std::exp(-q * (x1 * e1x0 + x2 * e2x0)) +
                                 std::exp(-q * x1 * e1x0) + std::exp(-q * x2 * e2x0));
      const double value = combo * w;
      out[1 + (n - 1)] = value;
      total += coeff * value;
    }
    out[0] = total;
  };

  auto acc = engine::run_paths(cfg.n_paths, static_cast<std::size_t>(n_cap) + 1, cfg.seed,
                               cfg.workers, cfg.reduction, per_path);
  ThermalResult r;
  r.value = acc[0].mean;
  r.std_error = acc[0].std_error();
  r.n_paths_used = acc[0].count;
  r.n_modes = n_cap;
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0c).count();
  std::vector<double> mode_values(n_cap);
  for (int n = 1; n <= n_cap; ++n) mode_values[n - 1] = coeff * acc[n].mean;
  attach_tail(r, mode_values, tc.tail_tolerance);
  if (k.spacetime_dim == 4) {
    const double ref = analytic::casimir_reference(s.gap, k);
    r.normalized = r.value / ref;
    r.normalized_std_error = r.std_error / std::abs(ref);
  }
  return r;
}

engine::RunResult free_energy_zero_T(const engine::RunConfig& cfg,
                                     const DispersionModel& dispersion, int s_nodes) {
  cfg.validate();
  const GapSetup s = gap_setup(cfg);
  const auto& k = cfg.constants;
  const auto t0c = std::chrono::steady_clock::now();
  const auto rule = quadrature::gauss_laguerre(s_nodes, -0.5);
  const double kappa = 0.5 * k.spacetime_dim;
  const std::size_t n_steps = cfg.n_steps;
  ScratchPool pool(engine::resolve_workers(cfg.workers), n_steps + 1);

  auto per_path = [&](std::size_t, rng::Stream& stream, std::span<double> out) {
    auto b = pool.get();
    bridges::fill_vloop(b, stream);
    const auto g = draw_gap_geometry(s, b, n_steps, stream);
    if (!g.valid) return;
    const auto draw = engine::sample_T_power(g.T0, kappa, stream.uniform());
    const double sc = std::sqrt(draw.T);
    const double thr1 = (s.d1 - g.x0) / sc, thr2 = (s.d2 - g.x0) / sc;
    std::size_t c1 = 0, c2 = 0;
    for (std::size_t j = 0; j < n_steps; ++j) {
      c1 += b[j] <= thr1;
      c2 += b[j] >= thr2;
    }
    const double f1 = static_cast<double>(c1) / static_cast<double>(n_steps);
    const double f2 = static_cast<double>(c2) / static_cast<double>(n_steps);
    const double e1x0 = g.x0 <= s.d1 ? 1.0 : 0.0;
    const double e2x0 = g.x0 >= s.d2 ? 1.0 : 0.0;
    const double s_of_u = std::sqrt(2.0 * k.c * k.c / draw.T);  // s = sqrt(u) * this
    double ival = 0.0;
    for (int i = 0; i < s_nodes; ++i) {
      const double u = rule.nodes[i];
      const double x1 = s.chi1 * dispersion.scale(std::sqrt(u) * s_of_u);
      const double x2 = s.chi2 * dispersion.scale(std::sqrt(u) * s_of_u);
      // e^{+u} times the renormalized combination of e^{-u eps} factors
      const double ghat = std::exp(-u * (x1 * f1 + x2 * f2)) - std::exp(-u * x1 * f1) -
                          std::exp(-u * x2 * f2) - std::exp(-u * (x1 * e1x0 + x2 * e2x0)) +
                          std::exp(-u * x1 * e1x0) + std::exp(-u * x2 * e2x0);
      ival += 0.5 * rule.weights[i] * ghat;
    }
    out[0] = ival * g.weight_x * draw.weight;
  };

  auto acc = engine::run_paths(cfg.n_paths, 1, cfg.seed, cfg.workers, cfg.reduction, per_path);
  const double pref =
      -std::sqrt(2.0) * k.hbar * k.c / std::pow(2.0 * M_PI, 0.5 * (k.spacetime_dim + 1));
  engine::RunResult r;
  r.estimate = pref * acc[0].mean;
  r.std_error = std::abs(pref) * acc[0].std_error();
  r.n_paths_used = acc[0].count;
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0c).count();
  if (k.spacetime_dim == 4) {
    const double ref = analytic::casimir_reference(s.gap, k);
    r.normalized = r.estimate / ref;
    r.normalized_std_error = r.std_error / std::abs(ref);
  }
  return r;
}

}  // namespace wlmc::thermal
