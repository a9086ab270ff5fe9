#pragma once

#include "wlmc/engine.hpp"

#include <vector>

namespace wlmc::thermal {

/// Susceptibility on the imaginary frequency axis: chi(r, is) = chi0(r) * scale(s).
/// Constant media keep scale = 1; the Lorentz single-oscillator model uses
/// scale(s) = omega0^2 / (omega0^2 + s^2) -- real, positive, and
/// non-increasing in s, as causality requires.
struct DispersionModel {
  enum class Kind { constant, lorentz };
  Kind kind = Kind::constant;
  double omega0 = 1.0;

  static DispersionModel constant() { return {}; }
  static DispersionModel lorentz(double omega0);

  double scale(double s) const {
    if (kind == Kind::constant) return 1.0;
    return omega0 * omega0 / (omega0 * omega0 + s * s);
  }
};

struct ThermalConfig {
  double beta = 1.0;           // inverse temperature (1/energy, natural units)
  int n_max = -1;              // Matsubara truncation; -1 resolves automatically
  double tail_tolerance = 1e-4;
};

/// s_n = 2 pi n / (hbar beta) for n = 0 .. n_max.
std::vector<double> matsubara_frequencies(const ThermalConfig& tc, const PhysicalConstants& k);

struct ThermalResult {
  double value = 0.0;
  double std_error = 0.0;
  double normalized = 0.0;  // vs the zero-temperature perfect-conductor reference
  double normalized_std_error = 0.0;
  int n_modes = 0;          // highest Matsubara index summed
  double tail_bound = 0.0;  // geometric estimate of the truncated remainder
  bool truncation_warning = false;
  std::size_t n_paths_used = 0;
  double wall_seconds = 0.0;
};

/// Thermal Casimir-Polder potential of a vacuum-side atom facing a dispersive
/// half-space: primed Matsubara sum of worldline mode estimates with
/// per-mode integrand exp(-s_n^2 <eps_r(., is_n)> T / (2 c^2)), the (D-1)/2
/// proper-time exponent, and the zero-temperature pathwise subtraction
/// applied mode by mode.  All modes share one bridge ensemble.
ThermalResult cp_thermal(const engine::RunConfig& cfg, double atom_position,
                         const DispersionModel& dispersion, const ThermalConfig& tc);

/// Matsubara free energy per unit area for a gap, renormalized by the same
/// pathwise three-term subtraction as the dispersion-free Casimir estimator.
ThermalResult free_energy_thermal(const engine::RunConfig& cfg, const DispersionModel& dispersion,
                                  const ThermalConfig& tc);

/// Zero-temperature limit: the Matsubara sum replaced by a continuous
/// frequency integral, evaluated per path with Gauss-Laguerre nodes after the
/// substitution that makes the integrand proportional to e^{-s^2 const}.
/// For constant dispersion this reduces exactly to the dispersion-free
/// Casimir estimate.
engine::RunResult free_energy_zero_T(const engine::RunConfig& cfg,
                                     const DispersionModel& dispersion, int s_nodes = 64);

}  // namespace wlmc::thermal
