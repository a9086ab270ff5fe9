#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace wlmc::sojourn {

/// Pinned-path setup: a Wiener process conditioned on y(0)=a, y(t)=c, with a
/// boundary at d.  The sojourn time T_s is the time spent in [d, inf).
struct SojournParams {
  double a = 0.0;
  double c = 0.0;
  double t = 1.0;
  double d = 0.0;
};

/// Law of T_s: point masses at 0 (path never reaches the boundary) and at t
/// (path never leaves the far side), plus a continuous part on (0, t).
struct SojournDensity {
  double atom_at_zero = 0.0;
  double atom_at_t = 0.0;
  std::function<double(double)> continuous;  // density in x, zero outside (0, t)
};

/// Occupation-time density of the pinned path, selected by the ordering of
/// a, c relative to d (four cases).  All exp(+quadratic) * erfc(...) products
/// are evaluated through the scaled complementary error function with the
/// exponents combined analytically, so no parameter regime overflows.
SojournDensity density(const SojournParams& p);

/// Moment-generating function <<exp(-s T_s)>>, from the case-appropriate
/// single-integral formulas.  The one-sided cases are integrated in a
/// substituted variable that removes the endpoint boundary layers entirely;
/// the straddling cases fall back to the Laplace transform of the density
/// within ~0.02 of a case seam, where the printed integrands lose all
/// significance to internal cancellation.
double mgf(const SojournParams& p, double s);

/// Laplace transform of density(): atoms + int exp(-s x) f(x) dx.  Kept as an
/// independent route for cross-checks.
double mgf_via_density(const SojournParams& p, double s);

/// Closed-form mean sojourn time.
double mean(const SojournParams& p);

/// exp(-2 d^2 / T) for d >= 0 (1 for d <= 0): probability for a standard
/// bridge scaled to proper time T to cross a boundary at distance d.
double crossing_probability(double d, double T);

/// Inverse-CDF sampling of T_s without per-call quadrature: atoms are always
/// handled by their closed forms; the continuous quantile comes from this
/// direct numerical inversion.  Used as the table-build kernel and as the
/// out-of-range slow path.
double sample_sojourn_direct(const SojournParams& p, double u);

/// Repeated exact sampling at one fixed parameter point: the numeric CDF is
/// built once, each draw is then a cheap quantile lookup.
class FrozenSojournSampler {
public:
  explicit FrozenSojournSampler(const SojournParams& p);
  ~FrozenSojournSampler();
  FrozenSojournSampler(FrozenSojournSampler&&) noexcept;
  FrozenSojournSampler& operator=(FrozenSojournSampler&&) noexcept;
  double sample(double u) const;

private:
  struct Impl;
  SojournParams params_;
  double atom0_ = 0.0, atom_t_ = 0.0;
  Impl* impl_ = nullptr;
};

/// Grid layout for the interpolation tables, in the scaled variables
/// nu = (c-a)/sqrt(t) (interval length) and delta = (d-a)/sqrt(t) (boundary).
struct GridSpec {
  double nu_min = 1e-3;        // log-spaced interval-length grid
  double nu_max = 10.0;
  int nu_count = 128;
  double delta_min = -10.0;    // uniform boundary grid
  double delta_max = 10.0;
  int delta_count = 257;
  int n_quantiles = 512;       // Chebyshev-spaced quantile grid
};

/// Three-variable inverse-CDF table (nu, delta, quantile) for the continuous
/// part of the sojourn law.  chi-independent: one build serves every run.
class SojournTables {
public:
  static SojournTables build(const GridSpec& spec = GridSpec{});

  /// T_s distributed per density(p), driven by the uniform deviate u.
  /// Parameters outside the grid fall back to sample_sojourn_direct.
  double sample(const SojournParams& p, double u) const;

  /// Max |tau_table - tau_direct| observed on a random probe set at build
  /// time (tau = T_s/t units).
  double interp_error_bound() const { return interp_error_bound_; }

  const GridSpec& grid() const { return spec_; }

  /// Versioned binary persistence (header: grid spec, then float32 payload,
  /// then an FNV-1a checksum).  load() throws on mismatch.
  void save(const std::string& path) const;
  static SojournTables load(const std::string& path);

private:
  SojournTables() = default;
  double quantile_interp(double nu, double delta, double u_cont) const;
  float at(int i, int j, int k) const {
    return data_[(static_cast<std::size_t>(i) * spec_.delta_count + j) * spec_.n_quantiles + k];
  }

  GridSpec spec_;
  std::vector<float> data_;
  double interp_error_bound_ = 0.0;
};

/// Two-variable MGF interpolation table for one fixed scaled Laplace argument
/// S = s*t.  The accelerated estimator needs the segment MGFs at the fixed
/// quadrature values S_i = u_i * chi / N, so it holds one table per node.
/// Both grids are uniform: the MGF varies on an O(1) scale in nu everywhere,
/// so log spacing would starve the large-nu end where the segment statistics
/// concentrate.
class MgfTable {
public:
  struct Spec {
    double nu_max = 8.0;           // signed uniform grid on [-nu_max, nu_max]
    int nu_count_per_side = 256;   // 2 * n + 1 columns including nu = 0
    double delta_min = -5.0;
    double delta_max = 5.0;
    int delta_count = 321;
    double snap_distance = 4.5;    // both endpoints farther: MGF snaps to 1 / e^-S
  };

  static MgfTable build(double S, const Spec& spec);
  static MgfTable build(double S) { return build(S, Spec{}); }

  /// MGF of the segment with scaled coordinates (nu, delta); interpolated
  /// where possible, exact snaps far from the boundary, direct quadrature
  /// otherwise.
  double value(double nu, double delta) const;

  double scaled_argument() const { return S_; }
  double snap_distance() const { return spec_.snap_distance; }
  double interp_error_bound() const { return interp_error_bound_; }

private:
  MgfTable() = default;
  double interp(double nu, double delta) const;  // requires delta in range

  Spec spec_;
  double S_ = 0.0;
  double exp_neg_s_ = 1.0;
  std::vector<double> data_;  // [column][delta]; column 0 is nu=0, then +side, then -side
  double interp_error_bound_ = 0.0;
};

}  // namespace wlmc::sojourn
