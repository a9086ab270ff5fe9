#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wlmc/constants.hpp"
#include "wlmc/media.hpp"
#include "wlmc/rng.hpp"
#include "wlmc/stats.hpp"

namespace wlmc::engine {

enum class Estimator { trapezoid, interpolation, dirichlet, mgf_segment, sojourn_sample };
enum class Reduction { ordered, free };

const char* to_string(Estimator e);
const char* to_string(Reduction r);

struct RunConfig {
  media::DielectricProfile geometry = media::DielectricProfile::vacuum();
  PhysicalConstants constants;
  std::size_t n_steps = 1000;
  std::size_t n_paths = 100000;
  Estimator estimator = Estimator::trapezoid;
  double d0 = 0.0;  // x0-sampling scale for Casimir runs; 0 selects the gap width
  std::uint64_t seed = 0;
  int workers = 0;  // 0 = all available
  Reduction reduction = Reduction::ordered;

  void validate() const;
};

struct RunResult {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n_paths_used = 0;
  double normalized = 0.0;            // eta-bar / gamma-bar (D = 4)
  double normalized_std_error = 0.0;
  double wall_seconds = 0.0;
};

/// T drawn from the pathwise density p(T; T0) = Theta(T-T0) (D/2) T0^{D/2} / T^{1+D/2}
/// by inverse CDF: T = T0 (1-u)^{-2/D}.  The importance weight
/// [(D/2) T0^{D/2}]^{-1} is T-independent.
struct DrawT {
  double T = 0.0;
  double weight = 0.0;
};
DrawT sample_T(double T0, int spacetime_dim, double u);

/// Same for a general power T^{-1-kappa} (the thermal integrals carry
/// different T exponents).
DrawT sample_T_power(double T0, double kappa, double u);

/// x0 drawn from p(x0; d0) = (3 d0^3/8) * { d0^-4 inside |x0|<d0, x0^-4 outside },
/// centered at 0; weight = 1/p(x0).
struct DrawX0 {
  double x0 = 0.0;
  double weight = 0.0;
};
DrawX0 sample_x0(double d0, double u);

enum class CpMode { vacuum, embedded };

/// Casimir-Polder estimate for an atom at `atom_position` facing a half-space
/// profile.  x0 stays fixed at the atom (no spatial sampling); per path one
/// proper time is drawn above the first-touch bound.
RunResult estimate_cp(const RunConfig& cfg, CpMode mode, double atom_position);

/// chi sweep on shared bridges (common random numbers): one result per chi,
/// all evaluated from the same path ensemble and the same T draws.
std::vector<RunResult> estimate_cp_sweep(const RunConfig& cfg, CpMode mode, double atom_position,
                                         std::span<const double> chi_list);

/// Dirichlet-limit estimator with the T integral done in closed form per
/// path: contribution -(2/D) T0^{-D/2}, no T-sampling variance.
RunResult estimate_cp_dirichlet_closed(const RunConfig& cfg, double atom_position);

/// Casimir energy per unit area for a gap profile: x0 and T importance
/// sampled, pathwise-renormalized two-body integrand.
RunResult estimate_casimir(const RunConfig& cfg);
std::vector<RunResult> estimate_casimir_sweep(const RunConfig& cfg,
                                              std::span<const double> chi_list);

// --- convergence sweep -------------------------------------------------------

struct SweepColumn {
  double chi = 1.0;                       // media::kDirichlet for the saturated limit
  Estimator estimator = Estimator::trapezoid;
};

struct SweepPoint {
  SweepColumn column;
  std::size_t n_steps = 0;
  double normalized = 0.0;
  double normalized_std_error = 0.0;
  double oracle = 0.0;
  double rel_error = 0.0;          // normalized/oracle - 1
  double rel_error_se = 0.0;
  double diff_to_finest = 0.0;     // mean pathwise (estimate_N - estimate_Nmax)/oracle
  double diff_to_finest_se = 0.0;  // its standard error: tiny under shared paths
};

struct SweepResult {
  std::vector<SweepPoint> points;
};

/// Relative-error-vs-N study for the vacuum-side Casimir-Polder estimator at
/// unit distance.  Every n in n_list must divide max(n_list): each path is
/// generated once at the finest resolution and evaluated on strided
/// sub-bridges (exact coarse bridge law), so the N columns share their
/// randomness and the error curves are smooth.
SweepResult convergence_sweep(const RunConfig& base, std::span<const std::size_t> n_list,
                              std::span<const SweepColumn> columns);

/// Weighted log-log slope of |rel_error| vs N over points with
/// |rel_error| >= snr_threshold * rel_error_se, restricted to
/// n in [n_lo, n_hi].  Returns NaN if fewer than two points qualify.
double fitted_slope(const SweepResult& sweep, const SweepColumn& column, std::size_t n_lo,
                    std::size_t n_hi, double snr_threshold = 3.0);

/// Error-scaling exponent from the shared-path differences to the finest N:
/// fits diff(N) = c (N^-p - Nmax^-p) by weighted least squares (golden
/// search on p), which cancels the sampling noise common to all N and stays
/// usable when the absolute bias has dropped below the Monte-Carlo floor.
/// Returns the slope -p, or NaN if fewer than two points carry signal.
double fitted_slope_diff(const SweepResult& sweep, const SweepColumn& column, std::size_t n_lo,
                         std::size_t n_hi, double snr_threshold = 3.0);

// --- parallel driver ---------------------------------------------------------

/// Runs per_path(i, stream, out) for i in [0, n_paths), accumulating each
/// column of `out`.  Ordered reduction: paths are grouped in fixed blocks of
/// 4096, accumulated in path order within each block, and the block
/// accumulators are folded in block order -- bit-identical for any worker
/// count.  Free reduction: per-thread accumulators merged in thread order
/// (fastest, stable only for a fixed worker count).
std::vector<stats::Accumulator> run_paths(
    std::size_t n_paths, std::size_t n_columns, std::uint64_t seed, int workers, Reduction red,
    const std::function<void(std::size_t, rng::Stream&, std::span<double>)>& per_path);

int resolve_workers(int workers);

}  // namespace wlmc::engine
