#include "wlmc/engine.hpp"

#include "wlmc/analytic.hpp"
#include "wlmc/bridge.hpp"
#include "wlmc/special.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wlmc::engine {

const char* to_string(Estimator e) {
  switch (e) {
    case Estimator::trapezoid: return "trapezoid";
    case Estimator::interpolation: return "interpolation";
    case Estimator::dirichlet: return "dirichlet";
    case Estimator::mgf_segment: return "mgf_segment";
    case Estimator::sojourn_sample: return "sojourn_sample";
  }
  return "?";
}

const char* to_string(Reduction r) { return r == Reduction::ordered ? "ordered" : "free"; }

void RunConfig::validate() const {
  constants.validate();
  if (n_steps < 1) throw std::invalid_argument("RunConfig: n_steps must be >= 1");
  if (n_paths < 1) throw std::invalid_argument("RunConfig: n_paths must be >= 1");
  if (estimator == Estimator::dirichlet && !geometry.dirichlet())
    throw std::invalid_argument("RunConfig: dirichlet estimator requires chi = inf markers");
}

namespace {

void require_pointwise_estimator(const RunConfig& cfg, const char* where) {
  if (cfg.estimator == Estimator::mgf_segment || cfg.estimator == Estimator::sojourn_sample)
    throw std::invalid_argument(std::string(where) +
                                ": accelerated estimators have dedicated entry points");
}

}  // namespace

int resolve_workers(int workers) {
#ifdef _OPENMP
  return workers > 0 ? workers : omp_get_max_threads();
#else
  (void)workers;
  return 1;
#endif
}

DrawT sample_T(double T0, int spacetime_dim, double u) {
  return sample_T_power(T0, 0.5 * spacetime_dim, u);
}

DrawT sample_T_power(double T0, double kappa, double u) {
  if (!(T0 > 0.0) || std::isinf(T0)) throw std::invalid_argument("sample_T: T0 must be positive and finite");
  if (!(kappa > 0.0)) throw std::invalid_argument("sample_T: kappa must be positive");
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("sample_T: u must be in [0,1)");
  DrawT d;
  d.T = T0 * std::pow(1.0 - u, -1.0 / kappa);
  d.weight = 1.0 / (kappa * std::pow(T0, kappa));
  return d;
}

DrawX0 sample_x0(double d0, double u) {
  if (!(d0 > 0.0)) throw std::invalid_argument("sample_x0: d0 must be positive");
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("sample_x0: u must be in [0,1)");
  u = std::max(u, 0x1.0p-53);
  DrawX0 out;
  if (u < 0.125) {
    out.x0 = -d0 / std::cbrt(8.0 * u);
  } else if (u <= 0.875) {
    out.x0 = d0 * (8.0 * u - 4.0) / 3.0;
  } else {
    out.x0 = d0 / std::cbrt(8.0 * (1.0 - u));
  }
  const double a = std::abs(out.x0);
  const double p = (a < d0) ? 3.0 / (8.0 * d0)
                            : 3.0 * d0 * d0 * d0 / (8.0 * a * a * a * a);
  out.weight = 1.0 / p;
  return out;
}

// -----------------------------------------------------------------------------
// parallel driver
// -----------------------------------------------------------------------------

namespace {
constexpr std::size_t kBlock = 4096;  // fixed block structure, independent of workers
}

std::vector<stats::Accumulator> run_paths(
    std::size_t n_paths, std::size_t n_columns, std::uint64_t seed, int workers, Reduction red,
    const std::function<void(std::size_t, rng::Stream&, std::span<double>)>& per_path) {
  const std::size_t n_blocks = (n_paths + kBlock - 1) / kBlock;
  const int n_workers = resolve_workers(workers);

  auto run_block = [&](std::size_t b, std::vector<stats::Accumulator>& acc,
                       std::vector<double>& buf) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(lo + kBlock, n_paths);
    for (std::size_t i = lo; i < hi; ++i) {
      rng::Stream stream(rng::StreamSpec{seed, i});
      std::fill(buf.begin(), buf.end(), 0.0);
      per_path(i, stream, buf);
      for (std::size_t c = 0; c < n_columns; ++c) acc[c].add(buf[c]);
    }
  };

  if (red == Reduction::ordered) {
    std::vector<std::vector<stats::Accumulator>> block_acc(
        n_blocks, std::vector<stats::Accumulator>(n_columns));
#ifdef _OPENMP
#pragma omp parallel num_threads(n_workers)
    {
      std::vector<double> buf(n_columns);
#pragma omp for schedule(dynamic)
      for (long long b = 0; b < static_cast<long long>(n_blocks); ++b)
        run_block(static_cast<std::size_t>(b), block_acc[b], buf);
    }
#else
    std::vector<double> buf(n_columns);
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b, block_acc[b], buf);
#endif
    std::vector<stats::Accumulator> total(n_columns);
    for (std::size_t b = 0; b < n_blocks; ++b)
      for (std::size_t c = 0; c < n_columns; ++c) total[c] = stats::merge(total[c], block_acc[b][c]);
    return total;
  }

  // free mode: per-thread accumulators merged in thread order
  std::vector<std::vector<stats::Accumulator>> thread_acc(
      static_cast<std::size_t>(n_workers), std::vector<stats::Accumulator>(n_columns));
#ifdef _OPENMP
#pragma omp parallel num_threads(n_workers)
  {
    const int tid = omp_get_thread_num();
    std::vector<double> buf(n_columns);
#pragma omp for schedule(dynamic)
    for (long long b = 0; b < static_cast<long long>(n_blocks); ++b)
      run_block(static_cast<std::size_t>(b), thread_acc[tid], buf);
  }
#else
  std::vector<double> buf(n_columns);
  for (std::size_t b = 0; b < n_blocks; ++b) run_block(b, thread_acc[0], buf);
#endif
  std::vector<stats::Accumulator> total(n_columns);
  for (const auto& ta : thread_acc)
    for (std::size_t c = 0; c < n_columns; ++c) total[c] = stats::merge(total[c], ta[c]);
  return total;
}

// -----------------------------------------------------------------------------
// Casimir-Polder estimators
// -----------------------------------------------------------------------------

namespace {

struct HalfSpaceSetup {
  double boundary = 0.0;
  double chi = 0.0;
  bool dielectric_above = true;
  double distance = 0.0;   // atom-to-interface distance
  double eps_ref = 1.0;    // eps at the atom
  bool embedded = false;
};

HalfSpaceSetup cp_setup(const RunConfig& cfg, CpMode mode, double atom_position) {
  if (cfg.geometry.kind() != media::DielectricProfile::Kind::half_space)
    throw std::invalid_argument("estimate_cp: half-space geometry required");
  HalfSpaceSetup s;
  s.boundary = cfg.geometry.boundary();
  s.chi = cfg.geometry.chi();
  s.dielectric_above = cfg.geometry.side() == media::Side::above;
  const double signed_dist =
      s.dielectric_above ? s.boundary - atom_position : atom_position - s.boundary;
  s.embedded = mode == CpMode::embedded;
  if (!s.embedded && !(signed_dist > 0.0))
    throw std::invalid_argument("estimate_cp: vacuum mode needs the atom on the vacuum side");
  if (s.embedded && !(signed_dist < 0.0))
    throw std::invalid_argument("estimate_cp: embedded mode needs the atom inside the dielectric");
  s.distance = std::abs(signed_dist);
  s.eps_ref = s.embedded ? 1.0 + s.chi : 1.0;
  return s;
}

// Fraction of path points on the dielectric side, thresholds in bridge units.
double frac_trapezoid(std::span<const double> b, std::size_t stride, std::size_t n, double thr,
                      bool above) {
  std::size_t count = 0;
  if (above) {
    for (std::size_t k = 0; k < n; ++k) count += b[k * stride] >= thr;
  } else {
    for (std::size_t k = 0; k < n; ++k) count += b[k * stride] <= thr;
  }
  return static_cast<double>(count) / static_cast<double>(n);
}

double frac_interpolated(std::span<const double> b, std::size_t stride, std::size_t n, double thr,
                         bool above) {
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = b[k * stride], y = b[(k + 1) * stride];
    double lo = std::min(x, y), hi = std::max(x, y);
    double f;
    if (above) {
      if (lo >= thr) f = 1.0;
      else if (hi <= thr) f = 0.0;
      else f = (hi - thr) / (hi - lo);
    } else {
      if (hi <= thr) f = 1.0;
      else if (lo >= thr) f = 0.0;
      else f = (thr - lo) / (hi - lo);
    }
    sum += f;
  }
  return sum / static_cast<double>(n);
}

double cp_integrand_from_frac(double chi, double frac, double eps_ref_pow) {
  if (media::is_dirichlet(chi)) return frac > 0.0 ? -1.0 : 0.0;
  return std::pow(1.0 + chi * frac, -1.5) - eps_ref_pow;
}

double cp_prefactor(const PhysicalConstants& k) {
  return k.hbar * k.c * k.alpha0 / (4.0 * std::pow(2.0 * M_PI, 0.5 * k.spacetime_dim) * k.eps0);
}

RunResult finish_cp(const RunConfig& cfg, const stats::Accumulator& acc, bool embedded,
                    double distance, double wall) {
  const double pref = cp_prefactor(cfg.constants);
  RunResult r;
  r.estimate = pref * acc.mean;
  r.std_error = pref * acc.std_error();
  r.n_paths_used = acc.count;
  r.wall_seconds = wall;
  if (cfg.constants.spacetime_dim == 4) {
    const double ref = analytic::cp_reference_magnitude(distance, cfg.constants);
    const double sign = embedded ? 1.0 : -1.0;
    r.normalized = sign * r.estimate / ref;
    r.normalized_std_error = r.std_error / ref;
  }
  return r;
}

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

}  // namespace

std::vector<RunResult> estimate_cp_sweep(const RunConfig& cfg, CpMode mode, double atom_position,
                                         std::span<const double> chi_list) {
  cfg.validate();
  require_pointwise_estimator(cfg, "estimate_cp");
  const HalfSpaceSetup base = cp_setup(cfg, mode, atom_position);
  if (chi_list.empty()) throw std::invalid_argument("estimate_cp_sweep: empty chi list");
  if (base.embedded)
    for (double chi : chi_list)
      if (media::is_dirichlet(chi))
        throw std::invalid_argument("estimate_cp: embedded atom has no Dirichlet limit");
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = cfg.n_steps;
  const int D = cfg.constants.spacetime_dim;
  const bool interp = cfg.estimator == Estimator::interpolation;
  ScratchPool pool(resolve_workers(cfg.workers), n + 1);
  std::vector<double> chis(chi_list.begin(), chi_list.end());
  std::vector<double> eps_ref_pow(chis.size());
  for (std::size_t c = 0; c < chis.size(); ++c) {
    const double er = base.embedded ? 1.0 + chis[c] : 1.0;
    eps_ref_pow[c] = media::is_dirichlet(chis[c]) ? 0.0 : std::pow(er, -1.5);
  }

  auto per_path = [&](std::size_t, rng::Stream& stream, std::span<double> out) {
    auto b = pool.get();
    bridges::fill_vloop(b, stream);
    const auto [lo, hi] = bridges::extremes(std::span<const double>(b));
    // reach toward the interface: max for an atom below the body, |min| above
    const bool reach_up = base.embedded ? !base.dielectric_above : base.dielectric_above;
    const double reach = reach_up ? hi : -lo;
    if (!(reach > 0.0)) return;  // degenerate path never touches
    const double T0 = (base.distance / reach) * (base.distance / reach);
    const auto draw = sample_T(T0, D, stream.uniform());
    const double thr = (base.dielectric_above ? base.distance : -base.distance) *
                       (base.embedded ? -1.0 : 1.0) / std::sqrt(draw.T);
    const double frac = interp ? frac_interpolated(b, 1, n, thr, base.dielectric_above)
                               : frac_trapezoid(b, 1, n, thr, base.dielectric_above);
    for (std::size_t c = 0; c < chis.size(); ++c)
      out[c] = cp_integrand_from_frac(chis[c], frac, eps_ref_pow[c]) * draw.weight;
  };

  auto acc = run_paths(cfg.n_paths, chis.size(), cfg.seed, cfg.workers, cfg.reduction, per_path);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::vector<RunResult> results;
  results.reserve(chis.size());
  for (std::size_t c = 0; c < chis.size(); ++c)
    results.push_back(finish_cp(cfg, acc[c], base.embedded, base.distance, wall));
  return results;
}

RunResult estimate_cp(const RunConfig& cfg, CpMode mode, double atom_position) {
  const double chi = cfg.geometry.chi();
  if (cfg.estimator == Estimator::dirichlet && !media::is_dirichlet(chi))
    throw std::invalid_argument("estimate_cp: dirichlet estimator requires chi = inf");
  const double chis[1] = {chi};
  return estimate_cp_sweep(cfg, mode, atom_position, chis)[0];
}

RunResult estimate_cp_dirichlet_closed(const RunConfig& cfg, double atom_position) {
  cfg.validate();
  const HalfSpaceSetup base = cp_setup(cfg, CpMode::vacuum, atom_position);
  if (!media::is_dirichlet(base.chi))
    throw std::invalid_argument("estimate_cp_dirichlet_closed: requires chi = inf");
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = cfg.n_steps;
  const double D = cfg.constants.spacetime_dim;
  ScratchPool pool(resolve_workers(cfg.workers), n + 1);

  auto per_path = [&](std::size_t, rng::Stream& stream, std::span<double> out) {
    auto b = pool.get();
    bridges::fill_vloop(b, stream);
    const auto [lo, hi] = bridges::extremes(std::span<const double>(b));
    const double reach = base.dielectric_above ? hi : -lo;
    if (!(reach > 0.0)) return;
    const double T0 = (base.distance / reach) * (base.distance / reach);
    // per-path T integral of T^{-1-D/2} over [T0, inf): (2/D) T0^{-D/2}
    out[0] = -(2.0 / D) * std::pow(T0, -0.5 * D);
  };

  auto acc = run_paths(cfg.n_paths, 1, cfg.seed, cfg.workers, cfg.reduction, per_path);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return finish_cp(cfg, acc[0], false, base.distance, wall);
}

// -----------------------------------------------------------------------------
// Casimir (gap) estimator
// -----------------------------------------------------------------------------

namespace {

double casimir_combo(double chi1, double chi2, double f1, double f2, bool x0_in_1, bool x0_in_2) {
  auto inv_sqrt_mix = [](double chi, double f) {
    if (media::is_dirichlet(chi)) return f > 0.0 ? 0.0 : 1.0;
    return 1.0 / std::sqrt(1.0 + chi * f);
  };
  auto inv_sqrt_point = [](double chi, bool inside) {
    if (media::is_dirichlet(chi)) return inside ? 0.0 : 1.0;
    return inside ? 1.0 / std::sqrt(1.0 + chi) : 1.0;
  };
  double avg12;
  if (media::is_dirichlet(chi1) || media::is_dirichlet(chi2)) {
    if ((media::is_dirichlet(chi1) && f1 > 0.0) || (media::is_dirichlet(chi2) && f2 > 0.0))
      avg12 = 0.0;
    else
      avg12 = 1.0 / std::sqrt(1.0 + (media::is_dirichlet(chi1) ? 0.0 : chi1 * f1) +
                              (media::is_dirichlet(chi2) ? 0.0 : chi2 * f2));
  } else {
    avg12 = 1.0 / std::sqrt(1.0 + chi1 * f1 + chi2 * f2);
  }
  const double ref12 = x0_in_1 ? inv_sqrt_point(chi1, true)
                               : (x0_in_2 ? inv_sqrt_point(chi2, true) : 1.0);
  const double t12 = ref12 - avg12;
  const double t1 = inv_sqrt_point(chi1, x0_in_1) - inv_sqrt_mix(chi1, f1);
  const double t2 = inv_sqrt_point(chi2, x0_in_2) - inv_sqrt_mix(chi2, f2);
  return t12 - t1 - t2;
}

}  // namespace

namespace {

std::vector<RunResult> run_casimir_pairs(const RunConfig& cfg,
                                         const std::vector<std::pair<double, double>>& pairs) {
  cfg.validate();
  require_pointwise_estimator(cfg, "estimate_casimir");
  if (cfg.geometry.kind() != media::DielectricProfile::Kind::gap)
    throw std::invalid_argument("estimate_casimir: gap geometry required");
  if (pairs.empty()) throw std::invalid_argument("estimate_casimir: empty chi list");
  const auto t0c = std::chrono::steady_clock::now();
  const double d1 = cfg.geometry.d1(), d2 = cfg.geometry.d2();
  const double gap = d2 - d1;
  const double center = 0.5 * (d1 + d2);
  const double d0 = cfg.d0 > 0.0 ? cfg.d0 : gap;
  const std::size_t n = cfg.n_steps;
  const int D = cfg.constants.spacetime_dim;
  const bool interp = cfg.estimator == Estimator::interpolation;
  ScratchPool pool(resolve_workers(cfg.workers), n + 1);

  auto per_path = [&](std::size_t, rng::Stream& stream, std::span<double> out) {
    auto b = pool.get();
    bridges::fill_vloop(b, stream);
    const auto [lo, hi] = bridges::extremes(std::span<const double>(b));
    const auto dx = sample_x0(d0, stream.uniform());
    const double x0 = center + dx.x0;
    // first-touch toward each body; zero when x0 already sits inside it
    double T1 = 0.0, T2 = 0.0;
    if (x0 > d1) {
      if (!(lo < 0.0)) return;
      const double r = (x0 - d1) / (-lo);
      T1 = r * r;
    }
    if (x0 < d2) {
      if (!(hi > 0.0)) return;
      const double r = (d2 - x0) / hi;
      T2 = r * r;
    }
    const double T0 = std::max(T1, T2);
    const auto draw = sample_T(T0, D, stream.uniform());
    const double s = std::sqrt(draw.T);
    const double f1 = interp ? frac_interpolated(b, 1, n, (d1 - x0) / s, false)
                             : frac_trapezoid(b, 1, n, (d1 - x0) / s, false);
    const double f2 = interp ? frac_interpolated(b, 1, n, (d2 - x0) / s, true)
                             : frac_trapezoid(b, 1, n, (d2 - x0) / s, true);
    const bool in1 = x0 <= d1, in2 = x0 >= d2;
    const double w = dx.weight * draw.weight;
    for (std::size_t c = 0; c < pairs.size(); ++c)
      out[c] = casimir_combo(pairs[c].first, pairs[c].second, f1, f2, in1, in2) * w;
  };

  auto acc = run_paths(cfg.n_paths, pairs.size(), cfg.seed, cfg.workers, cfg.reduction, per_path);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0c).count();
  const double pref = cfg.constants.hbar * cfg.constants.c /
                      (2.0 * std::pow(2.0 * M_PI, 0.5 * cfg.constants.spacetime_dim));
  std::vector<RunResult> results;
  for (std::size_t c = 0; c < pairs.size(); ++c) {
    RunResult r;
    r.estimate = pref * acc[c].mean;
    r.std_error = pref * acc[c].std_error();
    r.n_paths_used = acc[c].count;
    r.wall_seconds = wall;
    if (cfg.constants.spacetime_dim == 4) {
      const double ref = analytic::casimir_reference(gap, cfg.constants);
      r.normalized = r.estimate / ref;
      r.normalized_std_error = r.std_error / std::abs(ref);
    }
    results.push_back(r);
  }
  return results;
}

}  // namespace

std::vector<RunResult> estimate_casimir_sweep(const RunConfig& cfg,
                                              std::span<const double> chi_list) {
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(chi_list.size());
  for (double chi : chi_list) pairs.emplace_back(chi, chi);
  return run_casimir_pairs(cfg, pairs);
}

RunResult estimate_casimir(const RunConfig& cfg) {
  return run_casimir_pairs(cfg, {{cfg.geometry.chi1(), cfg.geometry.chi2()}})[0];
}

// -----------------------------------------------------------------------------
// convergence sweep
// -----------------------------------------------------------------------------

namespace {

std::size_t sweep_nmax(std::span<const std::size_t> n_list) {
  const std::size_t n_max = *std::max_element(n_list.begin(), n_list.end());
  for (auto n : n_list)
    if (n < 1 || n_max % n != 0)
      throw std::invalid_argument("convergence_sweep: every N must divide max(N)");
  return n_max;
}

SweepResult convergence_sweep_cp(const RunConfig& base, std::span<const std::size_t> n_list,
                                 std::span<const SweepColumn> columns) {
  const std::size_t n_max = sweep_nmax(n_list);
  const int D = base.constants.spacetime_dim;
  const double distance = base.geometry.boundary();  // atom at the origin
  if (base.geometry.side() != media::Side::above || !(distance > 0.0))
    throw std::invalid_argument(
        "convergence_sweep: half-space must lie above the atom (boundary > 0)");
  const std::size_t n_points = n_list.size() * columns.size();
  const std::size_t n_cols = 2 * n_points;  // values, then differences to the finest N
  ScratchPool pool(resolve_workers(base.workers), n_max + 1);
  std::vector<std::size_t> ns(n_list.begin(), n_list.end());
  std::vector<SweepColumn> cols(columns.begin(), columns.end());
  const std::size_t a_max =
      std::max_element(ns.begin(), ns.end()) - ns.begin();

  auto per_path = [&](std::size_t, rng::Stream& stream, std::span<double> out) {
    auto b = pool.get();
    bridges::fill_vloop(b, stream);
    const double u = stream.uniform();  // one T draw shared by every column and N
    for (std::size_t a = 0; a < ns.size(); ++a) {
      const std::size_t n = ns[a];
      const std::size_t stride = n_max / n;
      double hi = 0.0;
      for (std::size_t k = 1; k < n; ++k) hi = std::max(hi, b[k * stride]);
      if (!(hi > 0.0)) continue;
      const double T0 = (distance / hi) * (distance / hi);
      const auto draw = sample_T(T0, D, u);
      const double thr = distance / std::sqrt(draw.T);
      double f_trap = -1.0, f_int = -1.0;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto& col = cols[c];
        double value;
        if (col.estimator == Estimator::dirichlet) {
          value = -(2.0 / D) * std::pow(T0, -0.5 * D);  // closed-form T integral
        } else if (col.estimator == Estimator::interpolation) {
          if (f_int < 0.0) f_int = frac_interpolated(b, stride, n, thr, true);
          value = cp_integrand_from_frac(col.chi, f_int, 1.0) * draw.weight;
        } else {
          if (f_trap < 0.0) f_trap = frac_trapezoid(b, stride, n, thr, true);
          value = cp_integrand_from_frac(col.chi, f_trap, 1.0) * draw.weight;
        }
        out[a * cols.size() + c] = value;
      }
    }
    for (std::size_t a = 0; a < ns.size(); ++a)
      for (std::size_t c = 0; c < cols.size(); ++c)
        out[n_points + a * cols.size() + c] =
            out[a * cols.size() + c] - out[a_max * cols.size() + c];
  };

  auto acc = run_paths(base.n_paths, n_cols, base.seed, base.workers, base.reduction, per_path);
  const double pref = cp_prefactor(base.constants);
  const double ref = analytic::cp_reference_magnitude(distance, base.constants);
  SweepResult sweep;
  for (std::size_t a = 0; a < ns.size(); ++a) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto& acc_ac = acc[a * cols.size() + c];
      const auto& acc_diff = acc[n_points + a * cols.size() + c];
      SweepPoint p;
      p.column = cols[c];
      p.n_steps = ns[a];
      p.normalized = -pref * acc_ac.mean / ref;
      p.normalized_std_error = pref * acc_ac.std_error() / ref;
      p.oracle = analytic::eta_te(p.column.chi).value;
      p.rel_error = p.normalized / p.oracle - 1.0;
      p.rel_error_se = p.normalized_std_error / p.oracle;
      p.diff_to_finest = -pref * acc_diff.mean / (ref * p.oracle);
      p.diff_to_finest_se = pref * acc_diff.std_error() / (ref * p.oracle);
      sweep.points.push_back(p);
    }
  }
  return sweep;
}

SweepResult convergence_sweep_casimir(const RunConfig& base, std::span<const std::size_t> n_list,
                                      std::span<const SweepColumn> columns) {
  const std::size_t n_max = sweep_nmax(n_list);
  const int D = base.constants.spacetime_dim;
  const double d1 = base.geometry.d1(), d2 = base.geometry.d2();
  const double gap = d2 - d1;
  const double center = 0.5 * (d1 + d2);
  const double d0 = base.d0 > 0.0 ? base.d0 : gap;
  const std::size_t n_points = n_list.size() * columns.size();
  const std::size_t n_cols = 2 * n_points;
  ScratchPool pool(resolve_workers(base.workers), n_max + 1);
  std::vector<std::size_t> ns(n_list.begin(), n_list.end());
  std::vector<SweepColumn> cols(columns.begin(), columns.end());
  const std::size_t a_max = std::max_element(ns.begin(), ns.end()) - ns.begin();

  auto per_path = [&](std::size_t, rng::Stream& stream, std::span<double> out) {
    auto b = pool.get();
    bridges::fill_vloop(b, stream);
    const auto dx = sample_x0(d0, stream.uniform());
    const double x0 = center + dx.x0;
    const double u = stream.uniform();
    for (std::size_t a = 0; a < ns.size(); ++a) {
      const std::size_t n = ns[a];
      const std::size_t stride = n_max / n;
      double lo = 0.0, hi = 0.0;
      for (std::size_t k = 1; k < n; ++k) {
        lo = std::min(lo, b[k * stride]);
        hi = std::max(hi, b[k * stride]);
      }
      double T1 = 0.0, T2 = 0.0;
      if (x0 > d1) {
        if (!(lo < 0.0)) continue;
        const double r = (x0 - d1) / (-lo);
        T1 = r * r;
      }
      if (x0 < d2) {
        if (!(hi > 0.0)) continue;
        const double r = (d2 - x0) / hi;
        T2 = r * r;
      }
      const double T0 = std::max(T1, T2);
      const auto draw = sample_T(T0, D, u);
      const double s = std::sqrt(draw.T);
      const double thr1 = (d1 - x0) / s, thr2 = (d2 - x0) / s;
      double ft1 = -1.0, ft2 = -1.0, fi1 = -1.0, fi2 = -1.0;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto& col = cols[c];
        double value;
        if (col.estimator == Estimator::dirichlet) {
          value = -(2.0 / D) * std::pow(T0, -0.5 * D) * dx.weight;
        } else if (col.estimator == Estimator::interpolation) {
          if (fi1 < 0.0) {
            fi1 = frac_interpolated(b, stride, n, thr1, false);
            fi2 = frac_interpolated(b, stride, n, thr2, true);
          }
          value = casimir_combo(col.chi, col.chi, fi1, fi2, x0 <= d1, x0 >= d2) * dx.weight *
                  draw.weight;
        } else {
          if (ft1 < 0.0) {
            ft1 = frac_trapezoid(b, stride, n, thr1, false);
            ft2 = frac_trapezoid(b, stride, n, thr2, true);
          }
          value = casimir_combo(col.chi, col.chi, ft1, ft2, x0 <= d1, x0 >= d2) * dx.weight *
                  draw.weight;
        }
        out[a * cols.size() + c] = value;
      }
    }
    for (std::size_t a = 0; a < ns.size(); ++a)
      for (std::size_t c = 0; c < cols.size(); ++c)
        out[n_points + a * cols.size() + c] =
            out[a * cols.size() + c] - out[a_max * cols.size() + c];
  };

  auto acc = run_paths(base.n_paths, n_cols, base.seed, base.workers, base.reduction, per_path);
  const double pref = base.constants.hbar * base.constants.c /
                      (2.0 * std::pow(2.0 * M_PI, 0.5 * D));
  const double ref = analytic::casimir_reference(gap, base.constants);
  SweepResult sweep;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const double oracle = media::is_dirichlet(cols[c].chi)
                              ? 0.5
                              : analytic::gamma_te(cols[c].chi, cols[c].chi).value;
    for (std::size_t a = 0; a < ns.size(); ++a) {
      const auto& acc_ac = acc[a * cols.size() + c];
      const auto& acc_diff = acc[n_points + a * cols.size() + c];
      SweepPoint p;
      p.column = cols[c];
      p.n_steps = ns[a];
      p.normalized = pref * acc_ac.mean / ref;
      p.normalized_std_error = pref * acc_ac.std_error() / std::abs(ref);
      p.oracle = oracle;
      p.rel_error = p.normalized / p.oracle - 1.0;
      p.rel_error_se = p.normalized_std_error / p.oracle;
      p.diff_to_finest = pref * acc_diff.mean / (ref * p.oracle);
      p.diff_to_finest_se = pref * acc_diff.std_error() / (std::abs(ref) * p.oracle);
      sweep.points.push_back(p);
    }
  }
  return sweep;
}

}  // namespace

SweepResult convergence_sweep(const RunConfig& base, std::span<const std::size_t> n_list,
                              std::span<const SweepColumn> columns) {
  base.validate();
  if (n_list.empty() || columns.empty())
    throw std::invalid_argument("convergence_sweep: empty grid");
  switch (base.geometry.kind()) {
    case media::DielectricProfile::Kind::half_space:
      return convergence_sweep_cp(base, n_list, columns);
    case media::DielectricProfile::Kind::gap:
      return convergence_sweep_casimir(base, n_list, columns);
    default:
      throw std::invalid_argument("convergence_sweep: needs a half-space or gap geometry");
  }
}

double fitted_slope_diff(const SweepResult& sweep, const SweepColumn& column, std::size_t n_lo,
                         std::size_t n_hi, double snr_threshold) {
  struct Pt {
    double n, d, w;
  };
  std::vector<Pt> pts;
  double n_finest = 0.0;
  for (const auto& p : sweep.points) {
    if (p.column.chi != column.chi || p.column.estimator != column.estimator) continue;
    n_finest = std::max(n_finest, static_cast<double>(p.n_steps));
  }
  for (const auto& p : sweep.points) {
    if (p.column.chi != column.chi || p.column.estimator != column.estimator) continue;
    if (p.n_steps < n_lo || p.n_steps > n_hi) continue;
    if (static_cast<double>(p.n_steps) == n_finest) continue;
    if (!(p.diff_to_finest_se > 0.0) ||
        std::abs(p.diff_to_finest) < snr_threshold * p.diff_to_finest_se)
      continue;
    pts.push_back({static_cast<double>(p.n_steps), p.diff_to_finest,
                   1.0 / (p.diff_to_finest_se * p.diff_to_finest_se)});
  }
  if (pts.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  // chi^2(p) for diff = c (N^-p - Nfinest^-p), c solved analytically
  auto chi2 = [&](double p) {
    double num = 0.0, den = 0.0;
    for (const auto& q : pts) {
      const double phi = std::pow(q.n, -p) - std::pow(n_finest, -p);
      num += q.w * q.d * phi;
      den += q.w * phi * phi;
    }
    const double c = den > 0.0 ? num / den : 0.0;
    double s = 0.0;
    for (const auto& q : pts) {
      const double phi = std::pow(q.n, -p) - std::pow(n_finest, -p);
      const double r = q.d - c * phi;
      s += q.w * r * r;
    }
    return s;
  };
  double lo = 0.05, hi = 3.0;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = chi2(x1), f2 = chi2(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = chi2(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = chi2(x2);
    }
  }
  return -0.5 * (lo + hi);
}

double fitted_slope(const SweepResult& sweep, const SweepColumn& column, std::size_t n_lo,
                    std::size_t n_hi, double snr_threshold) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (const auto& p : sweep.points) {
    if (p.column.chi != column.chi || p.column.estimator != column.estimator) continue;
    if (p.n_steps < n_lo || p.n_steps > n_hi) continue;
    const double mag = std::abs(p.rel_error);
    if (!(p.rel_error_se > 0.0) || mag < snr_threshold * p.rel_error_se) continue;
    const double x = std::log(static_cast<double>(p.n_steps));
    const double y = std::log(mag);
    const double w = std::min((mag / p.rel_error_se) * (mag / p.rel_error_se), 1e6);
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
    ++used;
  }
  if (used < 2) return std::numeric_limits<double>::quiet_NaN();
  const double denom = sw * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return (sw * sxy - sx * sy) / denom;
}

}  // namespace wlmc::engine
