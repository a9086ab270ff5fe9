#include "wlmc/sojourn.hpp"

#include "wlmc/quadrature.hpp"
#include "wlmc/rng.hpp"
#include "wlmc/special.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wlmc::sojourn {

using special::erfcx;
using special::exp_times_erfc;

namespace {

constexpr double kSeamTol = 1e-12;   // exact-tie tolerance between case branches
constexpr double kMgfSeam = 0.1;     // below this the straddling MGF integrand
                                     // cancels catastrophically; use the density route

void check_time(double t) {
  if (!(t > 0.0)) throw std::invalid_argument("sojourn: elapsed time must be positive");
}

// Continuous part of the density of tau = T_s / t, case a <= d, c <= d
// (da = (d-a)/sqrt(t) >= 0, dc = (d-c)/sqrt(t) >= 0).  The exponents are
// combined so every exp argument is <= 0.
double ftau_both_below(double da, double dc, double tau) {
  const double sigma = da + dc;
  const double nu = da - dc;
  if (sigma < kSeamTol) return 1.0;  // pinned on the boundary: uniform occupation
  const double omt = 1.0 - tau;
  double term_a = 0.0;
  if (tau > 0.0 && omt > 0.0) {
    const double expo = 0.5 * nu * nu - 0.5 * sigma * sigma / omt;
    term_a = sigma * std::sqrt(2.0 * omt / (M_PI * tau)) * std::exp(expo);
    const double z = sigma * std::sqrt(tau / (2.0 * omt));
    term_a += (1.0 - sigma * sigma) * std::exp(-2.0 * da * dc) * std::erfc(z);
  }
  return term_a;
}

// Continuous density, case a <= d <= c (da >= 0, dc <= 0).
double ftau_straddle(double da, double dc, double tau) {
  const double beta = -dc;
  const double nu = da + beta;
  const double sigma = da - beta;
  const double omt = 1.0 - tau;
  if (!(tau > 0.0 && omt > 0.0)) return 0.0;
  const double expo = 0.5 * nu * nu - 0.5 * beta * beta / tau - 0.5 * da * da / omt;
  double f = std::sqrt(2.0 / M_PI) * (beta * tau + da * omt) / std::sqrt(tau * omt) *
             std::exp(expo);
  const double denom = 2.0 * tau * omt;
  const double z = (beta * omt + da * tau) / std::sqrt(denom);
  const double diff = beta * omt - da * tau;
  f += (1.0 - sigma * sigma) * erfcx(z) * std::exp(-diff * diff / denom);
  return f;
}

// Density of tau for any parameter ordering; endpoint reversal (a <-> c
// leaves the law invariant) plus the sign-reversal mirror reduce everything
// to the two forms above.
double ftau(double da, double dc, double tau) {
  if (da < dc) std::swap(da, dc);
  if (dc >= 0.0) return ftau_both_below(da, dc, tau);
  if (da <= 0.0) return ftau_both_below(-dc, -da, 1.0 - tau);
  return ftau_straddle(da, dc, tau);
}

struct ScaledParams {
  double da = 0.0;
  double dc = 0.0;
  double atom0 = 0.0;
  double atom_t = 0.0;
};

ScaledParams scale(const SojournParams& p) {
  check_time(p.t);
  const double sq = std::sqrt(p.t);
  ScaledParams s;
  s.da = (p.d - p.a) / sq;
  s.dc = (p.d - p.c) / sq;
  if (s.da >= 0.0 && s.dc >= 0.0) s.atom0 = -std::expm1(-2.0 * s.da * s.dc);
  if (s.da <= 0.0 && s.dc <= 0.0) s.atom_t = -std::expm1(-2.0 * s.da * s.dc);
  return s;
}

}  // namespace

SojournDensity density(const SojournParams& p) {
  check_time(p.t);
  SojournDensity out;
  if (std::isinf(p.d)) {
    if (p.d > 0.0) out.atom_at_zero = 1.0;
    else out.atom_at_t = 1.0;
    out.continuous = [](double) { return 0.0; };
    return out;
  }
  const ScaledParams s = scale(p);
  out.atom_at_zero = s.atom0;
  out.atom_at_t = s.atom_t;
  const double t = p.t, da = s.da, dc = s.dc;
  out.continuous = [t, da, dc](double x) {
    if (!(x > 0.0 && x < t)) return 0.0;
    return ftau(da, dc, x / t) / t;
  };
  return out;
}

namespace {

// MGF for the one-sided case a <= d, c <= d, written in the substituted
// variable rho (y = sigma^2 / (sigma^2 + rho^2)) where the integrand is
// smooth and positive for every sigma >= 0:
//   MGF = atom0 + 2/(sqrt(2 pi) S) * int_0^inf (z^2/rho^2)(1 - e^{-S rho^2/z^2})
//                                    e^{-2 da dc - rho^2/2} drho,  z^2 = sigma^2 + rho^2.
double mgf_both_below(double da, double dc, double S) {
  const double sigma = da + dc;
  const double atom0 = -std::expm1(-2.0 * da * dc);
  const double cross = std::exp(-2.0 * da * dc);
  auto integrand = [sigma, S, cross](double rho) {
    const double rho2 = rho * rho;
    const double z2 = sigma * sigma + rho2;
    const double x = S * rho2 / z2;
    const double term = -std::expm1(-x) * z2 / rho2;
    return term * cross * std::exp(-0.5 * rho2);
  };
  const auto r = quadrature::integrate_half_line(integrand, 1e-10, 1e-14);
  return atom0 + 2.0 / (std::sqrt(2.0 * M_PI) * S) * r.value;
}

// Mirror (T -> t - T) of the one-sided form, for d <= a, d <= c.
double mgf_both_above(double da, double dc, double S) {
  const double mda = -dc, mdc = -da;  // mirrored one-sided parameters
  const double sigma = mda + mdc;
  const double atom_t = -std::expm1(-2.0 * mda * mdc);
  const double cross = std::exp(-2.0 * mda * mdc);
  const double ens = std::exp(-S);
  auto integrand = [sigma, S, cross, ens](double rho) {
    const double rho2 = rho * rho;
    const double z2 = sigma * sigma + rho2;
    const double up = S * rho2 / z2;  // in [0, S]
    double diff;                      // e^{-S sigma^2/z^2} - e^{-S}, in [0, 1]
    if (up > 700.0) diff = std::exp(-S * sigma * sigma / z2);
    else diff = ens * std::expm1(up);
    return diff * (z2 / rho2) * cross * std::exp(-0.5 * rho2);
  };
  const auto r = quadrature::integrate_half_line(integrand, 1e-10, 1e-14);
  return ens * atom_t + 2.0 / (std::sqrt(2.0 * M_PI) * S) * r.value;
}

// Straddling case a <= d <= c via the printed integrand, mapped by
// y = sin^2(theta).  Ill-conditioned for min(da, -dc) -> 0 (handled by the
// caller through the density route).
double mgf_straddle(double da, double dc, double S) {
  const double beta = -dc;
  const double nu = da + beta;
  auto integrand = [da, beta, nu, S](double theta) {
    const double sn = std::sin(theta), cn = std::cos(theta);
    const double s2 = sn * sn, c2 = cn * cn;
    const double expo =
        0.5 * nu * nu - 0.5 * da * da / c2 - 0.5 * beta * beta / s2 - S * s2;
    if (expo < -700.0) return 0.0;
    const double num = da * c2 * (beta * beta - s2) - beta * s2 * (da * da - c2);
    return 2.0 * num * std::exp(expo) / (s2 * s2 * c2 * c2);
  };
  const auto r = quadrature::integrate(integrand, 0.0, 0.5 * M_PI, 1e-10, 1e-14);
  return r.value / (std::sqrt(2.0 * M_PI) * S);
}

}  // namespace

double mgf(const SojournParams& p, double s) {
  check_time(p.t);
  if (s < 0.0) throw std::invalid_argument("mgf: s must be >= 0");
  if (s == 0.0) return 1.0;
  if (std::isinf(p.d)) return p.d > 0.0 ? 1.0 : std::exp(-s * p.t);
  const double sq = std::sqrt(p.t);
  double da = (p.d - p.a) / sq;
  double dc = (p.d - p.c) / sq;
  if (da < dc) std::swap(da, dc);  // endpoint reversal, T_s law invariant
  const double S = s * p.t;
  if (dc >= 0.0) return std::min(1.0, mgf_both_below(da, dc, S));
  if (da <= 0.0) return std::min(1.0, mgf_both_above(da, dc, S));
  // The printed straddling-case integrand is a cancelling difference: near the
  // case seams, and for small S where it collapses to an O(S) residual of
  // O(1) pieces, integrate the (positive) Laplace transform of the density
  // instead.
  if (std::min(da, -dc) < kMgfSeam || S < 0.05) return mgf_via_density(p, s);
  try {
    return std::min(1.0, mgf_straddle(da, dc, S));
  } catch (const quadrature::numerical_error&) {
    return mgf_via_density(p, s);  // cancellation starved the printed form
  }
}

double mgf_via_density(const SojournParams& p, double s) {
  check_time(p.t);
  if (s < 0.0) throw std::invalid_argument("mgf_via_density: s must be >= 0");
  const ScaledParams sp = scale(p);
  const double S = s * p.t;
  const double da = sp.da, dc = sp.dc;
  // tau = w^2 and tau = 1 - v^2 substitutions absorb the inverse-sqrt
  // endpoint behavior of the continuous density.
  auto lower = [da, dc, S](double w) {
    const double tau = w * w;
    return 2.0 * w * ftau(da, dc, tau) * std::exp(-S * tau);
  };
  auto upper = [da, dc, S](double v) {
    const double tau = 1.0 - v * v;
    return 2.0 * v * ftau(da, dc, tau) * std::exp(-S * tau);
  };
  const double half = std::sqrt(0.5);
  const auto rl = quadrature::integrate(lower, 0.0, half, 1e-10, 1e-14);
  const auto ru = quadrature::integrate(upper, 0.0, half, 1e-10, 1e-14);
  return sp.atom0 + sp.atom_t * std::exp(-S) + rl.value + ru.value;
}

double mean(const SojournParams& p) {
  check_time(p.t);
  if (std::isinf(p.d)) return p.d > 0.0 ? 0.0 : p.t;
  const double sq = std::sqrt(p.t);
  const double da = (p.d - p.a) / sq;
  const double dc = (p.d - p.c) / sq;
  const double sigma = da + dc;
  const double nu = da - dc;
  double m = 0.5 * p.t;
  if ((da >= 0.0 && dc >= 0.0) || (da <= 0.0 && dc <= 0.0)) {
    const double sgn = sigma > 0.0 ? 1.0 : (sigma < 0.0 ? -1.0 : 0.0);
    m += sgn * 0.5 * p.t * std::expm1(-2.0 * da * dc);
  }
  const double z = (std::abs(da) + std::abs(dc)) / std::sqrt(2.0);
  m -= std::sqrt(M_PI / 8.0) * p.t * sigma * exp_times_erfc(0.5 * nu * nu, z);
  return std::clamp(m, 0.0, p.t);
}

double crossing_probability(double d, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("crossing_probability: T must be positive");
  if (d <= 0.0) return 1.0;
  return std::exp(-2.0 * d * d / T);
}

// ---------------------------------------------------------------------------
// Numeric CDF of the continuous part and its inversion.
//
// tau is parameterized as tau(z) = (1 - cos(pi z))/2 on z in [0, 1]; the
// Jacobian regularizes the 1/sqrt(tau) endpoint behavior of the one-sided
// density, and the cumulative is assembled per-step with Simpson's rule.
// ---------------------------------------------------------------------------

namespace {

struct ContCdf {
  int panels;
  std::vector<double> node;  // f~ at z_m
  std::vector<double> mid;   // f~ at panel midpoints
  std::vector<double> G;     // cumulative at z_m
  double total = 0.0;

  static double tau_of_z(double z) { return 0.5 * (1.0 - std::cos(M_PI * z)); }

  ContCdf(double da, double dc, int m_panels) : panels(m_panels) {
    auto ftilde = [da, dc](double z) {
      z = std::clamp(z, 1e-12, 1.0 - 1e-12);
      return ftau(da, dc, tau_of_z(z)) * 0.5 * M_PI * std::sin(M_PI * z);
    };
    node.resize(panels + 1);
    mid.resize(panels);
    G.resize(panels + 1);
    const double h = 1.0 / panels;
    for (int m = 0; m <= panels; ++m) node[m] = ftilde(m * h);
    for (int m = 0; m < panels; ++m) mid[m] = ftilde((m + 0.5) * h);
    G[0] = 0.0;
    for (int m = 0; m < panels; ++m)
      G[m + 1] = G[m] + h / 6.0 * (node[m] + 4.0 * mid[m] + node[m + 1]);
    total = G[panels];
  }

  // tau at which the cumulative reaches `target` (0 <= target <= total).
  double quantile(double target) const {
    if (target <= 0.0) return 0.0;
    if (target >= total) return 1.0;
    const auto it = std::upper_bound(G.begin(), G.end(), target);
    int m = static_cast<int>(it - G.begin()) - 1;
    m = std::clamp(m, 0, panels - 1);
    const double h = 1.0 / panels;
    const double want = target - G[m];
    // invert the per-panel Simpson parabola with Newton, zeta in [0, 1]
    const double f0 = node[m], fm = mid[m], f1 = node[m + 1];
    auto cumul = [&](double zeta) {
      const double z2 = zeta * zeta, z3 = z2 * zeta;
      return h * (f0 * (zeta - 1.5 * z2 + (2.0 / 3.0) * z3) + fm * (2.0 * z2 - (4.0 / 3.0) * z3) +
                  f1 * (-0.5 * z2 + (2.0 / 3.0) * z3));
    };
    auto deriv = [&](double zeta) {
      const double z2 = zeta * zeta;
      return h * (f0 * (1.0 - 3.0 * zeta + 2.0 * z2) + fm * (4.0 * zeta - 4.0 * z2) +
                  f1 * (-zeta + 2.0 * z2));
    };
    const double seg = G[m + 1] - G[m];
    double zeta = seg > 0.0 ? want / seg : 0.5;
    for (int i = 0; i < 3; ++i) {
      const double d = deriv(zeta);
      if (d <= 0.0) break;
      zeta -= (cumul(zeta) - want) / d;
      zeta = std::clamp(zeta, 0.0, 1.0);
    }
    return tau_of_z((m + zeta) * h);
  }
};

}  // namespace

double sample_sojourn_direct(const SojournParams& p, double u) {
  check_time(p.t);
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("sample_sojourn: u must be in [0,1)");
  if (std::isinf(p.d)) return p.d > 0.0 ? 0.0 : p.t;
  const ScaledParams s = scale(p);
  if (u < s.atom0) return 0.0;
  if (u >= 1.0 - s.atom_t) return p.t;
  const double mass = 1.0 - s.atom0 - s.atom_t;
  const ContCdf cdf(s.da, s.dc, 512);
  const double tau = cdf.quantile((u - s.atom0) / mass * cdf.total);
  return tau * p.t;
}

struct FrozenSojournSampler::Impl {
  ContCdf cdf;
  Impl(double da, double dc) : cdf(da, dc, 512) {}
};

FrozenSojournSampler::FrozenSojournSampler(const SojournParams& p) : params_(p) {
  const ScaledParams s = scale(p);
  atom0_ = s.atom0;
  atom_t_ = s.atom_t;
  if (1.0 - atom0_ - atom_t_ > 1e-14 && !std::isinf(p.d)) impl_ = new Impl(s.da, s.dc);
}

FrozenSojournSampler::~FrozenSojournSampler() { delete impl_; }

FrozenSojournSampler::FrozenSojournSampler(FrozenSojournSampler&& other) noexcept
    : params_(other.params_), atom0_(other.atom0_), atom_t_(other.atom_t_), impl_(other.impl_) {
  other.impl_ = nullptr;
}

FrozenSojournSampler& FrozenSojournSampler::operator=(FrozenSojournSampler&& other) noexcept {
  std::swap(params_, other.params_);
  std::swap(atom0_, other.atom0_);
  std::swap(atom_t_, other.atom_t_);
  std::swap(impl_, other.impl_);
  return *this;
}

double FrozenSojournSampler::sample(double u) const {
  if (!(u >= 0.0 && u < 1.0))
    throw std::invalid_argument("FrozenSojournSampler: u must be in [0,1)");
  if (u < atom0_) return 0.0;
  if (u >= 1.0 - atom_t_ || !impl_) return params_.t;
  const double mass = 1.0 - atom0_ - atom_t_;
  const double tau = impl_->cdf.quantile((u - atom0_) / mass * impl_->cdf.total);
  return tau * params_.t;
}

// ---------------------------------------------------------------------------
// SojournTables
// ---------------------------------------------------------------------------

namespace {

double catmull_rom(double p0, double p1, double p2, double p3, double s) {
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * s + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * s * s +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * s * s * s);
}

double cheb_u(int k, int count) { return 0.5 * (1.0 - std::cos(M_PI * k / (count - 1))); }

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* b = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= b[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

SojournTables SojournTables::build(const GridSpec& spec) {
  if (spec.nu_count < 4 || spec.delta_count < 4 || spec.n_quantiles < 8 ||
      !(spec.nu_min > 0.0 && spec.nu_max > spec.nu_min) || !(spec.delta_max > spec.delta_min))
    throw std::invalid_argument("SojournTables::build: bad grid spec");
  SojournTables tab;
  tab.spec_ = spec;
  tab.data_.assign(static_cast<std::size_t>(spec.nu_count) * spec.delta_count * spec.n_quantiles,
                   0.0f);
  const double dlog = std::log(spec.nu_max / spec.nu_min) / (spec.nu_count - 1);
  const double ddelta = (spec.delta_max - spec.delta_min) / (spec.delta_count - 1);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int i = 0; i < spec.nu_count; ++i) {
    const double nu = spec.nu_min * std::exp(dlog * i);
    for (int j = 0; j < spec.delta_count; ++j) {
      const double delta = spec.delta_min + ddelta * j;
      const double da = delta, dc = delta - nu;
      double atom0 = 0.0, atom_t = 0.0;
      if (da >= 0.0 && dc >= 0.0) atom0 = -std::expm1(-2.0 * da * dc);
      if (da <= 0.0 && dc <= 0.0) atom_t = -std::expm1(-2.0 * da * dc);
      const double mass = 1.0 - atom0 - atom_t;
      float* cell =
          tab.data_.data() + (static_cast<std::size_t>(i) * spec.delta_count + j) * spec.n_quantiles;
      if (mass < 1e-12) {
        // atom-dominated corner; sample() never reaches the table here
        for (int k = 0; k < spec.n_quantiles; ++k) cell[k] = 0.5f;
        continue;
      }
      const ContCdf cdf(da, dc, 512);
      for (int k = 0; k < spec.n_quantiles; ++k) {
        const double u = cheb_u(k, spec.n_quantiles);
        cell[k] = static_cast<float>(cdf.quantile(u * cdf.total));
      }
    }
  }

  // probe the interpolation error against direct inversion
  rng::Stream probe(rng::StreamSpec{0xC0FFEEull, 17});
  double worst = 0.0;
  for (int trial = 0; trial < 1500; ++trial) {
    const double nu = spec.nu_min * std::exp(probe.uniform() * std::log(spec.nu_max / spec.nu_min));
    const double delta = spec.delta_min + probe.uniform() * (spec.delta_max - spec.delta_min);
    const double u = probe.uniform();
    const double da = delta, dc = delta - nu;
    double atom0 = 0.0, atom_t = 0.0;
    if (da >= 0.0 && dc >= 0.0) atom0 = -std::expm1(-2.0 * da * dc);
    if (da <= 0.0 && dc <= 0.0) atom_t = -std::expm1(-2.0 * da * dc);
    if (1.0 - atom0 - atom_t < 1e-6) continue;
    const ContCdf cdf(da, dc, 512);
    const double exact = cdf.quantile(u * cdf.total);
    const double approx = tab.quantile_interp(nu, delta, u);
    worst = std::max(worst, std::abs(exact - approx));
  }
  tab.interp_error_bound_ = worst;
  return tab;
}

double SojournTables::quantile_interp(double nu, double delta, double u_cont) const {
  const auto& g = spec_;
  const double dlog = std::log(g.nu_max / g.nu_min) / (g.nu_count - 1);
  const double ddelta = (g.delta_max - g.delta_min) / (g.delta_count - 1);
  // quantile bracket: invert the Chebyshev map for the index
  const int K = g.n_quantiles;
  u_cont = std::clamp(u_cont, 0.0, 1.0);
  const double theta = std::acos(std::clamp(1.0 - 2.0 * u_cont, -1.0, 1.0));
  int k0 = std::clamp(static_cast<int>(theta * (K - 1) / M_PI), 0, K - 2);
  const double u0 = cheb_u(k0, K), u1 = cheb_u(k0 + 1, K);
  const double wu = u1 > u0 ? std::clamp((u_cont - u0) / (u1 - u0), 0.0, 1.0) : 0.0;

  const double xi = std::clamp(std::log(nu / g.nu_min) / dlog, 0.0, double(g.nu_count - 1));
  int i1 = std::clamp(static_cast<int>(xi), 0, g.nu_count - 2);
  const double si = xi - i1;
  const double yj = std::clamp((delta - g.delta_min) / ddelta, 0.0, double(g.delta_count - 1));
  int j1 = std::clamp(static_cast<int>(yj), 0, g.delta_count - 2);
  const double sj = yj - j1;

  auto q_at = [&](int i, int j) {
    i = std::clamp(i, 0, g.nu_count - 1);
    j = std::clamp(j, 0, g.delta_count - 1);
    const double a = at(i, j, k0), b = at(i, j, k0 + 1);
    return a + (b - a) * wu;
  };
  double cols[4];
  for (int di = -1; di <= 2; ++di) {
    const int i = i1 + di;
    cols[di + 1] = catmull_rom(q_at(i, j1 - 1), q_at(i, j1), q_at(i, j1 + 1), q_at(i, j1 + 2), sj);
  }
  return std::clamp(catmull_rom(cols[0], cols[1], cols[2], cols[3], si), 0.0, 1.0);
}

double SojournTables::sample(const SojournParams& p, double u) const {
  check_time(p.t);
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("sample: u must be in [0,1)");
  if (std::isinf(p.d)) return p.d > 0.0 ? 0.0 : p.t;
  const double sq = std::sqrt(p.t);
  double nu = (p.c - p.a) / sq;
  double delta = (p.d - p.a) / sq;
  bool mirrored = false;
  if (nu < 0.0) {
    // sign-reversal mirror: T = t - T', and flipping the deviate keeps the
    // quantile map pointwise identical to the unmirrored one
    // (Q(u) = t - Q'(1 - u))
    nu = -nu;
    delta = -delta;
    u = 1.0 - u;
    mirrored = true;
  }
  const double da = delta, dc = delta - nu;
  double atom0 = 0.0, atom_t = 0.0;
  if (da >= 0.0 && dc >= 0.0) atom0 = -std::expm1(-2.0 * da * dc);
  if (da <= 0.0 && dc <= 0.0) atom_t = -std::expm1(-2.0 * da * dc);
  double tau;
  if (u < atom0) {
    tau = 0.0;
  } else if (u >= 1.0 - atom_t) {
    tau = 1.0;
  } else {
    const double mass = 1.0 - atom0 - atom_t;
    const double ucont = (u - atom0) / mass;
    const bool in_range = nu >= spec_.nu_min && nu <= spec_.nu_max && delta >= spec_.delta_min &&
                          delta <= spec_.delta_max && mass > 1e-9;
    if (in_range) {
      tau = quantile_interp(nu, delta, ucont);
    } else {
      const ContCdf cdf(da, dc, 512);
      tau = cdf.quantile(ucont * cdf.total);
    }
  }
  if (mirrored) tau = 1.0 - tau;
  return tau * p.t;
}

namespace {
constexpr char kTableMagic[4] = {'W', 'L', 'S', 'J'};
constexpr std::uint32_t kTableVersion = 1;
}  // namespace

void SojournTables::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("SojournTables::save: cannot open " + path);
  out.write(kTableMagic, 4);
  auto put = [&out](const auto& v) { out.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
  put(kTableVersion);
  put(spec_.nu_min);
  put(spec_.nu_max);
  put(spec_.nu_count);
  put(spec_.delta_min);
  put(spec_.delta_max);
  put(spec_.delta_count);
  put(spec_.n_quantiles);
  put(interp_error_bound_);
  const std::uint64_t checksum = fnv1a(data_.data(), data_.size() * sizeof(float));
  put(checksum);
  out.write(reinterpret_cast<const char*>(data_.data()),
            static_cast<std::streamsize>(data_.size() * sizeof(float)));
  if (!out) throw std::runtime_error("SojournTables::save: write failed");
}

SojournTables SojournTables::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("SojournTables::load: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kTableMagic, 4) != 0)
    throw std::runtime_error("SojournTables::load: bad magic");
  auto get = [&in](auto& v) { in.read(reinterpret_cast<char*>(&v), sizeof(v)); };
  std::uint32_t version = 0;
  get(version);
  if (version != kTableVersion) throw std::runtime_error("SojournTables::load: version mismatch");
  SojournTables tab;
  get(tab.spec_.nu_min);
  get(tab.spec_.nu_max);
  get(tab.spec_.nu_count);
  get(tab.spec_.delta_min);
  get(tab.spec_.delta_max);
  get(tab.spec_.delta_count);
  get(tab.spec_.n_quantiles);
  get(tab.interp_error_bound_);
  std::uint64_t checksum = 0;
  get(checksum);
  tab.data_.resize(static_cast<std::size_t>(tab.spec_.nu_count) * tab.spec_.delta_count *
                   tab.spec_.n_quantiles);
  in.read(reinterpret_cast<char*>(tab.data_.data()),
          static_cast<std::streamsize>(tab.data_.size() * sizeof(float)));
  if (!in) throw std::runtime_error("SojournTables::load: truncated file");
  if (fnv1a(tab.data_.data(), tab.data_.size() * sizeof(float)) != checksum)
    throw std::runtime_error("SojournTables::load: checksum mismatch");
  return tab;
}

// ---------------------------------------------------------------------------
// MgfTable
// ---------------------------------------------------------------------------

MgfTable MgfTable::build(double S, const Spec& spec) {
  if (!(S > 0.0)) throw std::invalid_argument("MgfTable::build: S must be positive");
  MgfTable tab;
  tab.spec_ = spec;
  tab.S_ = S;
  tab.exp_neg_s_ = std::exp(-S);
  const int n = spec.nu_count_per_side;
  const int cols = 2 * n + 1;  // nu_i = (i - n) * h
  tab.data_.assign(static_cast<std::size_t>(cols) * spec.delta_count, 0.0);
  const double hnu = spec.nu_max / n;
  const double dd = (spec.delta_max - spec.delta_min) / (spec.delta_count - 1);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int col = 0; col < cols; ++col) {
    const double nu = (col - n) * hnu;
    for (int j = 0; j < spec.delta_count; ++j) {
      const double delta = spec.delta_min + dd * j;
      tab.data_[static_cast<std::size_t>(col) * spec.delta_count + j] =
          mgf(SojournParams{0.0, nu, 1.0, delta}, S);
    }
  }

  rng::Stream probe(rng::StreamSpec{0xBEEFull, 3});
  double worst = 0.0;
  for (int trial = 0; trial < 600; ++trial) {
    const double nu = (probe.uniform() * 2.0 - 1.0) * 0.9 * spec.nu_max;
    const double delta = spec.delta_min + probe.uniform() * (spec.delta_max - spec.delta_min);
    const double exact = mgf(SojournParams{0.0, nu, 1.0, delta}, S);
    const double approx = tab.interp(nu, delta);
    worst = std::max(worst, std::abs(exact - approx));
  }
  tab.interp_error_bound_ = worst;
  return tab;
}

double MgfTable::interp(double nu, double delta) const {
  const auto& g = spec_;
  const int n = g.nu_count_per_side;
  const double dd = (g.delta_max - g.delta_min) / (g.delta_count - 1);
  const double yj = std::clamp((delta - g.delta_min) / dd, 0.0, double(g.delta_count - 1));
  const int j1 = std::clamp(static_cast<int>(yj), 0, g.delta_count - 2);
  const double sj = yj - j1;

  auto cell = [&](int col, int j) {
    j = std::clamp(j, 0, g.delta_count - 1);
    return data_[static_cast<std::size_t>(col) * g.delta_count + j];
  };
  auto col_at_delta = [&](int col) {
    col = std::clamp(col, 0, 2 * n);
    return catmull_rom(cell(col, j1 - 1), cell(col, j1), cell(col, j1 + 1), cell(col, j1 + 2), sj);
  };

  const double hnu = g.nu_max / n;
  const double xi = std::clamp(nu / hnu + n, 0.0, double(2 * n));
  const int i1 = std::clamp(static_cast<int>(xi), 0, 2 * n - 1);
  const double si = xi - i1;
  return catmull_rom(col_at_delta(i1 - 1), col_at_delta(i1), col_at_delta(i1 + 1),
                     col_at_delta(i1 + 2), si);
}

double MgfTable::value(double nu, double delta) const {
  const double other = delta - nu;  // scaled distance boundary-to-endpoint c
  const double lo = std::min(delta, other);
  const double hi = std::max(delta, other);
  if (lo >= spec_.snap_distance) return 1.0;         // boundary unreachable
  if (hi <= -spec_.snap_distance) return exp_neg_s_;  // full sojourn
  double qnu = nu, qdelta = delta;
  if (qdelta < spec_.delta_min || qdelta > spec_.delta_max) {
    // endpoint reversal maps (nu, delta) -> (-nu, delta - nu) with the same MGF
    if (other >= spec_.delta_min && other <= spec_.delta_max) {
      qnu = -nu;
      qdelta = other;
    } else {
      return mgf(SojournParams{0.0, nu, 1.0, delta}, S_);
    }
  }
  if (std::abs(qnu) > spec_.nu_max) return mgf(SojournParams{0.0, nu, 1.0, delta}, S_);
  return std::clamp(interp(qnu, qdelta), 0.0, 1.0);
}

}  // namespace wlmc::sojourn
