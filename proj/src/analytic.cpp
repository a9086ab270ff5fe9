#include "wlmc/analytic.hpp"

#include "wlmc/media.hpp"
#include "wlmc/quadrature.hpp"
#include "wlmc/special.hpp"

#include <cmath>
#include <stdexcept>

namespace wlmc::analytic {

namespace {

constexpr double kSeriesSwitch = 1e-3;

// r(p) = (p - sqrt(p^2 + chi))/(p + sqrt(p^2 + chi)) without the large-p
// cancellation: (p - v)(p + v) = -chi  =>  r = -chi/(p + v)^2.
double fresnel_r(double p, double chi) {
  if (media::is_dirichlet(chi)) return -1.0;
  if (chi == 0.0) return 0.0;
  const double v = std::sqrt(p * p + chi);
  return -chi / ((p + v) * (p + v));
}

}  // namespace

EfficiencyResult eta_te(double chi) {
  if (chi < 0.0) throw std::invalid_argument("eta_te: chi must be >= 0");
  if (media::is_dirichlet(chi)) return {1.0 / 6.0, Method::closed_form};
  if (chi == 0.0) return {0.0, Method::closed_form};
  if (chi < kSeriesSwitch) {
    const double v = chi / 40.0 - chi * chi / 112.0 + 5.0 * chi * chi * chi / 1152.0 -
                     7.0 * chi * chi * chi * chi / 2816.0;
    return {v, Method::closed_form};
  }
  const double v = 1.0 / 6.0 + 1.0 / chi - std::sqrt(1.0 + chi) / (2.0 * chi) -
                   std::asinh(std::sqrt(chi)) / (2.0 * chi * std::sqrt(chi));
  return {v, Method::closed_form};
}

EfficiencyResult eta_te_prime(double chi) {
  if (chi < 0.0) throw std::invalid_argument("eta_te_prime: chi must be >= 0");
  if (chi == 0.0) return {0.0, Method::closed_form};
  if (media::is_dirichlet(chi)) return {0.0, Method::closed_form};
  double bracket;
  if (chi < kSeriesSwitch) {
    bracket = chi / 40.0 - 11.0 * chi * chi / 140.0 + (281.0 / 5040.0) * chi * chi * chi;
  } else {
    bracket = 5.0 / 6.0 + 1.0 / chi - std::sqrt(1.0 + chi) / (2.0 * chi) -
              std::pow(1.0 + chi, 1.5) / (2.0 * chi * std::sqrt(chi)) * std::atan(std::sqrt(chi));
  }
  return {bracket * std::pow(1.0 + chi, -1.5), Method::closed_form};
}

namespace {

// Shared shape of the two Casimir-Polder quadrature oracles: the (s, lambda)
// double integral with the decaying exponential carried by either the vacuum
// (eta) or dielectric (eta') branch.  d = 1; the d-dependence is a pure
// power law.
double cp_double_integral(double chi, bool embedded, double rel_tol) {
  auto inner = [chi, embedded](double s) {
    auto f = [chi, embedded, s](double lambda) {
      const double u = std::sqrt(lambda + s);
      const double v = std::sqrt(lambda + s * (1.0 + chi));
      const double ratio = (v - u) / (v + u);
      const double q = embedded ? v : u;
      return std::exp(-2.0 * std::sqrt(2.0) * q) / q * ratio;
    };
    return quadrature::integrate_half_line(f, 1e-11, 1e-16).value;
  };
  auto outer = [&inner](double s) { return std::sqrt(s) * inner(s); };
  const auto r = quadrature::integrate_half_line(outer, rel_tol * 0.1, 1e-15);
  return (4.0 / 3.0) * r.value;
}

}  // namespace

EfficiencyResult eta_te_quadrature(double chi, double rel_tol) {
  if (!(chi > 0.0)) throw std::invalid_argument("eta_te_quadrature: chi must be > 0");
  if (media::is_dirichlet(chi)) return {1.0 / 6.0, Method::quadrature};
  return {cp_double_integral(chi, false, rel_tol), Method::quadrature};
}

EfficiencyResult eta_te_prime_quadrature(double chi, double rel_tol) {
  if (!(chi > 0.0)) throw std::invalid_argument("eta_te_prime_quadrature: chi must be > 0");
  return {cp_double_integral(chi, true, rel_tol), Method::quadrature};
}

EfficiencyResult gamma_te(double chi1, double chi2, double rel_tol) {
  if (chi1 < 0.0 || chi2 < 0.0) throw std::invalid_argument("gamma_te: chi must be >= 0");
  if (chi1 == 0.0 || chi2 == 0.0) return {0.0, Method::quadrature};
  // Inner p-integral rewritten with q = p * xi so the xi -> 0 limit is
  // regular:  xi^2 int_1^inf dp p log(...) = int_xi^inf dq q log(...)|_{p=q/xi}.
  auto outer = [chi1, chi2](double xi) {
    auto f = [chi1, chi2, xi](double q) {
      const double p = q / xi;
      const double x = fresnel_r(p, chi1) * fresnel_r(p, chi2) * std::exp(-2.0 * q);
      return q * std::log1p(-x);
    };
    auto shifted = [&f, xi](double u) { return f(xi + u); };
    return quadrature::integrate_half_line(shifted, 1e-10, 1e-15).value;
  };
  const auto r = quadrature::integrate_half_line(outer, rel_tol * 0.1, 1e-14);
  return {-180.0 / std::pow(M_PI, 4) * r.value, Method::quadrature};
}

double fk_one_step(double lambda, double s_strength, double chi, double d) {
  if (!(lambda > 0.0)) throw std::invalid_argument("fk_one_step: lambda must be > 0");
  if (s_strength < 0.0 || chi < 0.0) throw std::invalid_argument("fk_one_step: negative rate");
  const double kappa = s_strength * chi;  // killing rate past the boundary
  const double u = std::sqrt(lambda);
  const double v = std::sqrt(lambda + kappa);
  const double r = (u - v) / (u + v);
  if (d >= 0.0) return (1.0 + r * std::exp(-2.0 * std::sqrt(2.0 * lambda) * d)) / (std::sqrt(2.0) * u);
  return (1.0 - r * std::exp(2.0 * std::sqrt(2.0 * (lambda + kappa)) * d)) / (std::sqrt(2.0) * v);
}

double fk_two_step(double lambda, double chi1, double chi2, double d1, double d2, FkRegion region) {
  if (!(lambda > 0.0)) throw std::invalid_argument("fk_two_step: lambda must be > 0");
  if (!(d2 > d1)) throw std::invalid_argument("fk_two_step: requires d2 > d1");
  const double u = std::sqrt(lambda);
  const double v1 = std::sqrt(lambda + chi1);
  const double v2 = std::sqrt(lambda + chi2);
  const double r1 = (u - v1) / (u + v1);
  const double r2 = (u - v2) / (u + v2);
  const double d = d2 - d1;
  const double e2 = std::exp(-2.0 * std::sqrt(2.0 * lambda) * d);
  const double delta = 1.0 - r1 * r2 * e2;
  switch (region) {
    case FkRegion::I: {
      if (!(d1 > 0.0)) throw std::invalid_argument("fk_two_step: region I requires 0 < d1");
      const double damp = std::exp(-2.0 * std::sqrt(2.0 * (lambda + chi1)) * d1);
      return (1.0 + (r2 * e2 - r1) / delta * damp) / (std::sqrt(2.0) * v1);
    }
    case FkRegion::II: {
      if (!(d1 < 0.0 && d2 > 0.0))
        throw std::invalid_argument("fk_two_step: region II requires d1 < 0 < d2");
      const double sq = std::sqrt(2.0 * lambda);
      const double num = 2.0 * r1 * r2 * e2 + r1 * std::exp(2.0 * sq * d1) + r2 * std::exp(-2.0 * sq * d2);
      return (1.0 + num / delta) / (std::sqrt(2.0) * u);
    }
    case FkRegion::III: {
      if (!(d2 < 0.0)) throw std::invalid_argument("fk_two_step: region III requires d2 < 0");
      const double damp = std::exp(2.0 * std::sqrt(2.0 * (lambda + chi2)) * d2);
      return (1.0 + (r1 * e2 - r2) / delta * damp) / (std::sqrt(2.0) * v2);
    }
  }
  throw std::invalid_argument("fk_two_step: bad region");
}

double fk_one_body_integral(double lambda, double s, double chi) {
  if (!(lambda > 0.0)) throw std::invalid_argument("fk_one_body_integral: lambda must be > 0");
  const double le = lambda + s;
  const double ve = lambda + s * (1.0 + chi);
  const double r = (std::sqrt(le) - std::sqrt(ve)) / (std::sqrt(le) + std::sqrt(ve));
  return (1.0 / (4.0 * le) - 1.0 / (4.0 * ve)) * r;
}

double fk_two_body_integral(double lambda, double s, double chi1, double chi2, double d) {
  if (!(lambda > 0.0)) throw std::invalid_argument("fk_two_body_integral: lambda must be > 0");
  if (!(d > 0.0)) throw std::invalid_argument("fk_two_body_integral: d must be > 0");
  const double le = lambda + s;
  const double u = std::sqrt(le);
  const double v1 = std::sqrt(lambda + s * (1.0 + chi1));
  const double v2 = std::sqrt(lambda + s * (1.0 + chi2));
  const double r1 = (u - v1) / (u + v1);
  const double r2 = (u - v2) / (u + v2);
  const double e2 = std::exp(-2.0 * std::sqrt(2.0 * le) * d);
  const double delta = 1.0 - r1 * r2 * e2;
  return 2.0 * r1 * r2 * d * e2 / (std::sqrt(2.0 * le) * delta) +
         (r1 + r2) * (1.0 - e2) / (4.0 * le * delta) +
         (r2 * e2 - r1) / (4.0 * (v1 * v1) * delta) + (r1 * e2 - r2) / (4.0 * (v2 * v2) * delta);
}

double casimir_density_quadrature(double chi1, double chi2, double d, double rel_tol) {
  if (chi1 < 0.0 || chi2 < 0.0)
    throw std::invalid_argument("casimir_density_quadrature: chi must be >= 0");
  if (!(d > 0.0)) throw std::invalid_argument("casimir_density_quadrature: d must be > 0");
  if (chi1 == 0.0 || chi2 == 0.0) return 0.0;
  const bool dir1 = media::is_dirichlet(chi1), dir2 = media::is_dirichlet(chi2);
  auto outer = [=](double lambda) {
    auto f = [=](double s) {
      const double le = lambda + s;
      const double u = std::sqrt(le);
      const double v1 = dir1 ? 0.0 : std::sqrt(lambda + s * (1.0 + chi1));
      const double v2 = dir2 ? 0.0 : std::sqrt(lambda + s * (1.0 + chi2));
      const double r1 = dir1 ? -1.0 : (u - v1) / (u + v1);
      const double r2 = dir2 ? -1.0 : (u - v2) / (u + v2);
      const double e2 = std::exp(-2.0 * std::sqrt(2.0 * le) * d);
      const double core = r1 * r2 * e2 / (1.0 - r1 * r2 * e2);
      const double bracket = std::sqrt(2.0) * d + (dir1 ? 0.0 : 1.0 / v1) + (dir2 ? 0.0 : 1.0 / v2);
      // measure 1/sqrt(s (lambda+s)): the combination I12 - I1 - I2 of the
      // source-integrated solutions reduces to core * bracket / sqrt(lambda+s),
      // and the Dirichlet limit then integrates to exactly -pi^2/1440 d^3
      return core * bracket / std::sqrt(s * le);
    };
    return lambda * quadrature::integrate_half_line(f, 1e-10, 1e-16).value;
  };
  const auto r = quadrature::integrate_half_line(outer, rel_tol * 0.1, 1e-14);
  return -std::sqrt(2.0) / (8.0 * M_PI * M_PI) * r.value;
}

double vcp_perfect_conductor(double d, const PhysicalConstants& k) {
  k.validate();
  if (k.spacetime_dim != 4)
    throw std::invalid_argument("vcp_perfect_conductor: only D = 4 is supported");
  if (!(d > 0.0)) throw std::invalid_argument("vcp_perfect_conductor: d must be > 0");
  return -k.hbar * k.c * k.alpha0 / (64.0 * M_PI * M_PI * k.eps0 * d * d * d * d);
}

double cp_reference_magnitude(double d, const PhysicalConstants& k) {
  k.validate();
  return 3.0 * k.hbar * k.c * k.alpha0 / (32.0 * M_PI * M_PI * k.eps0 * d * d * d * d);
}

double casimir_reference(double d, const PhysicalConstants& k) {
  k.validate();
  return -k.hbar * k.c * M_PI * M_PI / (720.0 * d * d * d);
}

}  // namespace wlmc::analytic
