#pragma once

#include "wlmc/constants.hpp"

namespace wlmc::analytic {

enum class Method { closed_form, quadrature };

struct EfficiencyResult {
  double value = 0.0;
  Method method = Method::closed_form;
};

/// TE Casimir-Polder efficiency for an atom in vacuum facing a dielectric
/// half-space, relative to the perfect-conductor potential:
///   eta_TE(chi) = 1/6 + 1/chi - sqrt(1+chi)/(2 chi) - asinh(sqrt(chi))/(2 chi^{3/2}).
/// A series expansion takes over below chi ~ 1e-3 where the closed form
/// cancels catastrophically.  Limits: chi -> inf gives 1/6, chi -> 0 gives
/// chi/40.
EfficiencyResult eta_te(double chi);

/// Independent oracle: adaptive double quadrature of the (s, lambda) integral
/// representation of the same potential, normalized to eta_TE.
EfficiencyResult eta_te_quadrature(double chi, double rel_tol = 1e-9);

/// Efficiency for an atom embedded in the dielectric side of the interface
/// (strictly positive for chi > 0), and its quadrature cross-check.
EfficiencyResult eta_te_prime(double chi);
EfficiencyResult eta_te_prime_quadrature(double chi, double rel_tol = 1e-9);

/// TE Casimir efficiency for two dielectric half-spaces, relative to the
/// perfect-conductor electromagnetic energy density:
///   gamma_TE = -(180/pi^4) int_0^inf dxi xi^2 int_1^inf dp p log[1 - r1 r2 e^{-2 p xi}]
/// with Fresnel factors r_i = (p - sqrt(p^2 + chi_i))/(p + sqrt(p^2 + chi_i));
/// chi = inf uses r = -1.  Converges to 1/2 as both chi -> inf.
EfficiencyResult gamma_te(double chi1, double chi2, double rel_tol = 1e-9);

/// Steady-state diffusion solution f(0) for one dielectric interface with
/// killing rate (s * chi) past the boundary and Laplace rate lambda:
///   d > 0 (source in vacuum):      (1/sqrt(2 lambda)) (1 + r e^{-2 sqrt(2 lambda) d})
///   d < 0 (source in dielectric):  (1/sqrt(2(lambda + s chi))) (1 - r e^{2 sqrt(2(lambda+s chi)) d})
/// with r = (sqrt(lambda) - sqrt(lambda + s chi))/(sqrt(lambda) + sqrt(lambda + s chi)).
double fk_one_step(double lambda, double s_strength, double chi, double d);

enum class FkRegion { I, II, III };

/// f(0) for the two-step potential (body 1 fills x < d1, body 2 fills x > d2,
/// killing rates chi1, chi2), in the three source regions:
///   I: source inside body 1 (requires 0 < d1), II: source in the gap
///   (d1 < 0 < d2), III: source inside body 2 (d2 < 0).
double fk_two_step(double lambda, double chi1, double chi2, double d1, double d2, FkRegion region);

/// Source-point integrals of the renormalized one- and two-interface f(0),
/// with the (lambda -> lambda + s, chi -> s chi) substitutions of the energy
/// representation:
///   I_i  = (1/(4(lambda+s)) - 1/(4(lambda+s(1+chi_i)))) r_i
///   I_12 = 2 r1 r2 d E/(sqrt(2(lambda+s)) Dlt) + (r1+r2)(1-E)/(4(lambda+s) Dlt)
///        + (r2 E - r1)/(4(lambda+s(1+chi1)) Dlt) + (r1 E - r2)/(4(lambda+s(1+chi2)) Dlt)
/// with E = e^{-2 sqrt(2(lambda+s)) d} and Dlt = 1 - r1 r2 E.
double fk_one_body_integral(double lambda, double s, double chi);
double fk_two_body_integral(double lambda, double s, double chi1, double chi2, double d);

/// TE Casimir energy per unit area from the (lambda, s) double integral,
/// natural units.  Cross-validates gamma_te: the result equals
/// -(pi^2/720 d^3) gamma_TE(chi1, chi2).
double casimir_density_quadrature(double chi1, double chi2, double d, double rel_tol = 1e-8);

/// TE contribution to the Casimir-Polder potential of a perfect conductor:
/// -hbar c alpha0 / (64 pi^2 eps0 d^4).  D = 4 only.
double vcp_perfect_conductor(double d, const PhysicalConstants& constants);

/// Reference magnitudes used for the normalized outputs:
/// 3 hbar c alpha0 / (32 pi^2 eps0 d^4) (total perfect-conductor CP strength)
/// and -hbar c pi^2 / (720 d^3) (perfect-conductor Casimir energy density).
double cp_reference_magnitude(double d, const PhysicalConstants& constants);
double casimir_reference(double d, const PhysicalConstants& constants);

}  // namespace wlmc::analytic
