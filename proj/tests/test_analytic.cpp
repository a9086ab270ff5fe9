#include <doctest.h>

#include "wlmc/analytic.hpp"
#include "wlmc/media.hpp"
#include "wlmc/quadrature.hpp"

#include <cmath>
#include <stdexcept>

using namespace wlmc;
using namespace wlmc::analytic;

TEST_CASE("eta_te limits and values") {
  CHECK(eta_te(media::kDirichlet).value == doctest::Approx(1.0 / 6.0));
  CHECK(eta_te(1e9).value == doctest::Approx(1.0 / 6.0).epsilon(1e-4));
  CHECK(eta_te(0.0).value == 0.0);
  // small chi: eta ~ chi/40
  CHECK(eta_te(0.01).value == doctest::Approx(0.01 / 40.0).epsilon(5e-3));
  CHECK(eta_te(1.0).value == doctest::Approx(0.0188731).epsilon(1e-5));
  CHECK_THROWS_AS(eta_te(-1.0), std::invalid_argument);
}

TEST_CASE("eta_te series joins the closed form smoothly") {
  // derivative-scale continuity across the 1e-3 switch
  const double below = eta_te(0.999e-3).value;
  const double above = eta_te(1.001e-3).value;
  CHECK(above - below == doctest::Approx(0.002e-3 / 40.0).epsilon(1e-2));
}

TEST_CASE("eta_te closed form vs double-quadrature oracle") {
  for (double chi : {0.1, 1.0, 10.0, 1000.0}) {
    const auto q = eta_te_quadrature(chi);
    CHECK(q.method == Method::quadrature);
    CHECK(q.value == doctest::Approx(eta_te(chi).value).epsilon(1e-8));
  }
  // the limit is approached as 1/6 - 1/(2 sqrt(chi)): at chi = 1e6 the exact
  // value still sits 5e-4 below 1/6, so the oracle is compared to the closed
  // form, not to the limit itself
  CHECK(eta_te_quadrature(1e6).value == doctest::Approx(eta_te(1e6).value).epsilon(1e-6));
  CHECK(std::abs(eta_te(1e6).value - 1.0 / 6.0) < 1e-3);
  // weak coupling: result/chi -> 1/40
  CHECK(eta_te_quadrature(1e-3).value / 1e-3 == doctest::Approx(1.0 / 40.0).epsilon(1e-3));
}

TEST_CASE("eta_te monotone increasing with supremum 1/6") {
  double prev = 0.0;
  for (double chi : {0.01, 0.1, 1.0, 10.0, 1e3, 1e6}) {
    const double v = eta_te(chi).value;
    CHECK(v > prev);
    CHECK(v < 1.0 / 6.0);
    prev = v;
  }
}

TEST_CASE("eta_te_prime positivity, limits, and quadrature oracle") {
  CHECK(eta_te_prime(0.0).value == 0.0);
  CHECK(eta_te_prime(1e-4).value == doctest::Approx(1e-4 / 40.0).epsilon(1e-2));
  for (double chi : {0.1, 1.0, 10.0, 1000.0}) {
    CHECK(eta_te_prime(chi).value > 0.0);
    CHECK(eta_te_prime_quadrature(chi).value ==
          doctest::Approx(eta_te_prime(chi).value).epsilon(1e-8));
  }
  // large chi decays to zero from above
  CHECK(eta_te_prime(1e8).value > 0.0);
  CHECK(eta_te_prime(1e8).value < 1e-10);
}

TEST_CASE("gamma_te values and limits") {
  CHECK(gamma_te(0.0, 5.0).value == 0.0);
  CHECK(gamma_te(media::kDirichlet, media::kDirichlet).value ==
        doctest::Approx(0.5).epsilon(1e-6));
  double prev = 0.0;
  for (double chi : {0.1, 1.0, 10.0, 1e3}) {
    const double v = gamma_te(chi, chi).value;
    CHECK(v > prev);
    CHECK(v < 0.5);
    prev = v;
  }
  // one-sided monotonicity in chi2
  CHECK(gamma_te(1.0, 2.0).value > gamma_te(1.0, 1.0).value);
}

TEST_CASE("casimir density equals the gamma route") {
  for (double chi : {0.1, 1.0, 10.0, 1e3}) {
    const double lhs = casimir_density_quadrature(chi, chi, 1.0);
    const double rhs = -M_PI * M_PI / 720.0 * gamma_te(chi, chi).value;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
  }
  SUBCASE("perfect-conductor limit is half the electromagnetic value") {
    CHECK(casimir_density_quadrature(media::kDirichlet, media::kDirichlet, 1.0) ==
          doctest::Approx(-M_PI * M_PI / 1440.0).epsilon(1e-6));
  }
  SUBCASE("chi1 = 0 kills the interaction") {
    CHECK(casimir_density_quadrature(0.0, 3.0, 1.0) == 0.0);
  }
  SUBCASE("distance scaling is d^-3") {
    const double d1 = casimir_density_quadrature(1.0, 1.0, 1.0);
    const double d2 = casimir_density_quadrature(1.0, 1.0, 2.0);
    CHECK(d2 == doctest::Approx(d1 / 8.0).epsilon(1e-6));
  }
}

TEST_CASE("one-step diffusion solution") {
  SUBCASE("chi = 0 gives the free value") {
    CHECK(fk_one_step(2.0, 1.0, 0.0, 0.7) == doctest::Approx(1.0 / std::sqrt(4.0)));
  }
  SUBCASE("far boundary decouples") {
    CHECK(fk_one_step(2.0, 1.0, 3.0, 50.0) == doctest::Approx(1.0 / 2.0).epsilon(1e-12));
  }
  SUBCASE("continuous across d = 0") {
    const double below = fk_one_step(1.0, 1.0, 2.0, -1e-12);
    const double above = fk_one_step(1.0, 1.0, 2.0, 1e-12);
    CHECK(below == doctest::Approx(above).epsilon(1e-9));
  }
  SUBCASE("dielectric-side value is smaller") {
    CHECK(fk_one_step(1.0, 1.0, 2.0, -0.5) < fk_one_step(1.0, 1.0, 2.0, 0.5));
  }
}

TEST_CASE("two-step diffusion solution") {
  SUBCASE("chi2 = 0 reduces region II to the single-interface form") {
    // with only body 1 (below d1 < 0) the solution is the mirrored one-step
    const double two = fk_two_step(1.3, 2.0, 0.0, -0.4, 0.9, FkRegion::II);
    const double one = [] {
      const double lambda = 1.3, chi = 2.0, d = 0.4;  // distance to the body below
      const double u = std::sqrt(lambda), v = std::sqrt(lambda + chi);
      const double r = (u - v) / (u + v);
      return (1.0 + r * std::exp(-2.0 * std::sqrt(2.0 * lambda) * d)) / (std::sqrt(2.0) * u);
    }();
    CHECK(two == doctest::Approx(one).epsilon(1e-12));
  }
  SUBCASE("both chi zero gives the free value in all regions") {
    CHECK(fk_two_step(2.0, 0, 0, 0.3, 0.9, FkRegion::I) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(fk_two_step(2.0, 0, 0, -0.3, 0.9, FkRegion::II) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(fk_two_step(2.0, 0, 0, -0.9, -0.3, FkRegion::III) == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("region / sign consistency is enforced") {
    CHECK_THROWS_AS(fk_two_step(1, 1, 1, -0.5, 0.5, FkRegion::I), std::invalid_argument);
    CHECK_THROWS_AS(fk_two_step(1, 1, 1, 0.2, 0.5, FkRegion::II), std::invalid_argument);
    CHECK_THROWS_AS(fk_two_step(1, 1, 1, -0.5, 0.5, FkRegion::III), std::invalid_argument);
    CHECK_THROWS_AS(fk_two_step(1, 1, 1, 0.5, 0.2, FkRegion::I), std::invalid_argument);
  }
}

TEST_CASE("source-integrated one- and two-body contributions") {
  SUBCASE("chi = 0 vanishes") { CHECK(fk_one_body_integral(1.0, 1.0, 0.0) == 0.0); }
  SUBCASE("wide gap decouples into one-body pieces") {
    const double near = fk_two_body_integral(1.0, 1.0, 1.0, 2.0, 40.0);
    const double sum = fk_one_body_integral(1.0, 1.0, 1.0) + fk_one_body_integral(1.0, 1.0, 2.0);
    CHECK(near == doctest::Approx(sum).epsilon(1e-12));
  }
  SUBCASE("renormalized combination is finite and positive") {
    // the spec example calls for a negative value here, but the printed
    // closed forms give  I12 - I1 - I2 = r1 r2 E (sqrt2 d + 1/v1 + 1/v2) /
    // (sqrt(lambda+s) Dlt) > 0; the energy's sign lives in the explicit
    // minus of the density integral (see decisions ledger)
    const double combo = fk_two_body_integral(1, 1, 1, 1, 1) -
                         2.0 * fk_one_body_integral(1, 1, 1);
    CHECK(std::isfinite(combo));
    CHECK(combo > 0.0);
    // cross-check against the reduced closed form
    const double u = std::sqrt(2.0), v = std::sqrt(3.0);
    const double r = (u - v) / (u + v);
    const double e2 = std::exp(-2.0 * std::sqrt(4.0));
    const double expect = r * r * e2 / (u * (1.0 - r * r * e2)) *
                          (std::sqrt(2.0) + 2.0 / v);
    CHECK(combo == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("perfect-conductor Casimir-Polder value") {
  PhysicalConstants k;
  CHECK(vcp_perfect_conductor(1.0, k) == doctest::Approx(-1.0 / (64.0 * M_PI * M_PI)));
  SUBCASE("equals the prefactor times the T integral of the crossing probability") {
    // int T^{-3} exp(-2 d^2/T) dT = 1/(4 d^4)
    const double d = 1.3;
    const double pref = k.hbar * k.c * k.alpha0 / (4.0 * std::pow(2.0 * M_PI, 2.0) * k.eps0);
    const auto integral = quadrature::integrate_half_line(
        [d](double T) { return T <= 0 ? 0.0 : std::pow(T, -3.0) * -std::exp(-2.0 * d * d / T); });
    CHECK(pref * integral.value == doctest::Approx(vcp_perfect_conductor(d, k)).epsilon(1e-8));
  }
  SUBCASE("doubling the distance divides by 16") {
    CHECK(vcp_perfect_conductor(2.0, k) ==
          doctest::Approx(vcp_perfect_conductor(1.0, k) / 16.0));
  }
  SUBCASE("only D = 4") {
    PhysicalConstants k5;
    k5.spacetime_dim = 5;
    CHECK_THROWS_AS(vcp_perfect_conductor(1.0, k5), std::invalid_argument);
  }
}

TEST_CASE("feynman-kac one-interface consistency between two- and one-step") {
  // zeroing one susceptibility must reduce the two-step solution exactly
  for (double lambda : {0.5, 2.0}) {
    const double a = fk_two_step(lambda, 0.0, 1.5, -0.7, 0.4, FkRegion::II);
    const double b = fk_one_step(lambda, 1.0, 1.5, 0.4);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}
