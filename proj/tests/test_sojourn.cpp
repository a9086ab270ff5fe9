#include <doctest.h>

#include "wlmc/quadrature.hpp"
#include "wlmc/rng.hpp"
#include "wlmc/sojourn.hpp"
#include "wlmc/special.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

using namespace wlmc;
using sojourn::SojournParams;

namespace {

// int_0^t g(x) f_cont(x) dx with sqrt-substituted halves (the continuous
// density has integrable inverse-sqrt endpoints in the one-sided cases)
double integrate_against(const sojourn::SojournDensity& d, double t,
                         const std::function<double(double)>& g) {
  const double half = std::sqrt(0.5);
  auto lower = [&](double w) {
    const double x = w * w * t;
    return 2.0 * w * t * d.continuous(x) * g(x);
  };
  auto upper = [&](double v) {
    const double x = (1.0 - v * v) * t;
    return 2.0 * v * t * d.continuous(x) * g(x);
  };
  return quadrature::integrate(lower, 0.0, half, 1e-10, 1e-14).value +
         quadrature::integrate(upper, 0.0, half, 1e-10, 1e-14).value;
}

const std::vector<SojournParams> four_case_grid() {
  std::vector<SojournParams> grid;
  for (double a : {-1.0, -0.3, 0.4})
    for (double c : {-0.8, 0.2, 1.1})
      for (double d : {-0.9, -0.1, 0.6, 1.4})
        for (double t : {0.5, 1.0, 2.5}) grid.push_back({a, c, t, d});
  return grid;
}

}  // namespace

TEST_CASE("density atoms in the unreachable-boundary limits") {
  CHECK(sojourn::density({0, 0, 1, special::inf()}).atom_at_zero == 1.0);
  CHECK(sojourn::density({0, 0, 1, -special::inf()}).atom_at_t == 1.0);
  // large finite boundary behaves the same
  CHECK(sojourn::density({0, 0, 1, 40.0}).atom_at_zero == doctest::Approx(1.0));
}

TEST_CASE("bridge atom weight 1 - exp(-2 d^2) at a = c = 0, t = 1") {
  for (double d : {0.25, 0.5, 1.0, 2.0}) {
    const auto den = sojourn::density({0, 0, 1, d});
    CHECK(den.atom_at_zero == doctest::Approx(1.0 - std::exp(-2.0 * d * d)).epsilon(1e-12));
    CHECK(den.atom_at_t == 0.0);
  }
}

TEST_CASE("normalization over the four-case grid") {
  for (const auto& p : four_case_grid()) {
    const auto den = sojourn::density(p);
    const double total = den.atom_at_zero + den.atom_at_t +
                         integrate_against(den, p.t, [](double) { return 1.0; });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("mirror symmetry of the density") {
  for (const auto& p : four_case_grid()) {
    const auto den = sojourn::density(p);
    const auto mir = sojourn::density({-p.a, -p.c, p.t, -p.d});
    CHECK(den.atom_at_zero == doctest::Approx(mir.atom_at_t).epsilon(1e-12));
    for (double frac : {0.15, 0.4, 0.77}) {
      const double x = frac * p.t;
      CHECK(den.continuous(x) == doctest::Approx(mir.continuous(p.t - x)).epsilon(1e-9));
    }
  }
}

TEST_CASE("mgf normalization and unreachable boundary") {
  CHECK(sojourn::mgf({0.3, -0.2, 1.7, 0.4}, 0.0) == 1.0);
  CHECK(sojourn::mgf({0, 0, 1, 35.0}, 4.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(sojourn::mgf({0, 0, -1, 1}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(sojourn::mgf({0, 0, 1, 1}, -0.5), std::invalid_argument);
}

TEST_CASE("Laplace duality: mgf equals the transform of the density") {
  for (const auto& p : four_case_grid()) {
    for (double s : {0.1, 1.0, 10.0}) {
      const auto den = sojourn::density(p);
      const double transform =
          den.atom_at_zero + den.atom_at_t * std::exp(-s * p.t) +
          integrate_against(den, p.t, [s](double x) { return std::exp(-s * x); });
      CHECK(sojourn::mgf(p, s) == doctest::Approx(transform).epsilon(1e-6));
    }
  }
}

TEST_CASE("mgf at a = c = 0, d = 1, t = 1 matches the density transform to 1e-6") {
  const SojournParams p{0, 0, 1, 1};
  const auto den = sojourn::density(p);
  const double transform =
      den.atom_at_zero + integrate_against(den, 1.0, [](double x) { return std::exp(-x); });
  CHECK(sojourn::mgf(p, 1.0) == doctest::Approx(transform).epsilon(1e-6));
}

TEST_CASE("mgf is continuous across the case seams") {
  for (double s : {0.7, 4.0}) {
    // c crosses the boundary
    const double ref = sojourn::mgf({-0.5, 0.3, 1.0, 0.3}, s);
    CHECK(sojourn::mgf({-0.5, 0.3 - 1e-9, 1.0, 0.3}, s) == doctest::Approx(ref).epsilon(1e-5));
    CHECK(sojourn::mgf({-0.5, 0.3 + 1e-9, 1.0, 0.3}, s) == doctest::Approx(ref).epsilon(1e-5));
    // a crosses the boundary
    const double ref2 = sojourn::mgf({0.2, 0.9, 1.0, 0.2}, s);
    CHECK(sojourn::mgf({0.2 + 1e-9, 0.9, 1.0, 0.2}, s) == doctest::Approx(ref2).epsilon(1e-5));
    CHECK(sojourn::mgf({0.2 - 1e-9, 0.9, 1.0, 0.2}, s) == doctest::Approx(ref2).epsilon(1e-5));
  }
}

TEST_CASE("mgf monotone decreasing in s") {
  const SojournParams p{-0.1, 0.4, 1.0, 0.2};
  double prev = 1.0;
  for (double s : {0.1, 0.5, 2.0, 8.0, 30.0}) {
    const double v = sojourn::mgf(p, s);
    CHECK(v < prev);
    CHECK(v > 0.0);
    prev = v;
  }
}

TEST_CASE("pinned-on-boundary law is uniform") {
  // a = c = d: occupation fraction uniform on (0, t)
  const SojournParams p{0.5, 0.5, 2.0, 0.5};
  const auto den = sojourn::density(p);
  CHECK(den.atom_at_zero == 0.0);
  CHECK(den.atom_at_t == 0.0);
  CHECK(den.continuous(0.7) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sojourn::mean(p) == doctest::Approx(1.0).epsilon(1e-12));
  const double s = 3.0;
  CHECK(sojourn::mgf(p, s) ==
        doctest::Approx(-std::expm1(-s * p.t) / (s * p.t)).epsilon(1e-9));
}

TEST_CASE("mean closed form") {
  SUBCASE("a = c = d gives t/2 exactly") {
    CHECK(sojourn::mean({0.3, 0.3, 1.6, 0.3}) == doctest::Approx(0.8).epsilon(1e-14));
  }
  SUBCASE("unreachable boundary gives 0") {
    CHECK(sojourn::mean({0, 0, 1, special::inf()}) == 0.0);
    CHECK(sojourn::mean({0, 0, 1, 50.0}) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("a = c = 0, d = 1, t = 1 matches the bridge expression and the density") {
    const double m = sojourn::mean({0, 0, 1, 1});
    const double closed =
        0.5 * std::exp(-2.0) - std::sqrt(M_PI / 2.0) * std::erfc(std::sqrt(2.0));
    CHECK(m == doctest::Approx(closed).epsilon(1e-12));
    const auto den = sojourn::density({0, 0, 1, 1});
    const double quad = integrate_against(den, 1.0, [](double x) { return x; });
    CHECK(m == doctest::Approx(quad).epsilon(1e-6));
  }
  SUBCASE("grid cross-check against the density") {
    for (const auto& p : four_case_grid()) {
      const auto den = sojourn::density(p);
      const double quad = den.atom_at_t * p.t +
                          integrate_against(den, p.t, [](double x) { return x; });
      CHECK(sojourn::mean(p) == doctest::Approx(quad).epsilon(2e-6));
    }
  }
}

TEST_CASE("trapezoid identity: step-averaged mean sojourn") {
  // Gaussian-step-weighted average of the exact per-segment mean equals
  // (dt/2) erfc(sqrt(2) d / sqrt(dt)), which is also the same average of the
  // trapezoidal estimator.
  for (double dt : {0.04, 0.5}) {
    for (double d : {0.05, 0.3}) {
      auto integrand = [dt, d](double dx) {
        const double w = std::exp(-dx * dx / (2.0 * dt)) / std::sqrt(2.0 * M_PI * dt);
        return w * sojourn::mean({-0.5 * dx, 0.5 * dx, dt, d});
      };
      const double avg = quadrature::integrate(integrand, -40.0 * std::sqrt(dt),
                                               40.0 * std::sqrt(dt), 1e-11, 1e-15)
                             .value;
      const double expect = 0.5 * dt * std::erfc(std::sqrt(2.0) * d / std::sqrt(dt));
      CHECK(avg == doctest::Approx(expect).epsilon(1e-8));
    }
  }
}

TEST_CASE("crossing probability") {
  CHECK(sojourn::crossing_probability(0.0, 1.0) == 1.0);
  CHECK(sojourn::crossing_probability(-2.0, 1.0) == 1.0);
  CHECK(sojourn::crossing_probability(1.0, 1.0) == doctest::Approx(std::exp(-2.0)));
  CHECK(sojourn::crossing_probability(2.0, 4.0) == doctest::Approx(std::exp(-2.0)));
  const auto den = sojourn::density({0, 0, 1, 0.8});
  CHECK(sojourn::crossing_probability(0.8, 1.0) ==
        doctest::Approx(1.0 - den.atom_at_zero).epsilon(1e-12));
  CHECK_THROWS_AS(sojourn::crossing_probability(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("direct sampler handles atoms and limits") {
  CHECK(sojourn::sample_sojourn_direct({0, 0, 1, 1}, 0.1) == 0.0);  // u < atom weight
  CHECK(sojourn::sample_sojourn_direct({0, 0, 1, -special::inf()}, 0.5) == 1.0);
  CHECK(sojourn::sample_sojourn_direct({0, 0, 2, -30.0}, 0.5) == 2.0);
  CHECK_THROWS_AS(sojourn::sample_sojourn_direct({0, 0, 1, 0}, 1.0), std::invalid_argument);
}

TEST_CASE("direct sampler reproduces the mean (slow path)") {
  const SojournParams p{0, 0, 1, 0.5};
  const double exact_mean = sojourn::mean(p);
  // spot-check the one-shot API, then drive the statistics through the
  // frozen sampler (same inversion, CDF built once)
  rng::Stream spot({555, 1});
  for (int i = 0; i < 20; ++i) {
    const double u = spot.uniform();
    CHECK(sojourn::sample_sojourn_direct(p, u) ==
          doctest::Approx(sojourn::FrozenSojournSampler(p).sample(u)).epsilon(1e-12));
  }
  sojourn::FrozenSojournSampler sampler(p);
  rng::Stream stream({555, 0});
  const int n = 400000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double T = sampler.sample(stream.uniform());
    sum += T;
    sum2 += T * T;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - exact_mean) < 4.0 * se);
}

TEST_CASE("tables sample within 4 sigma of the exact mean (interpolated path)") {
  sojourn::GridSpec spec;
  spec.nu_count = 64;
  spec.delta_count = 129;
  spec.delta_min = -6.0;
  spec.delta_max = 6.0;
  spec.n_quantiles = 256;
  const auto tables = sojourn::SojournTables::build(spec);
  CHECK(tables.interp_error_bound() < 0.05);
  for (const SojournParams p : {SojournParams{0, 0.8, 1, 0.5}, SojournParams{0.2, -0.5, 0.7, 0.1},
                                SojournParams{-0.3, -0.1, 1.4, -0.4}}) {
    const double exact_mean = sojourn::mean(p);
    rng::Stream stream({777, 3});
    const int n = 300000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double T = tables.sample(p, stream.uniform());
      sum += T;
      sum2 += T * T;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    CHECK(std::abs(mean - exact_mean) < 4.0 * se + 2e-3 * p.t);
  }
}

TEST_CASE("table sampling agrees pointwise with direct inversion, both nu signs") {
  sojourn::GridSpec spec;
  spec.nu_count = 64;
  spec.delta_count = 129;
  spec.delta_min = -6.0;
  spec.delta_max = 6.0;
  spec.n_quantiles = 256;
  const auto tables = sojourn::SojournTables::build(spec);
  rng::Stream probe({2025, 4});
  double worst = 0.0;
  int loose = 0;
  for (int i = 0; i < 300; ++i) {
    sojourn::SojournParams p;
    p.a = 0.0;
    p.c = probe.uniform() * 4.0 - 2.0;  // both signs of the interval length
    p.t = 0.5 + probe.uniform();
    p.d = probe.uniform() * 4.0 - 2.0;
    const double u = probe.uniform();
    const double err =
        std::abs(tables.sample(p, u) - sojourn::sample_sojourn_direct(p, u)) / p.t;
    worst = std::max(worst, err);
    loose += err > 5e-3;
  }
  // the quantile surface has kinks along the case seams; on this coarse test
  // grid a few probes land there with ~5e-3 wiggle (a convention bug would
  // show up at the 0.1..1 scale)
  CHECK(worst < 2e-2);
  CHECK(loose <= 30);
}

TEST_CASE("tables persistence round trip and corruption detection") {
  sojourn::GridSpec spec;
  spec.nu_count = 16;
  spec.delta_count = 33;
  spec.n_quantiles = 64;
  const auto tables = sojourn::SojournTables::build(spec);
  const std::string path = "sojourn_tables_test.bin";
  tables.save(path);
  const auto loaded = sojourn::SojournTables::load(path);
  const SojournParams p{0, 0.6, 1, 0.4};
  for (double u : {0.05, 0.37, 0.81, 0.99}) {
    CHECK(tables.sample(p, u) == loaded.sample(p, u));
  }
  // flip one payload byte: checksum must catch it
  {
    std::FILE* f = std::fopen(path.c_str(), "r+b");
    REQUIRE(f != nullptr);
    std::fseek(f, -5, SEEK_END);
    int c = std::fgetc(f);
    std::fseek(f, -1, SEEK_CUR);
    std::fputc(c ^ 0xFF, f);
    std::fclose(f);
  }
  CHECK_THROWS(sojourn::SojournTables::load(path));
  std::remove(path.c_str());
}

TEST_CASE("mgf table matches direct evaluation and snaps far from the boundary") {
  const double S = 2.5;
  const auto table = sojourn::MgfTable::build(S, sojourn::MgfTable::Spec{});
  // accuracy is limited by the C1 seams of the four-case law; the estimator
  // tests pin the effect at the observable level
  CHECK(table.interp_error_bound() < 5e-4);
  rng::Stream probe({9001, 0});
  for (int i = 0; i < 200; ++i) {
    const double nu = probe.uniform() * 6.0 - 3.0;
    const double delta = probe.uniform() * 8.0 - 4.0;
    const double direct = sojourn::mgf({0.0, nu, 1.0, delta}, S);
    const double tol = 2.0 * table.interp_error_bound() + 1e-6;
    CHECK(std::abs(table.value(nu, delta) - direct) < tol);
  }
  CHECK(table.value(0.3, 6.0) == 1.0);                       // boundary unreachable
  CHECK(table.value(0.3, -6.0) == doctest::Approx(std::exp(-S)));  // full sojourn
  // delta out of range but the reversed representation is in range
  const double big = table.value(7.0, 6.5);
  CHECK(std::abs(big - sojourn::mgf({0.0, 7.0, 1.0, 6.5}, S)) <
        2.0 * table.interp_error_bound() + 1e-6);
}
