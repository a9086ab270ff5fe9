#include <doctest.h>

#include "wlmc/bridge.hpp"
#include "wlmc/stats.hpp"

#include <stdexcept>

#include <cmath>
#include <cstdio>
#include <vector>

using namespace wlmc;
using bridges::StandardBridge;

namespace {

// Exact covariance of the v-loop output, propagated through the recursion
// B_k = sqrt(c_k/N) z_k + c_k B_{k-1} (independent oracle for the ensemble
// moments below).
struct RecursionLaw {
  std::vector<std::vector<double>> a;  // B_k = sum_i a[k][i] z_i
  explicit RecursionLaw(std::size_t n) : a(n + 1, std::vector<double>(n, 0.0)) {
    const double nn = static_cast<double>(n);
    for (std::size_t k = 1; k < n; ++k) {
      const double ck = (nn - k) / (nn - k + 1.0);
      for (std::size_t i = 0; i < n; ++i) a[k][i] = ck * a[k - 1][i];
      a[k][k - 1] = std::sqrt(ck / nn);
    }
  }
  double cov(std::size_t j, std::size_t k) const {
    double s = 0.0;
    for (std::size_t i = 0; i < a[j].size(); ++i) s += a[j][i] * a[k][i];
    return s;
  }
};

}  // namespace

TEST_CASE("pinning is bit-exact") {
  for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{7}, std::size_t{64}}) {
    const auto b = bridges::generate_vloop(n, 1, rng::StreamSpec{5, n});
    CHECK(b.axis(0)[0] == 0.0);
    CHECK(b.axis(0)[n] == 0.0);
    const auto d = bridges::generate_drift_subtracted(n, 1, rng::StreamSpec{5, n});
    CHECK(d.axis(0)[0] == 0.0);
    CHECK(d.axis(0)[n] == 0.0);
  }
}

TEST_CASE("N=1 bridge is [0, 0]") {
  const auto b = bridges::generate_vloop(1, 1, rng::StreamSpec{1, 2});
  CHECK(b.axis(0)[0] == 0.0);
  CHECK(b.axis(0)[1] == 0.0);
  const auto d = bridges::generate_drift_subtracted(1, 1, rng::StreamSpec{1, 2});
  CHECK(d.axis(0)[1] == 0.0);
}

TEST_CASE("v-loop midpoint moments match the recursion law") {
  const std::size_t n = 64;
  const std::size_t ensemble = 1000000;
  const RecursionLaw law(n);
  const double exact_var = law.cov(n / 2, n / 2);
  // the exact finite-N variance coincides with the continuum t(1-t)
  CHECK(exact_var == doctest::Approx(0.25).epsilon(1e-12));

  stats::Accumulator mid;
  for (std::size_t i = 0; i < ensemble; ++i) {
    rng::Stream stream({321, i});
    std::vector<double> buf(n + 1);
    bridges::fill_vloop(buf, stream);
    mid.add(buf[n / 2]);
  }
  const double se_mean = std::sqrt(exact_var / ensemble);
  CHECK(std::abs(mid.mean) < 4.0 * se_mean);
  // var(sample variance) ~ 2 var^2 / n for Gaussians
  const double se_var = std::sqrt(2.0 / ensemble) * exact_var;
  CHECK(std::abs(mid.variance() - exact_var) < 4.0 * se_var);
}

TEST_CASE("v-loop increment covariance equals the bridge value -dt^2") {
  const std::size_t n = 64;
  const RecursionLaw law(n);
  // exact covariance of increments j != k from the recursion
  const std::size_t j = 3, k = 40;
  const double exact =
      law.cov(j + 1, k + 1) - law.cov(j, k + 1) - law.cov(j + 1, k) + law.cov(j, k);
  CHECK(exact == doctest::Approx(-1.0 / (n * n)).epsilon(1e-9));

  const std::size_t ensemble = 400000;
  stats::Accumulator prod;
  for (std::size_t i = 0; i < ensemble; ++i) {
    rng::Stream stream({77, i});
    std::vector<double> buf(n + 1);
    bridges::fill_vloop(buf, stream);
    prod.add((buf[j + 1] - buf[j]) * (buf[k + 1] - buf[k]));
  }
  // se of the product mean: roughly dt/sqrt(M)
  const double se = (1.0 / n) / std::sqrt(double(ensemble));
  CHECK(std::abs(prod.mean - exact) < 4.0 * se);
}

TEST_CASE("drift-subtracted step variance is dt(1-dt)") {
  const std::size_t n = 100;
  const std::size_t ensemble = 200000;
  stats::Accumulator step;
  for (std::size_t i = 0; i < ensemble; ++i) {
    const auto b = bridges::generate_drift_subtracted(n, 1, rng::StreamSpec{13, i});
    step.add(b.axis(0)[1] * b.axis(0)[1]);
  }
  const double expect = (1.0 / n) * (1.0 - 1.0 / n);  // 0.0099
  CHECK(expect == doctest::Approx(0.0099));
  const double se = std::sqrt(2.0 / ensemble) * expect;
  CHECK(std::abs(step.mean - expect) < 4.0 * se);
}

TEST_CASE("scale and shift") {
  StandardBridge b(3, 1);
  auto vals = b.axis(0);
  vals[1] = 0.7;
  vals[2] = -0.2;
  SUBCASE("T=1, x0=0 is the identity") {
    const auto p = bridges::scale_shift(b, 0.0, 1.0);
    CHECK(p.axis(0)[1] == doctest::Approx(0.7));
    CHECK(p.axis(0)[2] == doctest::Approx(-0.2));
  }
  SUBCASE("T=4 doubles the excursion") {
    const auto p = bridges::scale_shift(b, 0.0, 4.0);
    CHECK(p.axis(0)[1] == doctest::Approx(1.4));
  }
  SUBCASE("max point scales like sqrt(T)") {
    const auto p = bridges::scale_shift(b, 0.0, 9.0);
    double mx = p.axis(0)[0];
    for (auto v : p.axis(0)) mx = std::max(mx, v);
    CHECK(mx == doctest::Approx(2.1));
  }
  SUBCASE("endpoints land on the source point") {
    const auto p = bridges::scale_shift(b, 1.25, 2.0);
    CHECK(p.axis(0)[0] == 1.25);
    CHECK(p.axis(0)[3] == 1.25);
  }
  SUBCASE("nonpositive T is rejected") {
    CHECK_THROWS_AS(bridges::scale_shift(b, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(bridges::scale_shift(b, 0.0, -1.0), std::invalid_argument);
  }
}

TEST_CASE("extremes") {
  SUBCASE("N=1") {
    StandardBridge b(1, 1);
    const auto [lo, hi] = bridges::extremes(b, 0);
    CHECK(lo == 0.0);
    CHECK(hi == 0.0);
  }
  SUBCASE("inspection") {
    StandardBridge b(3, 1);
    b.axis(0)[1] = 0.3;
    b.axis(0)[2] = -0.2;
    const auto [lo, hi] = bridges::extremes(b, 0);
    CHECK(lo == doctest::Approx(-0.2));
    CHECK(hi == doctest::Approx(0.3));
  }
  SUBCASE("pinning implies min <= 0 <= max") {
    for (std::size_t i = 0; i < 50; ++i) {
      const auto b = bridges::generate_vloop(32, 1, rng::StreamSpec{4, i});
      const auto [lo, hi] = bridges::extremes(b, 0);
      CHECK(lo <= 0.0);
      CHECK(hi >= 0.0);
    }
  }
  SUBCASE("axis bounds checked") {
    StandardBridge b(3, 1);
    CHECK_THROWS_AS(bridges::extremes(b, 1), std::invalid_argument);
  }
}

TEST_CASE("crossing fraction stays below the continuum law and converges") {
  const double T = 2.0, d = 1.0;
  const double theory = std::exp(-2.0 * d * d / T);
  const std::size_t ensemble = 200000;
  auto crossing_fraction = [&](std::size_t n, std::uint64_t seed) {
    std::size_t crossed = 0;
    std::vector<double> buf(n + 1);
    for (std::size_t i = 0; i < ensemble; ++i) {
      rng::Stream stream({seed, i});
      bridges::fill_vloop(buf, stream);
      double hi = 0.0;
      for (double v : buf) hi = std::max(hi, v);
      crossed += std::sqrt(T) * hi >= d;
    }
    return static_cast<double>(crossed) / ensemble;
  };
  const double f64 = crossing_fraction(64, 1001);
  const double f1024 = crossing_fraction(1024, 1001);
  const double se = std::sqrt(theory * (1.0 - theory) / ensemble);
  CHECK(f64 < theory);            // discrete paths under-reach
  CHECK(f1024 < theory);
  CHECK(theory - f64 > 4.0 * se); // the finite-N deficit is resolvable...
  CHECK(f1024 > f64);             // ...and shrinks as N grows
}

TEST_CASE("ensemble dump/load round trip") {
  std::vector<StandardBridge> bridges_out;
  for (std::size_t i = 0; i < 5; ++i)
    bridges_out.push_back(bridges::generate_vloop(16, 2, rng::StreamSpec{9, i}));
  const std::string path = "bridge_dump_test.bin";
  bridges::dump_ensemble(path, bridges_out, 9);
  std::uint64_t seed = 0;
  const auto bridges_in = bridges::load_ensemble(path, &seed);
  CHECK(seed == 9);
  REQUIRE(bridges_in.size() == 5);
  CHECK(bridges_in[0].n_steps() == 16);
  CHECK(bridges_in[0].n_axes() == 2);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto a = bridges_out[i].raw();
    const auto b = bridges_in[i].raw();
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
  }
  std::remove(path.c_str());
}

TEST_CASE("reproducibility is independent of generation order") {
  const auto late = bridges::generate_vloop(32, 1, rng::StreamSpec{123, 7});
  for (std::size_t i = 0; i < 7; ++i) (void)bridges::generate_vloop(32, 1, rng::StreamSpec{123, i});
  const auto again = bridges::generate_vloop(32, 1, rng::StreamSpec{123, 7});
  const auto a = late.raw();
  const auto b = again.raw();
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
}
