#pragma once

#include <cmath>
#include <limits>

namespace wlmc::special {

/// Scaled complementary error function erfcx(x) = exp(x^2) erfc(x).
/// For x < 5 the direct product is exact and overflow-free; beyond that the
/// Laplace continued fraction is used (erfc underflows near x ~ 26 and
/// exp(x^2) overflows long before the product leaves double range).
inline double erfcx(double x) {
  if (x < 0.0) {
    // erfcx(-x) = 2 exp(x^2) - erfcx(x); overflows for x < -26.6 or so.
    const double e = std::exp(x * x);
    return 2.0 * e - erfcx(-x);
  }
  if (x < 5.0) return std::exp(x * x) * std::erfc(x);
  // erfcx(x) = 1/sqrt(pi) * 1/(x + (1/2)/(x + (2/2)/(x + (3/2)/(x + ...))))
  double cf = 0.0;
  for (int k = 30; k >= 1; --k) cf = (0.5 * k) / (x + cf);
  return (1.0 / std::sqrt(M_PI)) / (x + cf);
}

/// exp(p) * erfc(z) for z >= 0, evaluated as erfcx(z) * exp(p - z^2).
/// Callers must pass p - z^2 <= 0 territory (true for all uses here);
/// the combined exponent avoids the overflow of exp(p) alone.
inline double exp_times_erfc(double p, double z) {
  return erfcx(z) * std::exp(p - z * z);
}

inline constexpr double inf() { return std::numeric_limits<double>::infinity(); }

}  // namespace wlmc::special
