#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wlmc::quadrature {

/// Thrown when an adaptive integral cannot reach its requested tolerance.
/// Carries the best available estimate and the achieved error bound.
class numerical_error : public std::runtime_error {
public:
  numerical_error(const std::string& what, double estimate, double achieved_error)
      : std::runtime_error(what), estimate(estimate), achieved_error(achieved_error) {}
  double estimate;
  double achieved_error;
};

struct Result {
  double value = 0.0;
  double error = 0.0;   // estimated absolute error
  long n_evals = 0;
};

/// Adaptive Gauss(7)-Kronrod(15) quadrature on [a, b].
/// Subdivides until |error| <= max(abs_tol, rel_tol * |value|) or the
/// interval budget is exhausted (then throws numerical_error).
Result integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10, double abs_tol = 0.0, int max_intervals = 4000);

/// integrate() over [0, inf) through the map x = t/(1-t).
Result integrate_half_line(const std::function<double(double)>& f,
                           double rel_tol = 1e-10, double abs_tol = 0.0,
                           int max_intervals = 4000);

/// Nodes and weights of generalized Gauss-Laguerre quadrature:
///   int_0^inf x^alpha e^-x f(x) dx ~= sum_i w_i f(x_i),
/// computed with the Golub-Welsch eigenvalue method.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_laguerre(int n, double alpha);

}  // namespace wlmc::quadrature
