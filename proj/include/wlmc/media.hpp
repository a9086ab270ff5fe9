#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "wlmc/bridge.hpp"

namespace wlmc::media {

/// chi = +infinity marks the Dirichlet (perfect-conductor) limit.  It never
/// enters estimator arithmetic: estimators switch to touch-indicator code
/// paths when they see it.
inline constexpr double kDirichlet = std::numeric_limits<double>::infinity();

inline bool is_dirichlet(double chi) { return std::isinf(chi); }

enum class Side { above, below };  // which half-line the dielectric fills

/// Spatial susceptibility field eps_r(z) >= 1 along the interface normal.
///
/// Variants:
///  - vacuum():                          eps = 1 everywhere
///  - half_space(d, chi, side):          eps = 1 + chi * [z on `side` of d]
///  - gap(d1, d2, chi1, chi2):           body 1 fills z <= d1, body 2 fills z >= d2
///  - user_field(eps, [segment mean]):   arbitrary callable eps_r(z) >= 1
class DielectricProfile {
public:
  enum class Kind { vacuum, half_space, gap, user_field };

  static DielectricProfile vacuum();
  static DielectricProfile half_space(double boundary, double chi, Side side = Side::above);
  static DielectricProfile gap(double d1, double d2, double chi1, double chi2);
  /// `segment_mean(a, b)`: mean of eps_r over the straight segment [a, b];
  /// optional, required only by the interpolated path average.
  static DielectricProfile user_field(std::function<double(double)> eps,
                                      std::function<double(double, double)> segment_mean = {});

  Kind kind() const { return kind_; }
  double boundary() const { return d1_; }
  double d1() const { return d1_; }
  double d2() const { return d2_; }
  double chi() const { return chi1_; }
  double chi1() const { return chi1_; }
  double chi2() const { return chi2_; }
  Side side() const { return side_; }
  bool dirichlet() const;

  /// One-body sub-profiles of a gap (used by the pathwise renormalization).
  DielectricProfile body1() const;
  DielectricProfile body2() const;

  std::string describe() const;

private:
  DielectricProfile() = default;
  friend double eps_at(const DielectricProfile&, double);
  friend double segment_mean_eps(const DielectricProfile&, double, double);

  Kind kind_ = Kind::vacuum;
  double d1_ = 0.0, d2_ = 0.0;
  double chi1_ = 0.0, chi2_ = 0.0;
  Side side_ = Side::above;
  std::function<double(double)> eps_;
  std::function<double(double, double)> segment_mean_;
};

/// eps_r at a point.  Points exactly on an interface take the dielectric-side
/// value.  Dirichlet profiles return +infinity on the dielectric side; the
/// estimators never ask.
double eps_at(const DielectricProfile& profile, double r);

/// Mean of eps_r over the straight segment from a to b (closed form for the
/// planar variants, the user-supplied callable otherwise).  A zero-length
/// segment falls back to eps_at(a).
double segment_mean_eps(const DielectricProfile& profile, double a, double b);

/// (1/N) sum_k eps_r(x_k); equals the trapezoidal rule because the path closes.
double path_average_trapezoid(const DielectricProfile& profile, const bridges::ScaledPath& path);

/// (1/N) sum_j (mean of eps_r along segment j): the interpolation estimator.
double path_average_interpolated(const DielectricProfile& profile, const bridges::ScaledPath& path);

/// Smallest proper time at which the scaled-and-shifted bridge reaches the
/// interface(s) that the renormalized integrand needs:
///  - half-space, x0 on the vacuum side:      T0 = ((d - x0)/max_k B_k)^2
///  - half-space, x0 on the dielectric side:  T0 = ((x0 - d)/|min_k B_k|)^2
///  - gap: the later of the two one-sided touch times (both bodies must be
///    reached before the renormalized two-body integrand turns on)
///  - user field: bisection for the largest T with |integrand| < 1e-12
/// Returns +infinity when the relevant extreme is zero (degenerate bridge).
double first_touch_time(const bridges::StandardBridge& bridge, double x0,
                        const DielectricProfile& profile);

/// <eps>^(-3/2) - eps(x0)^(-3/2): the renormalized Casimir-Polder integrand.
/// In the Dirichlet limit with x0 in vacuum this is -1 if the path touches
/// the body and 0 otherwise.
double renorm_integrand_cp(const DielectricProfile& profile, const bridges::ScaledPath& path,
                           double x0);

/// Pathwise-renormalized two-body integrand for a gap profile:
///   [eps12(x0)^(-1/2) - <eps12>^(-1/2)]
/// - [eps1(x0)^(-1/2)  - <eps1>^(-1/2)]
/// - [eps2(x0)^(-1/2)  - <eps2>^(-1/2)],
/// all three path averages taken on the same path.  Exactly zero unless the
/// path touches both bodies.
double renorm_integrand_casimir(const DielectricProfile& profile, const bridges::ScaledPath& path,
                                double x0);

}  // namespace wlmc::media
