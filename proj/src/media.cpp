#include "wlmc/media.hpp"

#include "wlmc/special.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wlmc::media {

DielectricProfile DielectricProfile::vacuum() {
  DielectricProfile p;
  p.kind_ = Kind::vacuum;
  return p;
}

DielectricProfile DielectricProfile::half_space(double boundary, double chi, Side side) {
  if (chi < 0.0) throw std::invalid_argument("half_space: chi must be >= 0");
  DielectricProfile p;
  p.kind_ = Kind::half_space;
  p.d1_ = boundary;
  p.chi1_ = chi;
  p.side_ = side;
  return p;
}

DielectricProfile DielectricProfile::gap(double d1, double d2, double chi1, double chi2) {
  if (!(d2 > d1)) throw std::invalid_argument("gap: requires d2 > d1");
  if (chi1 < 0.0 || chi2 < 0.0) throw std::invalid_argument("gap: chi must be >= 0");
  DielectricProfile p;
  p.kind_ = Kind::gap;
  p.d1_ = d1;
  p.d2_ = d2;
  p.chi1_ = chi1;
  p.chi2_ = chi2;
  return p;
}

DielectricProfile DielectricProfile::user_field(std::function<double(double)> eps,
                                                std::function<double(double, double)> segment_mean) {
  if (!eps) throw std::invalid_argument("user_field: callable required");
  DielectricProfile p;
  p.kind_ = Kind::user_field;
  p.eps_ = std::move(eps);
  p.segment_mean_ = std::move(segment_mean);
  return p;
}

bool DielectricProfile::dirichlet() const {
  switch (kind_) {
    case Kind::half_space: return is_dirichlet(chi1_);
    case Kind::gap: return is_dirichlet(chi1_) || is_dirichlet(chi2_);
    default: return false;
  }
}

DielectricProfile DielectricProfile::body1() const {
  if (kind_ != Kind::gap) throw std::invalid_argument("body1: gap profile required");
  return half_space(d1_, chi1_, Side::below);
}

DielectricProfile DielectricProfile::body2() const {
  if (kind_ != Kind::gap) throw std::invalid_argument("body2: gap profile required");
  return half_space(d2_, chi2_, Side::above);
}

std::string DielectricProfile::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::vacuum: os << "vacuum"; break;
    case Kind::half_space:
      os << "half-space(d=" << d1_ << ",chi=" << chi1_
         << (side_ == Side::above ? ",above)" : ",below)");
      break;
    case Kind::gap:
      os << "gap(d1=" << d1_ << ",d2=" << d2_ << ",chi1=" << chi1_ << ",chi2=" << chi2_ << ")";
      break;
    case Kind::user_field: os << "user-field"; break;
  }
  return os.str();
}

double eps_at(const DielectricProfile& p, double r) {
  if (!std::isfinite(r)) throw std::invalid_argument("eps_at: point must be finite");
  switch (p.kind_) {
    case DielectricProfile::Kind::vacuum:
      return 1.0;
    case DielectricProfile::Kind::half_space: {
      const bool inside = (p.side_ == Side::above) ? (r >= p.d1_) : (r <= p.d1_);
      return inside ? 1.0 + p.chi1_ : 1.0;
    }
    case DielectricProfile::Kind::gap:
      if (r <= p.d1_) return 1.0 + p.chi1_;
      if (r >= p.d2_) return 1.0 + p.chi2_;
      return 1.0;
    case DielectricProfile::Kind::user_field: {
      const double e = p.eps_(r);
      if (!(e >= 1.0)) throw std::domain_error("eps_at: user field returned eps < 1");
      return e;
    }
  }
  return 1.0;
}

namespace {

// Fraction of the segment [a, b] lying on the dielectric side of `boundary`.
double fraction_past(double a, double b, double boundary, Side side) {
  double lo = std::min(a, b), hi = std::max(a, b);
  if (side == Side::below) {
    // mirror so the dielectric is "above"
    const double nlo = -hi, nhi = -lo;
    lo = nlo;
    hi = nhi;
    boundary = -boundary;
  }
  if (lo >= boundary) return 1.0;
  if (hi <= boundary) return 0.0;
  return (hi - boundary) / (hi - lo);
}

}  // namespace

double segment_mean_eps(const DielectricProfile& p, double a, double b) {
  if (a == b) return eps_at(p, a);
  switch (p.kind_) {
    case DielectricProfile::Kind::vacuum:
      return 1.0;
    case DielectricProfile::Kind::half_space:
      return 1.0 + p.chi1_ * fraction_past(a, b, p.d1_, p.side_);
    case DielectricProfile::Kind::gap:
      return 1.0 + p.chi1_ * fraction_past(a, b, p.d1_, Side::below) +
             p.chi2_ * fraction_past(a, b, p.d2_, Side::above);
    case DielectricProfile::Kind::user_field:
      if (!p.segment_mean_)
        throw std::invalid_argument(
            "segment_mean_eps: user field needs a line-integral routine for interpolation");
      return p.segment_mean_(a, b);
  }
  return 1.0;
}

double path_average_trapezoid(const DielectricProfile& profile, const bridges::ScaledPath& path) {
  auto pts = path.axis(0);
  const std::size_t n = path.n_steps;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += eps_at(profile, pts[k]);
  return sum / static_cast<double>(n);
}

double path_average_interpolated(const DielectricProfile& profile, const bridges::ScaledPath& path) {
  auto pts = path.axis(0);
  const std::size_t n = path.n_steps;
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += segment_mean_eps(profile, pts[j], pts[j + 1]);
  return sum / static_cast<double>(n);
}

namespace {

double touch_time_one_sided(double distance, double reach) {
  // distance >= 0 to the interface, reach = |relevant bridge extreme|
  if (distance <= 0.0) return 0.0;  // source already on/inside the body
  if (reach <= 0.0) return special::inf();
  const double ratio = distance / reach;
  return ratio * ratio;
}

double user_field_touch_time(const bridges::StandardBridge& bridge, double x0,
                             const DielectricProfile& profile) {
  constexpr double tol = 1e-12;
  auto magnitude = [&](double T) {
    auto path = bridges::scale_shift(bridge, x0, T);
    return std::abs(renorm_integrand_cp(profile, path, x0));
  };
  double hi = 1.0;
  while (magnitude(hi) < tol) {
    hi *= 4.0;
    if (hi > 1e12) return special::inf();
  }
  double lo = hi / 4.0;
  while (magnitude(lo) >= tol) {
    lo /= 4.0;
    if (lo < 1e-12) return lo;
  }
  for (int i = 0; i < 80; ++i) {
    const double mid = std::sqrt(lo * hi);
    (magnitude(mid) < tol ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

double first_touch_time(const bridges::StandardBridge& bridge, double x0,
                        const DielectricProfile& profile) {
  const auto [lo, hi] = bridges::extremes(bridge, 0);
  switch (profile.kind()) {
    case DielectricProfile::Kind::vacuum:
      return special::inf();
    case DielectricProfile::Kind::half_space: {
      const bool above = profile.side() == Side::above;
      const double signed_dist = above ? profile.boundary() - x0 : x0 - profile.boundary();
      if (signed_dist > 0.0) {
        // source on the vacuum side: need the path to reach toward the body
        return touch_time_one_sided(signed_dist, above ? hi : -lo);
      }
      // source embedded in the dielectric: need the path to reach the vacuum
      return touch_time_one_sided(-signed_dist, above ? -lo : hi);
    }
    case DielectricProfile::Kind::gap: {
      const double t1 = (x0 <= profile.d1())
                            ? 0.0
                            : touch_time_one_sided(x0 - profile.d1(), -lo);
      const double t2 = (x0 >= profile.d2())
                            ? 0.0
                            : touch_time_one_sided(profile.d2() - x0, hi);
      return std::max(t1, t2);
    }
    case DielectricProfile::Kind::user_field:
      return user_field_touch_time(bridge, x0, profile);
  }
  return special::inf();
}

double renorm_integrand_cp(const DielectricProfile& profile, const bridges::ScaledPath& path,
                           double x0) {
  if (profile.kind() == DielectricProfile::Kind::vacuum) return 0.0;
  if (profile.kind() == DielectricProfile::Kind::half_space && profile.dirichlet()) {
    const bool above = profile.side() == Side::above;
    const double signed_dist = above ? profile.boundary() - x0 : x0 - profile.boundary();
    if (signed_dist <= 0.0) return 0.0;  // embedded Dirichlet: nothing to subtract against
    auto pts = path.axis(0);
    const auto [lo, hi] = bridges::extremes(pts);
    const bool touched = above ? (hi >= profile.boundary()) : (lo <= profile.boundary());
    return touched ? -1.0 : 0.0;
  }
  const double avg = path_average_trapezoid(profile, path);
  const double ref = eps_at(profile, x0);
  return std::pow(avg, -1.5) - std::pow(ref, -1.5);
}

namespace {

double inv_sqrt_mix(double chi, double fraction) {
  if (is_dirichlet(chi)) return fraction > 0.0 ? 0.0 : 1.0;
  return 1.0 / std::sqrt(1.0 + chi * fraction);
}

double inv_sqrt_point(double chi, bool inside) {
  if (is_dirichlet(chi)) return inside ? 0.0 : 1.0;
  return inside ? 1.0 / std::sqrt(1.0 + chi) : 1.0;
}

}  // namespace

double renorm_integrand_casimir(const DielectricProfile& profile, const bridges::ScaledPath& path,
                                double x0) {
  if (profile.kind() != DielectricProfile::Kind::gap)
    throw std::invalid_argument("renorm_integrand_casimir: gap profile required");
  auto pts = path.axis(0);
  const std::size_t n = path.n_steps;
  std::size_t below = 0, above = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (pts[k] <= profile.d1()) ++below;
    if (pts[k] >= profile.d2()) ++above;
  }
  const double f1 = static_cast<double>(below) / static_cast<double>(n);
  const double f2 = static_cast<double>(above) / static_cast<double>(n);
  const bool x0_in_1 = x0 <= profile.d1();
  const bool x0_in_2 = x0 >= profile.d2();

  const double chi1 = profile.chi1(), chi2 = profile.chi2();
  const double ref12 = x0_in_1 ? inv_sqrt_point(chi1, true)
                               : (x0_in_2 ? inv_sqrt_point(chi2, true) : 1.0);
  const double avg12 = is_dirichlet(chi1) || is_dirichlet(chi2)
                           ? ((is_dirichlet(chi1) && f1 > 0.0) || (is_dirichlet(chi2) && f2 > 0.0)
                                  ? 0.0
                                  : 1.0 / std::sqrt(1.0 + (is_dirichlet(chi1) ? 0.0 : chi1 * f1) +
                                                    (is_dirichlet(chi2) ? 0.0 : chi2 * f2)))
                           : 1.0 / std::sqrt(1.0 + chi1 * f1 + chi2 * f2);
  const double term12 = ref12 - avg12;
  const double term1 = inv_sqrt_point(chi1, x0_in_1) - inv_sqrt_mix(chi1, f1);
  const double term2 = inv_sqrt_point(chi2, x0_in_2) - inv_sqrt_mix(chi2, f2);
  return term12 - term1 - term2;
}

}  // namespace wlmc::media
