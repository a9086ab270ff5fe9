#pragma once

#include <stdexcept>

namespace wlmc {

/// Unit system and atom data.  Defaults are natural units (hbar = c = eps0 = 1,
/// lengths in units of the configured distance scale); SI values belong only
/// in reporting layers.
struct PhysicalConstants {
  double hbar = 1.0;
  double c = 1.0;
  double eps0 = 1.0;
  double alpha0 = 1.0;      // static polarizability
  int spacetime_dim = 4;    // D

  void validate() const {
    if (spacetime_dim < 2) throw std::invalid_argument("PhysicalConstants: D must be >= 2");
    if (!(hbar > 0.0 && c > 0.0 && eps0 > 0.0))
      throw std::invalid_argument("PhysicalConstants: hbar, c, eps0 must be positive");
    if (alpha0 < 0.0) throw std::invalid_argument("PhysicalConstants: alpha0 must be >= 0");
  }
};

}  // namespace wlmc
