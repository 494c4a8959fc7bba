#pragma once

#include <cmath>
#include <numbers>

#include "reynolds_limit/errors.hpp"

namespace reylim {

/// Film height h(x) on one period [0, L).
///
/// `constant`: h = c with c >= 1.
/// `slider`:   h = (1 + delta cos(2 pi (x - shift) / L)) / (1 - delta), normalized so min h = 1.
struct HeightProfile {
  enum class Kind { constant, slider };

  Kind kind = Kind::constant;
  double c = 1.0;
  double delta = 0.0;
  double L = 1.0;
  double shift = 0.0;

  static HeightProfile flat(double L, double c = 1.0) { return {Kind::constant, c, 0.0, L, 0.0}; }
  static HeightProfile slider(double L, double delta, double shift = 0.0) {
    return {Kind::slider, 1.0, delta, L, shift};
  }

  double operator()(double x) const {
    if (kind == Kind::constant) return c;
    const double k = 2.0 * std::numbers::pi / L;
    return (1.0 + delta * std::cos(k * (x - shift))) / (1.0 - delta);
  }

  double slope(double x) const {
    if (kind == Kind::constant) return 0.0;
    const double k = 2.0 * std::numbers::pi / L;
    return -delta * k * std::sin(k * (x - shift)) / (1.0 - delta);
  }

  /// Exact integral over one period.
  double integral() const { return kind == Kind::constant ? c * L : L / (1.0 - delta); }

  void validate() const {
    if (!(L > 0.0)) throw InputError("height profile: L must be > 0");
    if (kind == Kind::constant && !(c >= 1.0))
      throw InputError("height profile: constant height must be >= 1 (h_min normalization)");
    if (kind == Kind::slider && !(delta >= 0.0 && delta < 1.0))
      throw InputError("height profile: slider delta must lie in [0, 1)");
  }
};

/// Shared geometry of the thin channel and its Reynolds limit.
struct ThinGeometry {
  double L = 1.0;
  HeightProfile h = HeightProfile::flat(1.0);
  double eps = 0.1;
  double V = 1.0;
  double rho_b = 1.0;
  double rho_t = 1.0;
  double M0 = 1.0;

  void validate() const {
    if (!(L > 0.0)) throw InputError("geometry: L must be > 0");
    if (h.L != L) throw InputError("geometry: height profile period must equal L");
    h.validate();
    if (!(eps > 0.0 && eps <= 1.0)) throw InputError("geometry: eps must lie in (0, 1]");
    if (!(V >= 0.0)) throw InputError("geometry: wall speed V must be >= 0");
    if (!(rho_b > 0.0) || !(rho_t > 0.0)) throw InputError("geometry: boundary densities must be > 0");
    if (!(M0 > 0.0)) throw InputError("geometry: M0 must be > 0");
  }
};

}  // namespace reylim
