#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace reylim {

/// Forward-mode dual number carrying one tangent direction.
///
/// Residual kernels are templated on the scalar type; instantiating them with
/// `Dual` yields exact directional derivatives, which is how the Newton
/// Jacobians in this library are assembled.
struct Dual {
  double val = 0.0;
  double der = 0.0;

  constexpr Dual() = default;
  constexpr Dual(double v) : val(v) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(double v, double d) : val(v), der(d) {}

  Dual& operator+=(const Dual& o) { val += o.val; der += o.der; return *this; }
  Dual& operator-=(const Dual& o) { val -= o.val; der -= o.der; return *this; }
  Dual& operator*=(const Dual& o) { der = der * o.val + val * o.der; val *= o.val; return *this; }
  Dual& operator/=(const Dual& o) {
    der = (der * o.val - val * o.der) / (o.val * o.val);
    val /= o.val;
    return *this;
  }
};

inline Dual operator-(const Dual& a) { return {-a.val, -a.der}; }
inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }

inline bool operator<(const Dual& a, const Dual& b) { return a.val < b.val; }
inline bool operator>(const Dual& a, const Dual& b) { return a.val > b.val; }
inline bool operator<=(const Dual& a, const Dual& b) { return a.val <= b.val; }
inline bool operator>=(const Dual& a, const Dual& b) { return a.val >= b.val; }
inline bool operator==(const Dual& a, const Dual& b) { return a.val == b.val; }

inline Dual pow(const Dual& a, double p) {
  if (a.val == 0.0) return {0.0, p == 1.0 ? a.der : 0.0};
  const double vp = std::pow(a.val, p);
  return {vp, p * vp / a.val * a.der};
}
// sqrt(0) gets a zero tangent: |u|u and similar products stay differentiable at rest.
inline Dual sqrt(const Dual& a) {
  const double s = std::sqrt(a.val);
  return {s, s > 0.0 ? 0.5 * a.der / s : 0.0};
}
inline Dual abs(const Dual& a) { return a.val < 0.0 ? -a : a; }
inline Dual log(const Dual& a) { return {std::log(a.val), a.der / a.val}; }
inline Dual exp(const Dual& a) {
  const double e = std::exp(a.val);
  return {e, e * a.der};
}
inline bool isfinite(const Dual& a) { return std::isfinite(a.val) && std::isfinite(a.der); }

inline double value(double x) { return x; }
inline double value(const Dual& x) { return x.val; }
inline double tangent(double) { return 0.0; }
inline double tangent(const Dual& x) { return x.der; }

}  // namespace reylim

namespace Eigen {
template <>
struct NumTraits<reylim::Dual> : NumTraits<double> {
  using Real = reylim::Dual;
  using NonInteger = reylim::Dual;
  using Nested = reylim::Dual;
  using Literal = reylim::Dual;
  enum { IsComplex = 0, RequireInitialization = 1, ReadCost = 2, AddCost = 2, MulCost = 4 };
};
}  // namespace Eigen
