#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "reynolds_limit/dual.hpp"
#include "reynolds_limit/errors.hpp"

namespace reylim {

/// Viscosity family. `power_pair` is mu(s) = s^n + s^m; `linear` is the
/// degenerate mu(s) = s test family (lambda identically zero).
enum class ViscosityFamily { power_pair, linear };

/// Constitutive parameters for viscosity and pressure.
///
/// The derived exponents M and N are functions of (n, alpha, gamma) and are
/// never stored.
struct LawSet {
  double a = 1.0;         ///< hot-pressure coefficient, p_h = a s^gamma
  double gamma = 2.0;     ///< hot-pressure exponent
  double n = 0.75;        ///< small-density viscosity exponent
  double m = 2.0;         ///< large-density viscosity exponent
  double alpha = 1.0;     ///< cold-pressure singularity exponent
  double beta = 1.0;      ///< cold-pressure growth exponent
  double eps_c = 1e-2;    ///< cold-pressure amplitude
  double rho_star = 0.5;  ///< cold/hot crossover density
  double A = 1.0;         ///< viscosity crossover density
  double r0 = 1.0;        ///< turbulent drag coefficient
  ViscosityFamily family = ViscosityFamily::power_pair;

  double M() const { return (n - alpha - 1.0) / 2.0; }
  double N() const { return (gamma + n - 1.0) / 2.0; }

  /// mu(s) = s, lambda = 0: the shallow-water style degenerate family.
  static LawSet linear_viscosity() {
    LawSet l;
    l.n = 1.0;
    l.m = 1.0;
    l.family = ViscosityFamily::linear;
    return l;
  }
};

namespace detail {
inline void require_nonnegative(double s, const char* what) {
  if (!(s >= 0.0)) throw DomainError(std::string(what) + ": density must be >= 0");
}
inline void require_positive(double s, const char* what) {
  if (!(s > 0.0)) throw DomainError(std::string(what) + ": density must be > 0");
}
}  // namespace detail

// The law functions are templated on the scalar so the solvers can push dual
// numbers through them. Domain checks look at the value part only.

template <class S>
S mu(const LawSet& laws, const S& s) {
  using std::pow;
  detail::require_nonnegative(value(s), "mu");
  if (laws.family == ViscosityFamily::linear) return s;
  return pow(s, laws.n) + pow(s, laws.m);
}

template <class S>
S mu_prime(const LawSet& laws, const S& s) {
  using std::pow;
  detail::require_positive(value(s), "mu_prime");
  if (laws.family == ViscosityFamily::linear) return S(1.0) + 0.0 * s;
  return laws.n * pow(s, laws.n - 1.0) + laws.m * pow(s, laws.m - 1.0);
}

/// lambda(s) = 2 (s mu'(s) - mu(s)); may be negative at small density when n < 1.
template <class S>
S lambda_of(const LawSet& laws, const S& s) {
  using std::pow;
  detail::require_positive(value(s), "lambda_of");
  if (laws.family == ViscosityFamily::linear) return 0.0 * s;
  return 2.0 * (laws.n - 1.0) * pow(s, laws.n) + 2.0 * (laws.m - 1.0) * pow(s, laws.m);
}

/// p(s) = a s^gamma - (eps_c / alpha) s^-alpha.
template <class S>
S pressure(const LawSet& laws, const S& s) {
  using std::pow;
  detail::require_positive(value(s), "pressure");
  return laws.a * pow(s, laws.gamma) - (laws.eps_c / laws.alpha) * pow(s, -laws.alpha);
}

template <class S>
S pressure_prime(const LawSet& laws, const S& s) {
  using std::pow;
  detail::require_positive(value(s), "pressure_prime");
  return laws.a * laws.gamma * pow(s, laws.gamma - 1.0) + laws.eps_c * pow(s, -laws.alpha - 1.0);
}

/// phi'(s) = mu'(s) / s, the BD drift potential derivative.
template <class S>
S phi_prime(const LawSet& laws, const S& s) {
  return mu_prime(laws, s) / s;
}

/// Closed-form antiderivative of phi'. For the power pair this is
/// n/(n-1) s^(n-1) + m/(m-1) s^(m-1); for mu(s) = s it is log(s).
template <class S>
S phi(const LawSet& laws, const S& s) {
  using std::log;
  using std::pow;
  detail::require_positive(value(s), "phi");
  if (laws.family == ViscosityFamily::linear) return log(s);
  return laws.n / (laws.n - 1.0) * pow(s, laws.n - 1.0) +
         laws.m / (laws.m - 1.0) * pow(s, laws.m - 1.0);
}

/// Energy potential with s Q''(s) = p'(s), normalized by Q(1) = Q'(1) = 0.
double potential_Q(const LawSet& laws, double s);

/// Same potential by direct quadrature of Q(s) = int_1^s (s - t) p'(t) / t dt.
double potential_Q_quadrature(const LawSet& laws, double s, double abs_tol = 1e-10);

/// C^1 low-density cutoff: identity below min(rho*, A)/2, zero above min(rho*, A).
double xi(const LawSet& laws, double s);
double xi_prime(const LawSet& laws, double s);

/// Gradient factor for xi(s)^M: d/ds (s^M) weighted by xi(s)/s, so it equals the
/// exact chain rule where xi is the identity and vanishes where xi does.
double xi_power_slope(const LawSet& laws, double s);

struct ValidationCheck {
  std::string name;
  bool satisfied = false;
  double margin = 0.0;  ///< slack of the inequality; sign tells which side
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool admissible = false;

  const ValidationCheck* find(const std::string& name) const;
};

/// Default proxy for the Sobolev exponent q in two dimensions.
inline constexpr double kDefaultQ2D = 40.0;

/// Checks every exponent condition for the given dimension (2 or 3).
ValidationReport validate_assumptions(const LawSet& laws, int dimension, double q2d = kDefaultQ2D);

std::string to_csv(const ValidationReport& report);

}  // namespace reylim
