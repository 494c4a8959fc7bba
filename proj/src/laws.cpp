#include "reynolds_limit/laws.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace reylim {

double potential_Q(const LawSet& laws, double s) {
  detail::require_positive(s, "potential_Q");
  // hot part: s Q'' = a gamma s^(gamma-1)
  double hot = 0.0;
  if (laws.gamma == 1.0) {
    hot = laws.a * (s * std::log(s) - s + 1.0);
  } else {
    const double g = laws.gamma;
    hot = laws.a * (std::pow(s, g) - g * s + g - 1.0) / (g - 1.0);
  }
  // cold part: s Q'' = eps_c s^(-alpha-1)
  const double al = laws.alpha;
  const double cold =
      laws.eps_c / (al + 1.0) * (s - 1.0 + (std::pow(s, -al) - 1.0) / al);
  return hot + cold;
}

double potential_Q_quadrature(const LawSet& laws, double s, double abs_tol) {
  detail::require_positive(s, "potential_Q_quadrature");
  if (s == 1.0) return 0.0;
  auto integrand = [&](double t) { return (s - t) * pressure_prime(laws, t) / t; };
  const double lo = std::min(1.0, s);
  const double hi = std::max(1.0, s);
  double err = 0.0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, lo, hi, 15, abs_tol, &err);
  return s >= 1.0 ? val : -val;
}

namespace {
struct CutoffWindow {
  double lo;
  double hi;
};
CutoffWindow cutoff_window(const LawSet& laws) {
  const double c = std::min(laws.rho_star, laws.A);
  return {0.5 * c, c};
}
}  // namespace

double xi(const LawSet& laws, double s) {
  detail::require_nonnegative(s, "xi");
  const auto [lo, hi] = cutoff_window(laws);
  if (s <= lo) return s;
  if (s >= hi) return 0.0;
  // Hermite blend: value lo with slope 1 at lo, value 0 with slope 0 at hi.
  const double w = hi - lo;
  const double t = (s - lo) / w;
  const double h00 = 2 * t * t * t - 3 * t * t + 1;
  const double h10 = t * t * t - 2 * t * t + t;
  return h00 * lo + h10 * w;
}

double xi_prime(const LawSet& laws, double s) {
  detail::require_nonnegative(s, "xi_prime");
  const auto [lo, hi] = cutoff_window(laws);
  if (s <= lo) return 1.0;
  if (s >= hi) return 0.0;
  const double w = hi - lo;
  const double t = (s - lo) / w;
  const double dh00 = 6 * t * t - 6 * t;
  const double dh10 = 3 * t * t - 4 * t + 1;
  return (dh00 * lo + dh10 * w) / w;
}

double xi_power_slope(const LawSet& laws, double s) {
  detail::require_positive(s, "xi_power_slope");
  const double weight = xi(laws, s) / s;
  if (weight == 0.0) return 0.0;
  return weight * laws.M() * std::pow(s, laws.M() - 1.0);
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  auto it = std::find_if(checks.begin(), checks.end(),
                         [&](const ValidationCheck& c) { return c.name == name; });
  return it == checks.end() ? nullptr : &*it;
}

ValidationReport validate_assumptions(const LawSet& laws, int dimension, double q2d) {
  if (dimension != 2 && dimension != 3) throw InputError("dimension must be 2 or 3");
  ValidationReport r;
  auto strict = [&](std::string name, double margin) {
    r.checks.push_back({std::move(name), margin > 0.0, margin});
  };
  auto loose = [&](std::string name, double margin) {
    r.checks.push_back({std::move(name), margin >= 0.0, margin});
  };

  const double g = laws.gamma, n = laws.n, m = laws.m, al = laws.alpha, be = laws.beta;
  const double q = dimension == 3 ? 6.0 : q2d;
  const double M = laws.M(), N = laws.N();

  loose("gamma>=1", g - 1.0);
  loose("alpha>=1", al - 1.0);
  strict("m>1", m - 1.0);
  strict("2/3<n<1", std::min(n - 2.0 / 3.0, 1.0 - n));
  strict("a>0", laws.a);
  strict("beta>0", be);
  strict("eps_c>0", laws.eps_c);
  strict("rho_star>0", laws.rho_star);
  strict("A>0", laws.A);
  loose("r0>=0", laws.r0);
  if (dimension == 3) {
    strict("m<gamma+n-1/3", g + n - 1.0 / 3.0 - m);
    loose("beta<=2(gamma+n-1)", 2.0 * (g + n - 1.0) - be);
    strict("m<alpha-n+7/3", al - n + 7.0 / 3.0 - m);
  }
  strict("3m-2<qN", q * N - (3.0 * m - 2.0));
  loose("4beta<=(q+2)(n+gamma-1)", (q + 2.0) * (n + g - 1.0) - 4.0 * be);
  loose("qM<=4-3m", 4.0 - 3.0 * m - q * M);
  // 2 mu + lambda = (4n - 2) s^n + (4m - 2) s^m for the power pair
  strict("coercivity 2mu+lambda>0 (n>1/2)", n - 0.5);

  r.admissible = std::all_of(r.checks.begin(), r.checks.end(),
                             [](const ValidationCheck& c) { return c.satisfied; });
  return r;
}

std::string to_csv(const ValidationReport& report) {
  std::ostringstream os;
  os << "condition,satisfied,margin\n";
  char buf[64];
  for (const auto& c : report.checks) {
    std::snprintf(buf, sizeof buf, "%.17g", c.margin);
    os << '"' << c.name << "\"," << (c.satisfied ? "true" : "false") << ',' << buf << '\n';
  }
  return os.str();
}

}  // namespace reylim
