#include <cmath>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <doctest.h>

#include "reynolds_limit/dual.hpp"
#include "reynolds_limit/laws.hpp"

using namespace reylim;
using doctest::Approx;

namespace {

using mp = boost::multiprecision::cpp_bin_float_50;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("viscosity and pressure match 50-digit references") {
  const LawSet laws;
  const mp s = 4;
  const mp n = mp(3) / 4;
  const mp mu_ref = pow(s, n) + s * s;
  const mp mu_prime_ref = n * pow(s, n - 1) + 2 * s;
  CHECK(rel(mu(laws, 4.0), mu_ref.convert_to<double>()) < 1e-15);
  CHECK(rel(mu_prime(laws, 4.0), mu_prime_ref.convert_to<double>()) < 1e-15);

  // frozen values
  CHECK(rel(mu(laws, 4.0), 18.828427124746190097603377448419396) < 1e-15);
  CHECK(rel(mu_prime(laws, 4.0), 8.5303300858899106433006332715786368) < 1e-15);
  CHECK(rel(pressure_prime(laws, 0.1), 1.2) < 1e-14);
  CHECK(rel(phi(laws, 2.0) - phi(laws, 1.0), 2.4773107542388563709066235713003553) < 1e-14);
  CHECK(lambda_of(laws, 1.0) == Approx(1.5).epsilon(1e-15));
}

TEST_CASE("lambda identity on a log scan") {
  const LawSet laws;
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double s = std::pow(10.0, -6.0 + 12.0 * k / 9999.0);
    const double rhs = 2.0 * (s * mu_prime(laws, s) - mu(laws, s));
    worst = std::max(worst, std::abs(lambda_of(laws, s) - rhs) / std::max(std::abs(rhs), 1e-300));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("linear viscosity has no second viscosity") {
  const LawSet lin = LawSet::linear_viscosity();
  for (double s : {1e-8, 0.3, 1.0, 7.0, 1e6}) {
    CHECK(mu(lin, s) == s);
    CHECK(mu_prime(lin, s) == 1.0);
    CHECK(lambda_of(lin, s) == 0.0);
    CHECK(phi(lin, s) == Approx(std::log(s)));
  }
}

TEST_CASE("dual numbers differentiate the laws exactly") {
  LawSet laws;
  laws.n = 0.8;
  laws.m = 2.3;
  laws.gamma = 1.4;
  laws.alpha = 1.7;
  for (double s : {0.05, 0.5, 1.0, 3.0}) {
    const Dual d(s, 1.0);
    CHECK(mu(laws, d).der == Approx(mu_prime(laws, s)).epsilon(1e-14));
    CHECK(pressure(laws, d).der == Approx(pressure_prime(laws, s)).epsilon(1e-14));
    CHECK(phi(laws, d).der == Approx(phi_prime(laws, s)).epsilon(1e-13));
    CHECK(phi_prime(laws, s) == Approx(mu_prime(laws, s) / s).epsilon(1e-15));
  }
}

TEST_CASE("energy potential") {
  LawSet laws;
  SUBCASE("frozen values without cold pressure") {
    laws.eps_c = 0.0;
    CHECK(potential_Q(laws, 0.5) == Approx(0.25).epsilon(1e-15));
    CHECK(potential_Q(laws, 2.0) == Approx(1.0).epsilon(1e-15));
    CHECK(potential_Q(laws, 3.0) == Approx(4.0).epsilon(1e-15));
  }
  SUBCASE("frozen values with cold pressure") {
    CHECK(potential_Q(laws, 0.5) == Approx(0.2525).epsilon(1e-14));
    CHECK(potential_Q(laws, 2.0) == Approx(1.0025).epsilon(1e-14));
    CHECK(potential_Q(laws, 3.0) == Approx(4.0066666666666667).epsilon(1e-14));
  }
  SUBCASE("closed form agrees with quadrature") {
    for (double g : {1.0, 1.4, 2.0, 3.0}) {
      laws.gamma = g;
      for (double s : {0.1, 0.7, 1.0, 1.3, 5.0})
        CHECK(potential_Q(laws, s) == Approx(potential_Q_quadrature(laws, s, 1e-13)).epsilon(1e-10));
    }
  }
  SUBCASE("s Q'' = p' and the normalization") {
    for (double s : {0.3, 1.0, 2.5}) {
      const double h = 1e-4 * s;
      const double q2 = (potential_Q(laws, s + h) - 2 * potential_Q(laws, s) + potential_Q(laws, s - h)) / (h * h);
      CHECK(s * q2 == Approx(pressure_prime(laws, s)).epsilon(1e-5));
    }
    CHECK(potential_Q(laws, 1.0) == 0.0);
    const double h = 1e-6;
    CHECK(std::abs(potential_Q(laws, 1.0 + h) - potential_Q(laws, 1.0 - h)) / (2 * h) < 1e-8);
  }
  SUBCASE("nonnegative") {
    for (double s = 0.01; s < 20.0; s *= 1.3) CHECK(potential_Q(laws, s) >= 0.0);
  }
}

TEST_CASE("cutoff xi") {
  LawSet laws;  // window [0.25, 0.5]
  CHECK(xi(laws, 0.0) == 0.0);
  CHECK(xi(laws, 0.1) == 0.1);
  CHECK(xi(laws, 0.25) == 0.25);
  CHECK(xi(laws, 0.5) == 0.0);
  CHECK(xi(laws, 3.0) == 0.0);
  CHECK(xi_prime(laws, 0.1) == 1.0);
  CHECK(xi_prime(laws, 0.7) == 0.0);
  SUBCASE("C1 across the window edges") {
    for (double e : {0.25, 0.5}) {
      CHECK(xi(laws, e - 1e-12) == Approx(xi(laws, e + 1e-12)).epsilon(1e-9));
      CHECK(xi_prime(laws, e - 1e-12) == Approx(xi_prime(laws, e + 1e-12)).epsilon(1e-9));
    }
  }
  SUBCASE("derivative matches a difference quotient inside the window") {
    for (double s : {0.3, 0.375, 0.45}) {
      const double h = 1e-6;
      CHECK(xi_prime(laws, s) == Approx((xi(laws, s + h) - xi(laws, s - h)) / (2 * h)).epsilon(1e-7));
    }
  }
  SUBCASE("power slope") {
    const double M = laws.M();
    CHECK(xi_power_slope(laws, 0.1) == Approx(M * std::pow(0.1, M - 1.0)).epsilon(1e-14));
    CHECK(xi_power_slope(laws, 2.0) == 0.0);
  }
}

TEST_CASE("law domain errors") {
  const LawSet laws;
  CHECK_THROWS_AS(mu(laws, -1.0), DomainError);
  CHECK_THROWS_AS(pressure(laws, 0.0), DomainError);
  CHECK_THROWS_AS(pressure_prime(laws, -0.5), DomainError);
  CHECK_THROWS_AS(phi(laws, 0.0), DomainError);
  CHECK_THROWS_AS(lambda_of(laws, 0.0), DomainError);
  CHECK_THROWS_AS(potential_Q(laws, 0.0), DomainError);
  CHECK_THROWS_AS(xi(laws, -1e-3), DomainError);
  CHECK_THROWS_AS(mu(laws, std::nan("")), DomainError);
  CHECK(mu(laws, 0.0) == 0.0);
}

TEST_CASE("exponent validator") {
  LawSet laws;
  SUBCASE("defaults in three dimensions") {
    const ValidationReport r = validate_assumptions(laws, 3);
    CHECK(r.admissible);
    CHECK(r.find("m<gamma+n-1/3")->margin == Approx(0.41666666666666667).epsilon(1e-14));
    CHECK(r.find("beta<=2(gamma+n-1)")->margin == Approx(2.5).epsilon(1e-14));
    CHECK(r.find("m<alpha-n+7/3")->margin == Approx(0.58333333333333333).epsilon(1e-14));
  }
  SUBCASE("defaults in two dimensions skip the three-dimensional conditions") {
    const ValidationReport r = validate_assumptions(laws, 2);
    CHECK(r.admissible);
    CHECK(r.find("m<gamma+n-1/3") == nullptr);
  }
  SUBCASE("m = 2.5 breaks the first three-dimensional condition") {
    laws.m = 2.5;
    const ValidationReport r = validate_assumptions(laws, 3);
    CHECK_FALSE(r.admissible);
    CHECK_FALSE(r.find("m<gamma+n-1/3")->satisfied);
  }
  SUBCASE("n = 0.5 is rejected") {
    laws.n = 0.5;
    CHECK_FALSE(validate_assumptions(laws, 2).admissible);
    CHECK_FALSE(validate_assumptions(laws, 2).find("2/3<n<1")->satisfied);
  }
  SUBCASE("q proxy enters the two-dimensional conditions") {
    laws.m = 3.0;
    CHECK(validate_assumptions(laws, 2, 40.0).find("qM<=4-3m")->margin ==
          Approx(4.0 - 9.0 - 40.0 * laws.M()));
  }
  SUBCASE("bad dimension") { CHECK_THROWS_AS(validate_assumptions(laws, 4), InputError); }
  SUBCASE("csv") {
    const std::string csv = to_csv(validate_assumptions(laws, 3));
    CHECK(csv.rfind("condition,satisfied,margin\n", 0) == 0);
    CHECK(csv.find("\"m<gamma+n-1/3\",true,0.41666666666666") != std::string::npos);
  }
}
