#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "reynolds_limit/diagnostics.hpp"

using namespace reylim;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

ThinGeometry flat_geometry(double V = 1.0) {
  ThinGeometry g;
  g.h = HeightProfile::flat(1.0);
  g.V = V;
  return g;
}

ThinGeometry slider_geometry(double eps) {
  ThinGeometry g;
  g.h = HeightProfile::slider(1.0, 0.3);
  g.eps = eps;
  g.M0 = g.h.integral();
  return g;
}

ThinState lift_state(const ThinGrid& grid, const ThinGeometry& g, const LawSet& laws, double rho) {
  ThinState s = ThinState::zeros(grid, g.eps);
  s.rho.setConstant(rho);
  s.v = lift_velocity(g, grid);
  s.update_pressure(laws);
  return s;
}

ThinState manufactured_density(const ThinGrid& grid, const ThinGeometry& g, const LawSet& laws) {
  ThinState s = ThinState::zeros(grid, g.eps);
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ns; ++j)
      s.rho(i, j) = 1.0 + 0.1 * std::sin(2 * kPi * grid.x_cell(i)) * std::sin(kPi * grid.sigma_cell(j));
  s.update_pressure(laws);
  return s;
}

DiagnosticsReport synthetic_report(double eps, double scale) {
  DiagnosticsReport r;
  r.eps = eps;
  for (size_t k = 0; k < scaling_norm_names().size(); ++k)
    r.scaling_norms.emplace_back(scaling_norm_names()[k], scale * std::pow(eps, static_cast<double>(k)));
  return r;
}

}  // namespace

TEST_CASE("lift profile has the closed-form shear energy") {
  const LawSet laws;
  for (double eps : {0.3, 0.05}) {
    ThinGeometry g = flat_geometry(1.7);
    g.eps = eps;
    const ThinGrid grid{16, 32, 1.0};
    const double rbar = 1.2;
    const DiagnosticsReport r = energy_report(lift_state(grid, g, laws, rbar), laws, g);
    const double expected = mu(laws, rbar) * g.V * g.V * g.L / (eps * eps);
    CHECK(r.value("energy_mu_sym_sq") == Approx(expected).epsilon(1e-12));
    CHECK(r.value("bd_mu_antisym_sq") == Approx(expected).epsilon(1e-12));
    CHECK(r.value("energy_2mu_dx_v_sq") == 0.0);
    CHECK(r.value("energy_2mu_dz_w_sq") == 0.0);
    CHECK(r.value("energy_lambda_div_sq") == 0.0);
    CHECK(r.value("sqrt_mu_dz_v") == Approx(std::sqrt(mu(laws, rbar)) * g.V).epsilon(1e-12));
    CHECK(r.value("dx_rho_N") == 0.0);
    CHECK(r.value("dz_rho_N") == 0.0);
    CHECK(r.value("curl_defect") == 0.0);
    // midpoint rule for r0 rho V^3 int_0^1 (1 - Z)^3 dZ
    CHECK(r.value("energy_drag") == Approx(laws.r0 * rbar * std::pow(g.V, 3) / 4.0).epsilon(1e-3));
    CHECK(r.value("energy_drag") == r.value("bd_drag"));
  }
}

TEST_CASE("zero velocity gives zero velocity terms") {
  const LawSet laws;
  ThinGeometry g = slider_geometry(0.1);
  g.V = 0.0;
  const ThinGrid grid{16, 8, 1.0};
  ThinState s = manufactured_density(grid, g, laws);
  const DiagnosticsReport r = energy_report(s, laws, g);
  for (const char* name : {"energy_2mu_dx_v_sq", "energy_2mu_dz_w_sq", "energy_mu_sym_sq",
                           "energy_lambda_div_sq", "energy_drag", "bd_mu_antisym_sq", "bd_drag",
                           "sqrt_mu_dx_v", "sqrt_mu_dz_v", "sqrt_mu_dx_w", "sqrt_mu_dz_w",
                           "sqrt_rho_v_3_2", "sqrt_rho_w_3_2"})
    CHECK(r.value(name) == 0.0);
  CHECK(r.value("dz_rho_N") > 0.0);
  CHECK(r.value("bd_dz_rho_N_sq") > 0.0);
}

TEST_CASE("squared terms are nonnegative on random states") {
  LawSet laws;
  laws.n = 0.7;  // lambda < 0 near zero density
  std::mt19937 gen(20240917u);
  std::uniform_real_distribution<double> dens(0.05, 3.0), vel(-2.0, 2.0);
  const ThinGeometry g = slider_geometry(0.2);
  const ThinGrid grid{12, 6, 1.0};
  for (int trial = 0; trial < 25; ++trial) {
    ThinState s = ThinState::zeros(grid, g.eps);
    s.rho = s.rho.unaryExpr([&](double) { return dens(gen); });
    s.v = s.v.unaryExpr([&](double) { return vel(gen); });
    for (int i = 0; i < grid.nx; ++i)
      for (int k = 1; k < grid.ns; ++k) s.w(i, k) = vel(gen);
    s.update_pressure(laws);
    const DiagnosticsReport r = energy_report(s, laws, g);
    for (const auto& [k, v] : r.energy_terms)
      if (k != "energy_lambda_div_sq") CHECK(v >= 0.0);
    for (const auto& [k, v] : r.bd_terms) CHECK(v >= 0.0);
    for (const auto& [k, v] : r.scaling_norms) CHECK(v >= 0.0);
    CHECK(r.curl_defect >= 0.0);
  }
}

TEST_CASE("effective velocity") {
  const LawSet laws;
  const ThinGeometry g = slider_geometry(0.1);
  const ThinGrid grid{32, 8, 1.0};

  SUBCASE("constant density") {
    ThinState s = lift_state(grid, g, laws, 0.8);
    const EffectiveVelocity u = effective_velocity(s, laws, g);
    CHECK(u.V.abs().maxCoeff() == 0.0);
    CHECK(u.W.abs().maxCoeff() == 0.0);
  }
  SUBCASE("density depending on x only") {
    ThinState s = ThinState::zeros(grid, g.eps);
    for (int i = 0; i < grid.nx; ++i) s.rho.row(i).setConstant(1.0 + 0.3 * std::cos(2 * kPi * grid.x_cell(i)));
    const EffectiveVelocity u = effective_velocity(s, laws, g);
    CHECK(u.W.abs().maxCoeff() == 0.0);
    CHECK(u.W_phi.abs().maxCoeff() == 0.0);
    CHECK(u.V.abs().maxCoeff() > 0.1);
    CHECK(curl_identity_defect(s, laws, g) == 0.0);
  }
  SUBCASE("mu and phi forms agree pointwise") {
    double worst = 0.0;
    for (double r = 0.05; r < 5.0; r *= 1.17) {
      for (double dr : {-2.0, 0.3, 7.0}) {
        const auto [a, b] = effective_velocity_pointwise(laws, Dual(r, dr));
        worst = std::max(worst, std::abs(a - b) / std::abs(b));
      }
    }
    CHECK(worst <= 1e-10);
  }
  SUBCASE("discrete mu and phi forms agree to second order") {
    double prev = 0.0;
    for (int nx : {32, 64, 128}) {
      const ThinState s = manufactured_density({nx, nx / 4, 1.0}, g, laws);
      const EffectiveVelocity u = effective_velocity(s, laws, g);
      const double diff = (u.V - u.V_phi).abs().maxCoeff();
      if (prev > 0.0) CHECK(std::log2(prev / diff) > 1.8);
      prev = diff;
    }
  }
  SUBCASE("nonpositive density") {
    ThinState s = lift_state(grid, g, laws, 1.0);
    s.rho(2, 2) = 0.0;
    CHECK_THROWS_AS(effective_velocity(s, laws, g), DomainError);
    CHECK_THROWS_AS(energy_report(s, laws, g), DomainError);
  }
}

TEST_CASE("curl defect is second order on a smooth density") {
  const LawSet laws;
  const ThinGeometry g = slider_geometry(0.1);
  std::vector<double> d;
  for (int nx : {32, 64, 128}) d.push_back(curl_identity_defect(manufactured_density({nx, nx / 4, 1.0}, g, laws), laws, g));
  for (size_t k = 1; k < d.size(); ++k) {
    CHECK(d[k - 1] / d[k] >= 3.4);
    CHECK(d[k - 1] / d[k] <= 4.6);
  }
}

TEST_CASE("cell gradient") {
  const ThinGeometry g = slider_geometry(0.1);
  const ThinGrid grid{32, 8, 1.0};
  SUBCASE("linear in Z") {
    Eigen::ArrayXXd f(grid.nx, grid.ns);
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ns; ++j) f(i, j) = 2.0 + 3.0 * grid.sigma_cell(j) * g.h(grid.x_cell(i));
    const CellGradient c = cell_gradient(f, grid, g);
    CHECK((c.dz - 3.0).abs().maxCoeff() <= 1e-12);
    CHECK(c.dx.abs().maxCoeff() <= 0.05);
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(cell_gradient(Eigen::ArrayXXd::Zero(3, 3), grid, g), InputError);
  }
}

TEST_CASE("report lookup and csv") {
  const LawSet laws;
  const ThinGeometry g = flat_geometry();
  const DiagnosticsReport r = energy_report(lift_state({16, 4, 1.0}, g, laws, 1.0), laws, g);
  CHECK(r.energy_terms.size() == 5);
  CHECK(r.bd_terms.size() == 6);
  CHECK(r.scaling_norms.size() == 10);
  CHECK_THROWS_AS(r.value("no_such_term"), InputError);
  const std::string csv = report_csv(r);
  CHECK(csv.rfind("name,value\neps,0.10000000000000001\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 1 + 5 + 6 + 10 + 1);
}

TEST_CASE("scaling table") {
  CHECK(scaling_norm_names().size() == 10);
  CHECK(scaling_norm_bounds().size() == 10);
  std::vector<DiagnosticsReport> reps = {synthetic_report(0.2, 2.0), synthetic_report(0.1, 2.0),
                                         synthetic_report(0.05, 2.0)};
  const ScalingTable t = scaling_table(reps);
  REQUIRE(t.size() == 10);
  for (size_t k = 0; k < t.size(); ++k) {
    CHECK(t[k].name == scaling_norm_names()[k]);
    CHECK(t[k].bound == scaling_norm_bounds()[k]);
    CHECK(t[k].fit.slope == Approx(static_cast<double>(k)).epsilon(1e-12).scale(1.0));
    CHECK(t[k].values.size() == 3);
  }
  const std::string csv = scaling_csv(t);
  CHECK(csv.rfind("norm_name,eps,value,fitted_slope,fit_residual\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 31);

  reps.pop_back();
  CHECK_THROWS_AS(scaling_table(reps), InputError);
  reps.push_back(synthetic_report(0.1, 3.0));
  CHECK_THROWS_AS(scaling_table(reps), InputError);
}
