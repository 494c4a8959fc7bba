#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include <doctest.h>

#include "reynolds_limit/io.hpp"
#include "reynolds_limit/reynolds.hpp"
#include "reynolds_limit/thin_ns.hpp"

using namespace reylim;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

ThinGeometry couette_geometry() {
  ThinGeometry g;
  g.h = HeightProfile::flat(1.0);
  g.V = 1.0;
  g.M0 = 1.0;
  return g;
}

ThinGeometry slider_geometry(double eps, double shift = 0.0) {
  ThinGeometry g;
  g.h = HeightProfile::slider(1.0, 0.3, shift);
  g.eps = eps;
  g.V = 1.0;
  g.M0 = g.h.integral();
  return g;
}

ThinState couette_state(const ThinGrid& grid, const LawSet& laws) {
  ThinState s = ThinState::zeros(grid, 0.1);
  s.rho.setOnes();
  for (int j = 0; j < grid.ns; ++j) s.v.col(j).setConstant(1.0 - grid.sigma_cell(j));
  s.update_pressure(laws);
  return s;
}

double max_abs(const ResidualFields& r) {
  return std::max({r.mass.abs().maxCoeff(), r.momx.abs().maxCoeff(), r.momz.abs().maxCoeff()});
}

// Smooth state compatible with the wall data, sampled on the staggered mesh.
ThinState wavy_state(const ThinGrid& grid, const ThinGeometry& geom, const LawSet& laws) {
  ThinState s = ThinState::zeros(grid, geom.eps);
  for (int i = 0; i < grid.nx; ++i) {
    const double xc = grid.x_cell(i), xf = grid.x_face(i);
    for (int j = 0; j < grid.ns; ++j) {
      const double sc = grid.sigma_cell(j);
      s.rho(i, j) = 1.0 + 0.1 * std::sin(2 * kPi * xc) * std::sin(kPi * sc);
      s.v(i, j) = geom.V * (1.0 - sc) + 0.2 * std::sin(2 * kPi * xf) * sc * (1.0 - sc);
    }
    for (int k = 1; k < grid.ns; ++k)
      s.w(i, k) = 0.3 * std::cos(2 * kPi * xc) * std::sin(kPi * grid.sigma_level(k));
  }
  s.update_pressure(laws);
  return s;
}

// ---------------------------------------------------------------------------
// Continuous operator in physical (x, Z) coordinates, differentiated with
// fourth-order central differences of the exact fields. It shares no code with
// the discrete kernel.

using Fn = std::function<double(double, double)>;

constexpr double kStep = 1e-3;

double d_x(const Fn& f, double x, double z) {
  const double h = kStep;
  return (-f(x + 2 * h, z) + 8 * f(x + h, z) - 8 * f(x - h, z) + f(x - 2 * h, z)) / (12 * h);
}

double d_z(const Fn& f, double x, double z) {
  const double h = kStep;
  return (-f(x, z + 2 * h) + 8 * f(x, z + h) - 8 * f(x, z - h) + f(x, z - 2 * h)) / (12 * h);
}

struct ContinuousProblem {
  LawSet laws;
  ThinGeometry geom;
  Fn rho, v, w;

  double eps() const { return geom.eps; }

  Fn vx() const { return [this](double x, double z) { return d_x(v, x, z); }; }
  Fn vz() const { return [this](double x, double z) { return d_z(v, x, z); }; }
  Fn wx() const { return [this](double x, double z) { return d_x(w, x, z); }; }
  Fn wz() const { return [this](double x, double z) { return d_z(w, x, z); }; }
  double mu_at(double x, double z) const { return mu(laws, rho(x, z)); }
  double lam_at(double x, double z) const { return lambda_of(laws, rho(x, z)); }
  double div(double x, double z) const { return vx()(x, z) + wz()(x, z); }
  double speed(double x, double z) const {
    return std::sqrt(v(x, z) * v(x, z) + eps() * eps() * w(x, z) * w(x, z));
  }

  double mass(double x, double z) const {
    const Fn rv = [this](double a, double b) { return rho(a, b) * v(a, b); };
    const Fn rw = [this](double a, double b) { return rho(a, b) * w(a, b); };
    return -(d_x(rv, x, z) + d_z(rw, x, z));
  }

  double momx(double x, double z) const {
    const double e2 = eps() * eps();
    const Fn Fxx = [this](double a, double b) {
      return 2 * mu_at(a, b) * vx()(a, b) + lam_at(a, b) * div(a, b);
    };
    const Fn G = [this](double a, double b) { return mu_at(a, b) * wx()(a, b); };
    const Fn Vz = [this](double a, double b) { return mu_at(a, b) * vz()(a, b); };
    const Fn P = [this](double a, double b) { return pressure(laws, rho(a, b)); };
    const double r = rho(x, z);
    const double conv = r * (v(x, z) * vx()(x, z) + w(x, z) * vz()(x, z));
    const double drag = laws.r0 * r * speed(x, z) * v(x, z);
    return e2 * (d_x(Fxx, x, z) + d_z(G, x, z) - conv - drag) + d_z(Vz, x, z) - d_x(P, x, z);
  }

  double momz(double x, double z) const {
    const double e2 = eps() * eps();
    const Fn H = [this](double a, double b) {
      return 2 * mu_at(a, b) * wz()(a, b) + lam_at(a, b) * div(a, b);
    };
    const Fn J = [this, e2](double a, double b) {
      return mu_at(a, b) * (vz()(a, b) + e2 * wx()(a, b));
    };
    const Fn P = [this](double a, double b) { return pressure(laws, rho(a, b)); };
    const double r = rho(x, z);
    const double conv = r * (v(x, z) * wx()(x, z) + w(x, z) * wz()(x, z));
    const double drag = laws.r0 * r * speed(x, z) * w(x, z);
    return e2 * (d_z(H, x, z) + d_x(J, x, z)) - d_z(P, x, z) - e2 * e2 * (conv + drag);
  }
};

ContinuousProblem manufactured(const ThinGeometry& geom, const LawSet& laws) {
  ContinuousProblem p{laws, geom, {}, {}, {}};
  const HeightProfile h = geom.h;
  const double V = geom.V;
  p.rho = [h](double x, double z) {
    return 1.0 + 0.1 * std::sin(2 * kPi * x) * std::sin(kPi * z / h(x));
  };
  p.v = [h, V](double x, double z) {
    const double s = z / h(x);
    return V * (1.0 - s) + 0.2 * std::sin(2 * kPi * x) * s * (1.0 - s);
  };
  p.w = [h](double x, double z) {
    return 0.3 * std::cos(2 * kPi * x) * std::sin(kPi * z / h(x));
  };
  return p;
}

struct TruncationErrors {
  double mass, momx, momz;
};

// Area-weighted L2 norms of (discrete residual - continuous residual) at the
// unknowns' physical positions.
TruncationErrors truncation_errors(const ContinuousProblem& cp, const ThinGrid& grid) {
  const ThinState s = wavy_state(grid, cp.geom, cp.laws);
  const ResidualFields r = residual_fields(s, cp.laws, cp.geom);
  const double area = grid.dx() * grid.ds();
  TruncationErrors e{0, 0, 0};
  for (int i = 0; i < grid.nx; ++i) {
    const double xc = grid.x_cell(i), xf = grid.x_face(i);
    const double hc = cp.geom.h(xc), hf = cp.geom.h(xf);
    for (int j = 0; j < grid.ns; ++j) {
      const double sc = grid.sigma_cell(j);
      e.mass += std::pow(r.mass(i, j) - cp.mass(xc, sc * hc), 2) * hc * area;
      e.momx += std::pow(r.momx(i, j) - cp.momx(xf, sc * hf), 2) * hf * area;
    }
    for (int k = 1; k < grid.ns; ++k) {
      const double sl = grid.sigma_level(k);
      e.momz += std::pow(r.momz(i, k) - cp.momz(xc, sl * hc), 2) * hc * area;
    }
  }
  return {std::sqrt(e.mass), std::sqrt(e.momx), std::sqrt(e.momz)};
}

}  // namespace

TEST_CASE("exact Couette state is a discrete fixed point") {
  LawSet laws;
  laws.r0 = 0.0;
  const ThinGeometry g = couette_geometry();
  const ThinGrid grid{128, 32, 1.0};
  const ThinState s = couette_state(grid, laws);
  const ResidualNorms n = residual(s, laws, g);
  CHECK(n.mass <= 1e-12);
  CHECK(n.momx <= 1e-12);
  CHECK(n.momz <= 1e-12);

  const MarchResult m = march_to_steady(g, laws, {}, grid, s);
  CHECK((m.state.rho - s.rho).abs().maxCoeff() <= 1e-10);
  CHECK((m.state.v - s.v).abs().maxCoeff() <= 1e-10);
  CHECK(m.state.w.abs().maxCoeff() <= 1e-10);
}

TEST_CASE("Couette with drag is not a fixed point") {
  const LawSet laws;  // r0 = 1
  const ThinGeometry g = couette_geometry();
  const ThinGrid grid{16, 8, 1.0};
  const ResidualNorms n = residual(couette_state(grid, laws), laws, g);
  CHECK(n.momx > 1e-4);
  CHECK(n.mass <= 1e-14);
}

TEST_CASE("manufactured solution: truncation error vanishes under refinement") {
  LawSet laws;
  laws.n = 0.8;
  laws.m = 1.6;
  for (const auto& geom : {slider_geometry(0.5), couette_geometry()}) {
    ThinGeometry g = geom;
    g.eps = 0.5;
    const ContinuousProblem cp = manufactured(g, laws);
    const TruncationErrors coarse = truncation_errors(cp, {32, 16, 1.0});
    const TruncationErrors mid = truncation_errors(cp, {64, 32, 1.0});
    const TruncationErrors fine = truncation_errors(cp, {128, 64, 1.0});
    INFO("mass " << coarse.mass << " " << mid.mass << " " << fine.mass);
    INFO("momx " << coarse.momx << " " << mid.momx << " " << fine.momx);
    INFO("momz " << coarse.momz << " " << mid.momz << " " << fine.momz);
    CHECK(std::log2(mid.mass / fine.mass) >= 1.0);
    CHECK(std::log2(mid.momx / fine.momx) >= 1.0);
    CHECK(std::log2(mid.momz / fine.momz) >= 1.0);
    CHECK(std::log2(coarse.momx / mid.momx) >= 1.0);
  }
}

TEST_CASE("colored Jacobian equals the column-by-column Jacobian") {
  const LawSet laws;
  const ThinGeometry g = slider_geometry(0.2);
  for (const ThinGrid grid : {ThinGrid{16, 6, 1.0}, ThinGrid{21, 5, 1.0}}) {
    ThinState s = wavy_state(grid, g, laws);
    const Eigen::MatrixXd a = dense_jacobian_for_testing(s, laws, g, true);
    const Eigen::MatrixXd b = dense_jacobian_for_testing(s, laws, g, false);
    CHECK(a.rows() == 2 * grid.nx * grid.ns + grid.nx * (grid.ns - 1));
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("Jacobian agrees with finite differences of the residual") {
  const LawSet laws;
  const ThinGeometry g = slider_geometry(0.3);
  const ThinGrid grid{12, 5, 1.0};
  const ThinState s = wavy_state(grid, g, laws);
  const Eigen::MatrixXd J = dense_jacobian_for_testing(s, laws, g, true);
  const int nr = grid.nx * grid.ns;

  auto packed = [&](const ThinState& st) {
    const ResidualFields r = residual_fields(st, laws, g);
    Eigen::VectorXd out(J.rows());
    int p = 0;
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ns; ++j) out[p++] = r.mass(i, j);
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ns; ++j) out[p++] = r.momx(i, j);
    for (int i = 0; i < grid.nx; ++i)
      for (int k = 1; k < grid.ns; ++k) out[p++] = r.momz(i, k);
    return out;
  };

  const double h = 1e-6;
  // one density, one horizontal and one vertical velocity unknown
  for (const int col : {3 * grid.ns + 2, nr + 5 * grid.ns + 1, 2 * nr + 4 * (grid.ns - 1) + 2}) {
    ThinState p = s, m = s;
    if (col < nr) {
      p.rho(col / grid.ns, col % grid.ns) += h;
      m.rho(col / grid.ns, col % grid.ns) -= h;
      p.update_pressure(laws);
      m.update_pressure(laws);
    } else if (col < 2 * nr) {
      p.v((col - nr) / grid.ns, (col - nr) % grid.ns) += h;
      m.v((col - nr) / grid.ns, (col - nr) % grid.ns) -= h;
    } else {
      const int q = col - 2 * nr;
      p.w(q / (grid.ns - 1), q % (grid.ns - 1) + 1) += h;
      m.w(q / (grid.ns - 1), q % (grid.ns - 1) + 1) -= h;
    }
    const Eigen::VectorXd fd = (packed(p) - packed(m)) / (2 * h);
    CHECK((fd - J.col(col)).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, fd.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("residual is equivariant under whole-cell translation") {
  const LawSet laws;
  const ThinGrid grid{24, 6, 1.0};
  const int cells = 7;
  const ThinGeometry a = slider_geometry(0.2);
  const ThinGeometry b = slider_geometry(0.2, cells * grid.dx());
  const ThinState s = wavy_state(grid, a, laws);
  ThinState t = s;
  for (int i = 0; i < grid.nx; ++i) {
    const int to = (i + cells) % grid.nx;
    t.rho.row(to) = s.rho.row(i);
    t.v.row(to) = s.v.row(i);
    t.w.row(to) = s.w.row(i);
  }
  t.update_pressure(laws);
  const ResidualFields ra = residual_fields(s, laws, a);
  const ResidualFields rb = residual_fields(t, laws, b);
  for (int i = 0; i < grid.nx; ++i) {
    const int to = (i + cells) % grid.nx;
    CHECK((rb.mass.row(to) - ra.mass.row(i)).abs().maxCoeff() <= 1e-11);
    CHECK((rb.momx.row(to) - ra.momx.row(i)).abs().maxCoeff() <= 1e-10);
    CHECK((rb.momz.row(to) - ra.momz.row(i)).abs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("march on the slider") {
  const LawSet laws;
  const ThinGeometry g = slider_geometry(0.1);
  const ThinGrid grid{32, 8, 1.0};
  const ReynoldsProfile rey = solve_stationary(g, laws, grid.nx, 1e-12);
  const MarchResult m = march_to_steady(g, laws, {}, grid, initial_guess(g, laws, grid, rey.rho));

  CHECK(m.history.back().norms.combined() <= std::max(1e-10, 1e-10 * m.history.front().norms.combined()));
  CHECK(m.steps == static_cast<int>(m.history.size()) - 1);
  CHECK(m.max_step_mass_drift <= 1e-12);
  CHECK(m.state.mass(g) == Approx(m.initial_mass).epsilon(1e-12));
  CHECK(m.initial_mass == Approx(g.M0).epsilon(1e-12));
  CHECK(m.state.rho.minCoeff() > 0.0);
  CHECK(m.state.w.col(0).abs().maxCoeff() == 0.0);
  CHECK(m.state.w.col(grid.ns).abs().maxCoeff() == 0.0);
  CHECK((m.state.P - m.state.rho.unaryExpr([&](double r) { return pressure(laws, r); })).abs().maxCoeff() == 0.0);

  SUBCASE("column flux is nearly constant and close to the Reynolds flux") {
    const Eigen::VectorXd q = column_flux(m.state, g);
    CHECK(q.maxCoeff() - q.minCoeff() <= 1e-8);
    CHECK(q.mean() == Approx(rey.flux).epsilon(0.05));
  }
  SUBCASE("uniform start reaches the same state") {
    const MarchResult u = march_to_steady(g, laws, {}, grid);
    CHECK((u.state.rho - m.state.rho).abs().maxCoeff() <= 1e-7);
  }
  SUBCASE("history csv") {
    const std::string csv = residual_history_csv(m.history);
    CHECK(csv.rfind("step,dt,r_mass,r_momx,r_momz\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(m.history.size()) + 1);
  }
  SUBCASE("march is deterministic") {
    const MarchResult again = march_to_steady(g, laws, {}, grid, initial_guess(g, laws, grid, rey.rho));
    CHECK((again.state.rho - m.state.rho).abs().maxCoeff() == 0.0);
    CHECK((again.state.v - m.state.v).abs().maxCoeff() == 0.0);
  }
}

TEST_CASE("fourth-difference dissipation vanishes on linear columns and keeps convergence") {
  LawSet laws;
  laws.r0 = 0.0;
  const ThinGeometry g = couette_geometry();
  const ThinGrid grid{16, 8, 1.0};
  const ThinState s = couette_state(grid, laws);
  CHECK(max_abs(residual_fields(s, laws, g, 0.1)) <= 1e-12);

  const ThinGeometry sg = slider_geometry(0.1);
  SolveConfig cfg;
  cfg.hyper4 = 1e-6;
  const MarchResult m = march_to_steady(sg, laws, cfg, {32, 8, 1.0});
  CHECK(m.history.back().norms.combined() <= std::max(cfg.tol, cfg.tol * m.history.front().norms.combined()));
}

TEST_CASE("initial guess") {
  const LawSet laws;
  const ThinGeometry g = slider_geometry(0.1);
  const ThinGrid grid{32, 8, 1.0};
  const ThinState u = initial_guess(g, laws, grid);
  CHECK(u.mass(g) == Approx(g.M0).epsilon(1e-13));
  CHECK(u.rho.maxCoeff() - u.rho.minCoeff() <= 1e-14);
  CHECK((u.v - lift_velocity(g, grid)).abs().maxCoeff() == 0.0);
  CHECK(u.w.abs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(initial_guess(g, laws, grid, Eigen::VectorXd::Ones(5)), InputError);
}

TEST_CASE("march error paths") {
  const LawSet laws;
  const ThinGeometry g = slider_geometry(0.1);
  const ThinGrid grid{16, 4, 1.0};

  SUBCASE("step limit") {
    SolveConfig cfg;
    cfg.max_steps = 1;
    try {
      march_to_steady(g, laws, cfg, grid);
      FAIL("expected MarchFailure");
    } catch (const MarchFailure& e) {
      CHECK(e.records().size() == 2);
      CHECK(e.last_residual() == e.records().back().norms.combined());
    }
  }
  SUBCASE("nonpositive density") {
    ThinState s = initial_guess(g, laws, grid);
    s.rho(3, 1) = -0.1;
    CHECK_THROWS_AS(march_to_steady(g, laws, {}, grid, s), InputError);
  }
  SUBCASE("grid mismatch") {
    CHECK_THROWS_AS(march_to_steady(g, laws, {}, grid, initial_guess(g, laws, {32, 4, 1.0})), InputError);
  }
  SUBCASE("bad solve config") {
    SolveConfig c;
    c.cfl = 1.0;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = {};
    c.dt0 = 0.0;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = {};
    c.dt_max = 1e-3;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = {};
    c.hyper4 = -1.0;
    CHECK_THROWS_AS(march_to_steady(g, laws, c, grid), InputError);
  }
  SUBCASE("bad grid") {
    CHECK_THROWS_AS((ThinGrid{4, 4, 1.0}.validate()), InputError);
    CHECK_THROWS_AS((ThinGrid{16, 2, 1.0}.validate()), InputError);
  }
}

TEST_CASE("field export round trip") {
  const LawSet laws;
  const ThinGeometry g = slider_geometry(0.1);
  const ThinGrid grid{16, 4, 1.0};
  const ThinState s = wavy_state(grid, g, laws);
  const auto dir = std::filesystem::temp_directory_path() / "reylim_test_fields";
  std::filesystem::create_directories(dir);
  const auto path = dir / "fields.csv";
  export_fields(s, g, path);
  CHECK_FALSE(std::filesystem::exists(dir / "fields.csv.tmp"));

  const ThinState back = import_fields(path, g, laws);
  CHECK(back.grid.nx == grid.nx);
  CHECK(back.grid.ns == grid.ns);
  CHECK((back.rho - s.rho).abs().maxCoeff() == 0.0);
  CHECK((back.v - s.v).abs().maxCoeff() == 0.0);
  CHECK((back.w - s.w).abs().maxCoeff() == 0.0);
  CHECK(fields_csv(back, g) == fields_csv(s, g));

  SUBCASE("malformed files") {
    std::ofstream(dir / "bad.csv") << "x,rho\n0.1,1\n";
    CHECK_THROWS_AS(import_fields(dir / "bad.csv", g, laws), InputError);
    std::ofstream(dir / "bad2.csv") << "x,sigma,Z,rho,v,w,P\n0.1,0.5,zz,1,1,0,1\n";
    CHECK_THROWS_AS(import_fields(dir / "bad2.csv", g, laws), InputError);
    CHECK_THROWS_AS(import_fields(dir / "missing.csv", g, laws), InputError);
  }
  std::filesystem::remove_all(dir);
}
