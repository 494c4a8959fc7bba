#include "reynolds_limit/thin_ns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "ns_kernel.hpp"
#include "reynolds_limit/io.hpp"

namespace reylim {

using detail::Field;
using detail::NsContext;
using detail::NsFields;

void SolveConfig::validate() const {
  if (!(dt0 > 0.0)) throw InputError("solve: dt0 must be > 0");
  if (!(cfl > 1.0)) throw InputError("solve: cfl must be > 1");
  if (!(tol > 0.0)) throw InputError("solve: tol must be > 0");
  if (max_steps < 0) throw InputError("solve: max_steps must be >= 0");
  if (!(hyper4 >= 0.0)) throw InputError("solve: hyper4 must be >= 0");
  if (!(dt_max >= dt0)) throw InputError("solve: dt_max must be >= dt0");
}

double ResidualNorms::combined() const { return std::sqrt(mass * mass + momx * momx + momz * momz); }

namespace {

// Packed unknown vector: rho (nx*ns), v (nx*ns), interior w levels (nx*(ns-1)).
struct Layout {
  int nx, ns;
  int nr() const { return nx * ns; }
  int nw() const { return nx * (ns - 1); }
  int size() const { return 2 * nr() + nw(); }
  int rho(int i, int j) const { return i * ns + j; }
  int v(int i, int j) const { return nr() + i * ns + j; }
  int w(int i, int k) const { return 2 * nr() + i * (ns - 1) + (k - 1); }
};

template <class S>
NsFields<S> make_fields(const ThinState& s) {
  NsFields<S> f;
  f.rho = s.rho.cast<S>();
  f.v = s.v.cast<S>();
  f.w = s.w.cast<S>();
  return f;
}

Eigen::VectorXd pack_residual(const Layout& lay, const NsFields<double>& r) {
  Eigen::VectorXd out(lay.size());
  for (int i = 0; i < lay.nx; ++i) {
    for (int j = 0; j < lay.ns; ++j) {
      out[lay.rho(i, j)] = r.rho(i, j);
      out[lay.v(i, j)] = r.v(i, j);
    }
    for (int k = 1; k < lay.ns; ++k) out[lay.w(i, k)] = r.w(i, k);
  }
  return out;
}

void apply_update(const Layout& lay, ThinState& s, const Eigen::VectorXd& d, double theta) {
  for (int i = 0; i < lay.nx; ++i) {
    for (int j = 0; j < lay.ns; ++j) {
      s.rho(i, j) += theta * d[lay.rho(i, j)];
      s.v(i, j) += theta * d[lay.v(i, j)];
    }
    for (int k = 1; k < lay.ns; ++k) s.w(i, k) += theta * d[lay.w(i, k)];
  }
}

NsFields<double> evaluate(const NsContext& c, const ThinState& s) {
  NsFields<double> r;
  detail::ns_residual(c, make_fields<double>(s), r);
  return r;
}

ResidualNorms norms_of(const NsContext& c, const NsFields<double>& r) {
  ResidualNorms n;
  double m = 0.0, x = 0.0, z = 0.0;
  for (int i = 0; i < c.nx; ++i) {
    for (int j = 0; j < c.ns; ++j) {
      m += r.rho(i, j) * r.rho(i, j) * c.hc[i];
      x += r.v(i, j) * r.v(i, j) * c.hf[i];
    }
    for (int k = 1; k < c.ns; ++k) z += r.w(i, k) * r.w(i, k) * c.hc[i];
  }
  const double cell = c.dx * c.ds;
  n.mass = std::sqrt(m * cell);
  n.momx = std::sqrt(x * cell);
  n.momz = std::sqrt(z * cell);
  return n;
}

int smallest_divisor_at_least(int n, int lo) {
  for (int d = lo; d < n; ++d)
    if (n % d == 0) return d;
  return n;
}

// Jacobian of the packed residual by colored forward-mode sweeps. Unknowns of
// one field sharing (i mod di, j mod dj) are perturbed together; stencils reach
// at most 2 cells in x and 3 levels in sigma, so within the +-3 / +-4 window
// each residual sees at most one seeded unknown.
std::vector<Eigen::Triplet<double>> colored_jacobian(const NsContext& c, const ThinState& s) {
  const Layout lay{c.nx, c.ns};
  const int di = smallest_divisor_at_least(c.nx, 7);
  const int dj = std::min(9, c.ns + 1);
  const NsFields<Dual> base = make_fields<Dual>(s);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(lay.size()) * 60);

  // Which seeded index of this color lies within the window of `r`?
  auto source = [](int r, int color, int period, int reach, int lo, int hi,
                   bool wrap, int n) -> int {
    for (int d = -reach; d <= reach; ++d) {
      int q = r + d;
      if (wrap) {
        q = ((q % n) + n) % n;
      } else if (q < lo || q > hi) {
        continue;
      }
      if (q % period == color) return q;
    }
    return -1;
  };

  NsFields<Dual> f = base;
  NsFields<Dual> r;
  for (int field = 0; field < 3; ++field) {
    const int klo = field == 2 ? 1 : 0;
    const int khi = c.ns - 1;
    for (int ci = 0; ci < di; ++ci) {
      for (int cj = 0; cj < dj; ++cj) {
        Field<Dual>& target = field == 0 ? f.rho : field == 1 ? f.v : f.w;
        bool any = false;
        for (int i = ci; i < c.nx; i += di)
          for (int k = klo; k <= khi; ++k)
            if (k % dj == cj) {
              target(i, k).der = 1.0;
              any = true;
            }
        if (!any) continue;
        detail::ns_residual(c, f, r);

        auto column = [&](int i, int k) {
          return field == 0 ? lay.rho(i, k) : field == 1 ? lay.v(i, k) : lay.w(i, k);
        };
        auto emit = [&](int row, int ri, int rk, double der) {
          if (der == 0.0) return;
          const int si = source(ri, ci, di, 3, 0, c.nx - 1, true, c.nx);
          const int sk = source(rk, cj, dj, 4, klo, khi, false, 0);
          if (si < 0 || sk < 0) throw std::logic_error("colored_jacobian: stencil wider than window");
          trip.emplace_back(row, column(si, sk), der);
        };
        for (int i = 0; i < c.nx; ++i) {
          for (int j = 0; j < c.ns; ++j) {
            emit(lay.rho(i, j), i, j, r.rho(i, j).der);
            emit(lay.v(i, j), i, j, r.v(i, j).der);
          }
          for (int k = 1; k < c.ns; ++k) emit(lay.w(i, k), i, k, r.w(i, k).der);
        }

        for (int i = ci; i < c.nx; i += di)
          for (int k = klo; k <= khi; ++k)
            if (k % dj == cj) target(i, k).der = 0.0;
      }
    }
  }
  return trip;
}

Eigen::MatrixXd brute_jacobian(const NsContext& c, const ThinState& s) {
  const Layout lay{c.nx, c.ns};
  Eigen::MatrixXd J(lay.size(), lay.size());
  NsFields<Dual> f = make_fields<Dual>(s);
  NsFields<Dual> r;
  auto run = [&](Dual& slot, int col) {
    slot.der = 1.0;
    detail::ns_residual(c, f, r);
    slot.der = 0.0;
    for (int i = 0; i < c.nx; ++i) {
      for (int j = 0; j < c.ns; ++j) {
        J(lay.rho(i, j), col) = r.rho(i, j).der;
        J(lay.v(i, j), col) = r.v(i, j).der;
      }
      for (int k = 1; k < c.ns; ++k) J(lay.w(i, k), col) = r.w(i, k).der;
    }
  };
  for (int i = 0; i < c.nx; ++i) {
    for (int j = 0; j < c.ns; ++j) {
      run(f.rho(i, j), lay.rho(i, j));
      run(f.v(i, j), lay.v(i, j));
    }
    for (int k = 1; k < c.ns; ++k) run(f.w(i, k), lay.w(i, k));
  }
  return J;
}

void check_state(const ThinState& s) {
  s.grid.validate();
  const auto& g = s.grid;
  if (s.rho.rows() != g.nx || s.rho.cols() != g.ns || s.v.rows() != g.nx || s.v.cols() != g.ns ||
      s.w.rows() != g.nx || s.w.cols() != g.ns + 1)
    throw InputError("thin state: field shapes do not match the grid");
}

}  // namespace

ResidualFields residual_fields(const ThinState& state, const LawSet& laws, const ThinGeometry& geom,
                               double hyper4) {
  check_state(state);
  const NsContext c(state.grid, geom, laws, state.eps, hyper4);
  NsFields<double> r = evaluate(c, state);
  return {std::move(r.rho), std::move(r.v), std::move(r.w)};
}

ResidualNorms residual(const ThinState& state, const LawSet& laws, const ThinGeometry& geom,
                       double hyper4) {
  check_state(state);
  const NsContext c(state.grid, geom, laws, state.eps, hyper4);
  return norms_of(c, evaluate(c, state));
}

Eigen::MatrixXd dense_jacobian_for_testing(const ThinState& state, const LawSet& laws,
                                           const ThinGeometry& geom, bool colored) {
  check_state(state);
  const NsContext c(state.grid, geom, laws, state.eps, 0.0);
  if (colored) {
    const Layout lay{c.nx, c.ns};
    const auto trip = colored_jacobian(c, state);
    Eigen::SparseMatrix<double> J(lay.size(), lay.size());
    J.setFromTriplets(trip.begin(), trip.end());
    return Eigen::MatrixXd(J);
  }
  return brute_jacobian(c, state);
}

ThinState initial_guess(const ThinGeometry& geom, const LawSet& laws, const ThinGrid& grid,
                        const Eigen::VectorXd& rho_columns) {
  grid.validate();
  ThinState s = ThinState::zeros(grid, geom.eps);
  if (rho_columns.size() != 0 && rho_columns.size() != grid.nx)
    throw InputError("initial_guess: density profile length must equal nx");
  double hsum = 0.0;
  for (int i = 0; i < grid.nx; ++i) hsum += geom.h(grid.x_cell(i));
  const double uniform = geom.M0 / (hsum * grid.dx());
  for (int i = 0; i < grid.nx; ++i)
    s.rho.row(i).setConstant(rho_columns.size() ? rho_columns[i] : uniform);
  s.v = lift_velocity(geom, grid);
  s.update_pressure(laws);
  return s;
}

Eigen::VectorXd column_flux(const ThinState& state, const ThinGeometry& geom) {
  const ThinGrid& g = state.grid;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(g.nx);
  for (int i = 0; i < g.nx; ++i) {
    const int ip = g.periodic(i + 1);
    const double hf = geom.h(g.x_face(i));
    for (int j = 0; j < g.ns; ++j) {
      const double base = geom.V * (1.0 - g.sigma_cell(j));
      const double mean = 0.5 * (state.rho(i, j) + state.rho(ip, j));
      const double up = geom.V >= 0.0 ? state.rho(i, j) : state.rho(ip, j);
      out[i] += hf * (mean * (state.v(i, j) - base) + up * base) * g.ds();
    }
  }
  return out;
}

MarchResult march_to_steady(const ThinGeometry& geom, const LawSet& laws, const SolveConfig& config,
                            const ThinGrid& grid, std::optional<ThinState> init) {
  geom.validate();
  config.validate();
  grid.validate();
  ThinState s = init ? std::move(*init) : initial_guess(geom, laws, grid);
  s.eps = geom.eps;
  check_state(s);
  if (s.grid.nx != grid.nx || s.grid.ns != grid.ns)
    throw InputError("march_to_steady: initial state grid differs from requested grid");
  if ((s.rho <= 0.0).any()) throw InputError("march_to_steady: initial density must be positive");
  s.w.col(0).setZero();
  s.w.col(grid.ns).setZero();

  const NsContext c(grid, geom, laws, geom.eps, config.hyper4);
  const Layout lay{grid.nx, grid.ns};
  const double e2 = geom.eps * geom.eps;
  const double cell = grid.dx() * grid.ds();

  MarchResult out;
  out.initial_mass = s.mass(geom);

  NsFields<double> r = evaluate(c, s);
  ResidualNorms norms = norms_of(c, r);
  const double r0 = norms.combined();
  double dt = config.dt0;
  out.history.push_back({0, 0.0, norms});
  auto converged = [&](double res) { return res <= config.tol || res <= config.tol * r0; };

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  int step = 0;
  double prev_mass = out.initial_mass;
  while (!converged(norms.combined()) && std::isfinite(norms.combined())) {
    if (step >= config.max_steps) {
      s.update_pressure(laws);
      throw MarchFailure("march_to_steady: no convergence within max_steps", norms.combined(),
                         out.history);
    }
    ++step;
    // The area-weighted sum of the mass rows vanishes identically; one of them
    // is replaced by the conservation constraint so the system stays regular as dt grows.
    const int pin = lay.rho(0, 0);
    std::vector<Eigen::Triplet<double>> trip;
    {
      const auto jac = colored_jacobian(c, s);
      trip.reserve(jac.size() + 3 * lay.size());
      for (const auto& t : jac)
        if (t.row() != pin) trip.emplace_back(t.row(), t.col(), -t.value());
    }
    for (int i = 0; i < grid.nx; ++i) {
      const int ip = c.ip(i);
      for (int j = 0; j < grid.ns; ++j) {
        if (lay.rho(i, j) != pin) trip.emplace_back(lay.rho(i, j), lay.rho(i, j), 1.0 / dt);
        trip.emplace_back(pin, lay.rho(i, j), c.hc[i] * cell);
        const double rho_f = 0.5 * (s.rho(i, j) + s.rho(ip, j));
        trip.emplace_back(lay.v(i, j), lay.v(i, j), e2 * rho_f / dt);
      }
      for (int k = 1; k < grid.ns; ++k) {
        const double rho_w = 0.5 * (s.rho(i, k - 1) + s.rho(i, k));
        trip.emplace_back(lay.w(i, k), lay.w(i, k), e2 * e2 * rho_w / dt);
      }
    }
    Eigen::SparseMatrix<double> A(lay.size(), lay.size());
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd rhs = pack_residual(lay, r);
    rhs[pin] = out.initial_mass - s.mass(geom);

    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
      throw MarchFailure("march_to_steady: singular linearized system", norms.combined(),
                         out.history);
    const Eigen::VectorXd d = lu.solve(rhs);

    double theta = 1.0;
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ns; ++j) {
        const double dr = d[lay.rho(i, j)];
        if (dr < 0.0) theta = std::min(theta, 0.9 * s.rho(i, j) / -dr);
      }
    if (!(theta > 1e-6) || !d.allFinite())
      throw MarchFailure("march_to_steady: density would become negative; lower cfl or enable hyper4",
                         norms.combined(), out.history);

    ThinState trial = s;
    apply_update(lay, trial, d, theta);
    NsFields<double> rt = evaluate(c, trial);
    const ResidualNorms nt = norms_of(c, rt);
    if (!std::isfinite(nt.combined())) {
      dt *= 0.25;
      out.history.push_back({step, dt, norms});
      continue;
    }
    const double ratio = norms.combined() / nt.combined();
    s = std::move(trial);
    r = std::move(rt);
    norms = nt;
    const double m = s.mass(geom);
    out.max_step_mass_drift = std::max(out.max_step_mass_drift, std::abs(m - prev_mass) / prev_mass);
    prev_mass = m;
    out.history.push_back({step, dt, norms});
    const double growth = theta < 1.0 ? 0.5 : std::clamp(ratio, 0.25, config.cfl);
    dt = std::min(config.dt_max, dt * growth);
  }
  if (!std::isfinite(norms.combined()))
    throw MarchFailure("march_to_steady: residual is not finite", norms.combined(), out.history);

  s.update_pressure(laws);
  out.state = std::move(s);
  out.steps = step;
  return out;
}

std::string residual_history_csv(const std::vector<ResidualRecord>& history) {
  std::string out = "step,dt,r_mass,r_momx,r_momz\n";
  for (const auto& rec : history)
    out += csv_row({static_cast<double>(rec.step), rec.dt, rec.norms.mass, rec.norms.momx,
                    rec.norms.momz});
  return out;
}

}  // namespace reylim
