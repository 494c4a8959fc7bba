#include "reynolds_limit/reynolds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace reylim {
namespace {

struct Mesh1D {
  int nx;
  double dx;
  Eigen::VectorXd h_cell;
  Eigen::VectorXd h_face;  // face i sits at x = (i + 1) dx
};

Mesh1D make_mesh(const ThinGeometry& geom, int nx) {
  Mesh1D m{nx, geom.L / nx, Eigen::VectorXd(nx), Eigen::VectorXd(nx)};
  for (int i = 0; i < nx; ++i) {
    m.h_cell[i] = geom.h((i + 0.5) * m.dx);
    m.h_face[i] = geom.h((i + 1.0) * m.dx);
  }
  return m;
}

// Partial derivatives of a face flux with respect to its two densities.
struct FaceFluxJet {
  double value;
  double d_left;
  double d_right;
};

FaceFluxJet face_flux_jet(const LawSet& laws, const Mesh1D& mesh, double V, int f,
                          double rl, double rr) {
  const double hf = mesh.h_face[f];
  const Dual dl = reynolds_face_flux(laws, hf, V, mesh.dx, Dual(rl, 1.0), Dual(rr));
  const Dual dr = reynolds_face_flux(laws, hf, V, mesh.dx, Dual(rl), Dual(rr, 1.0));
  return {dl.val, dl.der, dr.der};
}

Eigen::VectorXd face_fluxes(const LawSet& laws, const Mesh1D& mesh, double V,
                            const Eigen::VectorXd& rho) {
  Eigen::VectorXd F(mesh.nx);
  for (int f = 0; f < mesh.nx; ++f) {
    F[f] = reynolds_face_flux(laws, mesh.h_face[f], V, mesh.dx, rho[f], rho[(f + 1) % mesh.nx]);
  }
  return F;
}

double mass_of(const Mesh1D& mesh, const Eigen::VectorXd& rho) {
  return rho.dot(mesh.h_cell) * mesh.dx;
}

// Unknowns y = (rho_0 .. rho_{n-1}, Phi); rows: Phi - Phi_f(rho) per face, then mass.
Eigen::VectorXd stationary_residual(const LawSet& laws, const Mesh1D& mesh, double V, double M0,
                                    const Eigen::VectorXd& y) {
  const int n = mesh.nx;
  const Eigen::VectorXd rho = y.head(n);
  Eigen::VectorXd r(n + 1);
  r.head(n) = Eigen::VectorXd::Constant(n, y[n]) - face_fluxes(laws, mesh, V, rho);
  r[n] = mass_of(mesh, rho) - M0;
  return r;
}

Eigen::SparseMatrix<double> stationary_jacobian(const LawSet& laws, const Mesh1D& mesh, double V,
                                                const Eigen::VectorXd& y) {
  const int n = mesh.nx;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * n + 1);
  for (int f = 0; f < n; ++f) {
    const int r = (f + 1) % n;
    const auto jet = face_flux_jet(laws, mesh, V, f, y[f], y[r]);
    t.emplace_back(f, f, -jet.d_left);
    t.emplace_back(f, r, -jet.d_right);
    t.emplace_back(f, n, 1.0);
  }
  for (int i = 0; i < n; ++i) t.emplace_back(n, i, mesh.h_cell[i] * mesh.dx);
  Eigen::SparseMatrix<double> J(n + 1, n + 1);
  J.setFromTriplets(t.begin(), t.end());
  return J;
}

Eigen::VectorXd sparse_solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                             bool* ok) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    *ok = false;
    return Eigen::VectorXd::Zero(b.size());
  }
  Eigen::VectorXd x = lu.solve(b);
  *ok = lu.info() == Eigen::Success && x.allFinite();
  return x;
}

struct NewtonOutcome {
  bool converged = false;
  bool positivity_failure = false;
  double last_spread = std::numeric_limits<double>::infinity();
};

// Largest step fraction keeping rho above 0.1 * current minimum.
double positivity_limit(const Eigen::VectorXd& rho, const Eigen::VectorXd& drho) {
  const double floor = 0.1 * rho.minCoeff();
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    if (drho[i] < 0.0) alpha = std::min(alpha, (rho[i] - floor) / -drho[i]);
  }
  return alpha;
}

NewtonOutcome stationary_newton(const LawSet& laws, const Mesh1D& mesh, double V, double M0,
                                double tol, int max_it, Eigen::VectorXd& y) {
  const int n = mesh.nx;
  NewtonOutcome out;
  for (int it = 0; it <= max_it; ++it) {
    Eigen::VectorXd r = stationary_residual(laws, mesh, V, M0, y);
    const Eigen::VectorXd F = face_fluxes(laws, mesh, V, y.head(n));
    out.last_spread = F.maxCoeff() - F.minCoeff();
    const bool mass_ok = std::abs(r[n]) <= 1e-12 * M0;
    if (out.last_spread <= tol && mass_ok && r.head(n).cwiseAbs().maxCoeff() <= tol) {
      out.converged = true;
      return out;
    }
    if (it == max_it) break;

    bool ok = true;
    const Eigen::VectorXd dy = sparse_solve(stationary_jacobian(laws, mesh, V, y), -r, &ok);
    if (!ok) break;

    double alpha = positivity_limit(y.head(n), dy.head(n));
    if (!(alpha > 0.0)) {
      out.positivity_failure = true;
      break;
    }
    const double r0 = r.norm();
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Eigen::VectorXd trial = y + alpha * dy;
      if (trial.head(n).minCoeff() > 0.0) {
        const double rt = stationary_residual(laws, mesh, V, M0, trial).norm();
        if (std::isfinite(rt) && rt <= (1.0 - 1e-4 * alpha) * r0) {
          y = trial;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // Accept a full step when already at roundoff level; otherwise stall.
      if (r0 <= 1e3 * tol) {
        y += positivity_limit(y.head(n), dy.head(n)) * dy;
        continue;
      }
      out.positivity_failure = false;
      break;
    }
  }
  return out;
}

}  // namespace

ReynoldsProfile make_profile(const ThinGeometry& geom, const LawSet& laws,
                             const Eigen::VectorXd& rho) {
  const int nx = static_cast<int>(rho.size());
  const Mesh1D mesh = make_mesh(geom, nx);
  ReynoldsProfile p;
  p.dx = mesh.dx;
  p.x = Eigen::VectorXd::LinSpaced(nx, 0.5 * mesh.dx, geom.L - 0.5 * mesh.dx);
  p.rho = rho;
  p.P = rho.unaryExpr([&](double s) { return pressure(laws, s); });
  p.face_flux = face_fluxes(laws, mesh, geom.V, rho);
  p.flux = p.face_flux.mean();
  return p;
}

double profile_mass(const ThinGeometry& geom, const ReynoldsProfile& p) {
  return mass_of(make_mesh(geom, static_cast<int>(p.size())), p.rho);
}

ReynoldsProfile solve_stationary(const ThinGeometry& geom, const LawSet& laws, int nx, double tol,
                                 const StationaryOptions& opts) {
  geom.validate();
  if (nx < 16) throw InputError("solve_stationary: need at least 16 cells");
  if (!(tol > 0.0)) throw InputError("solve_stationary: tol must be > 0");

  const Mesh1D mesh = make_mesh(geom, nx);
  Eigen::VectorXd y(nx + 1);
  y.head(nx).setConstant(geom.M0 / (mesh.h_cell.sum() * mesh.dx));
  y[nx] = face_fluxes(laws, mesh, geom.V, y.head(nx)).mean();

  NewtonOutcome out = stationary_newton(laws, mesh, geom.V, geom.M0, tol, opts.max_iterations, y);
  if (!out.converged) {
    // Relax toward the steady state with the transient scheme, then retry.
    TransientOptions topt;
    topt.dt = opts.fallback_dt;
    topt.t_end = opts.fallback_t_end;
    topt.store_every = std::numeric_limits<int>::max();
    Eigen::VectorXd start = y.head(nx);
    if (!(start.minCoeff() > 0.0)) start.setConstant(geom.M0 / (mesh.h_cell.sum() * mesh.dx));
    start *= geom.M0 / mass_of(mesh, start);
    try {
      const Trajectory tr = solve_transient(geom, laws, start, topt);
      y.head(nx) = tr.profiles.back().rho;
      y[nx] = tr.profiles.back().flux;
      out = stationary_newton(laws, mesh, geom.V, geom.M0, tol, opts.max_iterations, y);
    } catch (const SolverFailure&) {
      // fall through to the failure report below
    }
  }
  if (!out.converged) {
    std::ostringstream msg;
    msg << "solve_stationary: Newton did not converge (flux spread " << out.last_spread << ")";
    if (out.positivity_failure) msg << "; line search could not keep density positive";
    throw SolverFailure(msg.str(), out.last_spread);
  }

  ReynoldsProfile p = make_profile(geom, laws, y.head(nx));
  p.flux = y[nx];
  return p;
}

Trajectory solve_transient(const ThinGeometry& geom, const LawSet& laws,
                           const Eigen::VectorXd& rho_init, const TransientOptions& opts) {
  geom.validate();
  const int nx = static_cast<int>(rho_init.size());
  if (nx < 3) throw InputError("solve_transient: need at least 3 cells");
  if (!(rho_init.minCoeff() > 0.0)) throw InputError("solve_transient: initial density must be > 0");
  if (!(opts.dt > 0.0) || !(opts.t_end >= 0.0)) throw InputError("solve_transient: bad dt/t_end");

  const Mesh1D mesh = make_mesh(geom, nx);
  const double V = geom.V;

  // One implicit Euler step of size dt from rho_old; returns false on failure.
  auto step = [&](const Eigen::VectorXd& rho_old, double dt, Eigen::VectorXd& rho) -> bool {
    rho = rho_old;
    for (int it = 0; it < opts.max_newton; ++it) {
      const Eigen::VectorXd F = face_fluxes(laws, mesh, V, rho);
      Eigen::VectorXd R(nx);
      std::vector<Eigen::Triplet<double>> t;
      t.reserve(3 * nx);
      for (int i = 0; i < nx; ++i) {
        const int im = (i + nx - 1) % nx;
        R[i] = mesh.h_cell[i] * (rho[i] - rho_old[i]) * mesh.dx / dt + (F[i] - F[im]);
        t.emplace_back(i, i, mesh.h_cell[i] * mesh.dx / dt);
      }
      for (int f = 0; f < nx; ++f) {
        const int r = (f + 1) % nx;
        const auto jet = face_flux_jet(laws, mesh, V, f, rho[f], rho[r]);
        // +F_f enters row f, -F_f enters row r
        t.emplace_back(f, f, jet.d_left);
        t.emplace_back(f, r, jet.d_right);
        t.emplace_back(r, f, -jet.d_left);
        t.emplace_back(r, r, -jet.d_right);
      }
      Eigen::SparseMatrix<double> J(nx, nx);
      J.setFromTriplets(t.begin(), t.end());
      bool ok = true;
      const Eigen::VectorXd d = sparse_solve(J, -R, &ok);
      if (!ok) return false;
      rho += d;
      if (!(rho.minCoeff() > 0.0) || !rho.allFinite()) return false;
      if (d.cwiseAbs().maxCoeff() <= opts.newton_tol * std::max(1.0, rho.cwiseAbs().maxCoeff()))
        return true;
    }
    return false;
  };

  Trajectory tr;
  Eigen::VectorXd rho = rho_init;
  const long nsteps = std::lround(opts.t_end / opts.dt);
  auto record = [&](long k, bool keep) {
    tr.masses.push_back(mass_of(mesh, rho));
    if (keep) {
      tr.times.push_back(k * opts.dt);
      tr.profiles.push_back(make_profile(geom, laws, rho));
    }
  };
  record(0, true);

  for (long k = 1; k <= nsteps; ++k) {
    Eigen::VectorXd next;
    bool done = false;
    for (int halvings = 0; halvings <= opts.max_halvings && !done; ++halvings) {
      const int sub = 1 << halvings;
      Eigen::VectorXd cur = rho;
      bool ok = true;
      for (int s = 0; s < sub && ok; ++s) {
        ok = step(cur, opts.dt / sub, next);
        cur = next;
      }
      if (ok) {
        rho = cur;
        done = true;
      }
    }
    if (!done) {
      throw SolverFailure("solve_transient: Newton failed after dt halvings at step " +
                              std::to_string(k),
                          std::numeric_limits<double>::quiet_NaN(), tr.masses);
    }
    const bool keep = (k == nsteps) || (opts.store_every > 0 && k % opts.store_every == 0);
    record(k, keep);
  }
  tr.steps = static_cast<int>(nsteps);
  return tr;
}

LimitVelocity reconstruct_velocity(const ReynoldsProfile& profile, const ThinGeometry& geom,
                                   const LawSet& laws, const Eigen::VectorXd& sigma) {
  const int nx = static_cast<int>(profile.size());
  if (nx < 3) throw InputError("reconstruct_velocity: profile too small");
  if (!(profile.rho.minCoeff() > 0.0)) throw InputError("reconstruct_velocity: invalid profile");
  const Mesh1D mesh = make_mesh(geom, nx);
  const double dx = mesh.dx;
  const int ns = static_cast<int>(sigma.size());

  LimitVelocity out;
  out.sigma = sigma;
  out.Z.resize(nx, ns);
  out.v.resize(nx, ns);
  out.w.resize(nx, ns);
  out.dPdx.resize(nx);

  // face data: face f between cells f and f+1
  Eigen::VectorXd rho_f(nx), mu_f(nx), dPdx_f(nx);
  for (int f = 0; f < nx; ++f) {
    const int r = (f + 1) % nx;
    rho_f[f] = 0.5 * (profile.rho[f] + profile.rho[r]);
    mu_f[f] = mu(laws, rho_f[f]);
    dPdx_f[f] = (profile.P[r] - profile.P[f]) / dx;
  }

  for (int i = 0; i < nx; ++i) {
    const int ip = (i + 1) % nx, im = (i + nx - 1) % nx;
    const double hi = mesh.h_cell[i];
    const double mui = mu(laws, profile.rho[i]);
    out.dPdx[i] = (profile.P[ip] - profile.P[im]) / (2.0 * dx);
    for (int k = 0; k < ns; ++k) {
      const double Z = sigma[k] * hi;
      out.Z(i, k) = Z;
      out.v(i, k) = limit_velocity(geom.V, hi, out.dPdx[i], mui, Z);
      const double q_right = limit_velocity_integral(geom.V, mesh.h_face[i], dPdx_f[i], mu_f[i], Z);
      const double q_left = limit_velocity_integral(geom.V, mesh.h_face[im], dPdx_f[im], mu_f[im], Z);
      out.w(i, k) = -(rho_f[i] * q_right - rho_f[im] * q_left) / (dx * profile.rho[i]);
    }
  }
  return out;
}

MaximumPrinciple check_maximum_principle(const ReynoldsProfile& profile, double floor) {
  if (profile.size() == 0) return {0.0, false};
  const double rmin = profile.rho.minCoeff();
  return {rmin, rmin > floor};
}

}  // namespace reylim
