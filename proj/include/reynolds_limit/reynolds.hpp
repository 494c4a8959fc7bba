#pragma once

#include <vector>

#include <Eigen/Core>

#include "reynolds_limit/geometry.hpp"
#include "reynolds_limit/laws.hpp"

namespace reylim {

/// Cell-centered solution of the periodic compressible Reynolds equation.
struct ReynoldsProfile {
  double dx = 0.0;
  Eigen::VectorXd x;     ///< cell centers
  Eigen::VectorXd rho;   ///< density per cell
  Eigen::VectorXd P;     ///< normalized pressure P(rho) per cell
  Eigen::VectorXd face_flux;  ///< reconstructed flux at face i+1/2 (x = (i+1) dx)
  double flux = 0.0;     ///< the common mass flux Phi

  Eigen::Index size() const { return rho.size(); }
};

/// Face flux Phi_{i+1/2} = U - D (rho_{i+1} - rho_i) / dx with
/// D = h^3/12 * r P'(r) / mu(r) at the arithmetic face mean r, and the
/// Couette part U = rho_up h V / 2 upwinded on the sign of V.
template <class S>
S reynolds_face_flux(const LawSet& laws, double h_face, double V, double dx,
                     const S& rho_left, const S& rho_right) {
  const S r = 0.5 * (rho_left + rho_right);
  const S D = (h_face * h_face * h_face / 12.0) * r * pressure_prime(laws, r) / mu(laws, r);
  const S rho_up = V >= 0.0 ? rho_left : rho_right;
  return rho_up * (0.5 * h_face * V) - D * (rho_right - rho_left) / dx;
}

struct StationaryOptions {
  int max_iterations = 100;
  /// Fallback: march the transient equation this long from the stalled
  /// iterate before retrying Newton.
  double fallback_dt = 0.05;
  double fallback_t_end = 20.0;
};

/// Newton solve of the stationary equation with the mass constraint
/// sum rho_i h(x_i) dx = M0 closing the periodic system.
///
/// Throws SolverFailure on non-convergence or when the line search cannot keep
/// the density positive.
ReynoldsProfile solve_stationary(const ThinGeometry& geom, const LawSet& laws, int nx,
                                 double tol, const StationaryOptions& opts = {});

/// Recomputes P, face fluxes and flux from a density vector.
ReynoldsProfile make_profile(const ThinGeometry& geom, const LawSet& laws,
                             const Eigen::VectorXd& rho);

/// sum_i rho_i h(x_i) dx
double profile_mass(const ThinGeometry& geom, const ReynoldsProfile& p);

struct TransientOptions {
  double dt = 0.05;
  double t_end = 1.0;
  double newton_tol = 1e-10;
  int max_newton = 50;
  int max_halvings = 10;
  int store_every = 1;  ///< keep every k-th step in the trajectory (the last is always kept)
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ReynoldsProfile> profiles;
  std::vector<double> masses;  ///< discrete mass after every step (including t = 0)
  int steps = 0;
};

/// Implicit Euler for d/dt (rho h) + d/dx Phi = 0, using the same face fluxes
/// as the stationary solver, so its steady states are exactly the stationary
/// roots.
Trajectory solve_transient(const ThinGeometry& geom, const LawSet& laws,
                           const Eigen::VectorXd& rho_init, const TransientOptions& opts);

/// Couette-Poiseuille limit profile at one horizontal station.
template <class S>
S limit_velocity(double V, double h, const S& dPdx, const S& mu_val, double Z) {
  return V * (1.0 - Z / h) + dPdx / (2.0 * mu_val) * Z * (Z - h);
}

/// Closed-form int_0^Z of limit_velocity.
template <class S>
S limit_velocity_integral(double V, double h, const S& dPdx, const S& mu_val, double Z) {
  return V * (Z - Z * Z / (2.0 * h)) + dPdx / (2.0 * mu_val) * (Z * Z * Z / 3.0 - h * Z * Z / 2.0);
}

/// Limit velocity sampled at cell centers x_i and heights Z = sigma_k h(x_i).
struct LimitVelocity {
  Eigen::VectorXd sigma;   ///< normalized heights
  Eigen::MatrixXd Z;       ///< Z(i, k) = sigma_k h(x_i)
  Eigen::MatrixXd v;       ///< horizontal limit velocity
  Eigen::MatrixXd w;       ///< mass-equation reconstruction -(1/rho) d/dx (rho int_0^Z v)
  Eigen::VectorXd dPdx;    ///< centered pressure gradient per cell
};

LimitVelocity reconstruct_velocity(const ReynoldsProfile& profile, const ThinGeometry& geom,
                                   const LawSet& laws, const Eigen::VectorXd& sigma_samples);

struct MaximumPrinciple {
  double rho_min = 0.0;
  bool satisfied = false;
};

MaximumPrinciple check_maximum_principle(const ReynoldsProfile& profile, double floor = 1e-8);

}  // namespace reylim
