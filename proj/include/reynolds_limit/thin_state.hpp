#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Core>

#include "reynolds_limit/geometry.hpp"
#include "reynolds_limit/laws.hpp"

namespace reylim {

/// Staggered mesh on the rescaled channel in terrain-following coordinates
/// (x, sigma = Z / h(x)); x periodic on [0, L), sigma in [0, 1].
///
/// Cell (i, j) has center (x_i, sigma_j) = ((i+1/2) dx, (j+1/2) ds).
/// v(i, j) lives on the x-face at x = (i+1) dx, level sigma_j.
/// w(i, k) lives on the sigma-face at x_i, level sigma = k ds, k = 0..ns.
struct ThinGrid {
  int nx = 0;
  int ns = 0;
  double L = 1.0;

  double dx() const { return L / nx; }
  double ds() const { return 1.0 / ns; }
  double x_cell(int i) const { return (i + 0.5) * dx(); }
  double x_face(int i) const { return (i + 1.0) * dx(); }
  double sigma_cell(int j) const { return (j + 0.5) * ds(); }
  double sigma_level(int k) const { return k * ds(); }
  int periodic(int i) const { return ((i % nx) + nx) % nx; }

  void validate() const;
};

/// Discrete fields of the rescaled Navier-Stokes problem at one aspect ratio.
///
/// w carries ns + 1 levels; the wall levels 0 and ns are always zero.
struct ThinState {
  ThinGrid grid;
  double eps = 0.1;
  Eigen::ArrayXXd rho;  ///< nx x ns, cell centers
  Eigen::ArrayXXd v;    ///< nx x ns, x-faces
  Eigen::ArrayXXd w;    ///< nx x (ns + 1), sigma-faces
  Eigen::ArrayXXd P;    ///< nx x ns, normalized pressure P(rho)

  static ThinState zeros(const ThinGrid& grid, double eps);

  void update_pressure(const LawSet& laws);

  /// Cell-area weighted mass sum_ij rho_ij h(x_i) dx ds.
  double mass(const ThinGeometry& geom) const;
};

/// Couette lift v~(Z) = V (1 - Z) for Z < 1 and 0 above.
inline double lift_velocity(double V, double Z) { return Z < 1.0 ? V * (1.0 - Z) : 0.0; }

/// The lift sampled on the x-faces of the mesh (w = 0).
Eigen::ArrayXXd lift_velocity(const ThinGeometry& geom, const ThinGrid& grid);

/// Writes one row per cell: x, sigma, Z, rho, v, w, P, where v is the value on
/// the cell's right x-face and w the value on its lower sigma-face.
void export_fields(const ThinState& state, const ThinGeometry& geom,
                   const std::filesystem::path& path);
std::string fields_csv(const ThinState& state, const ThinGeometry& geom);

/// Inverse of export_fields; eps and the period are taken from the geometry.
ThinState import_fields(const std::filesystem::path& path, const ThinGeometry& geom,
                        const LawSet& laws);

}  // namespace reylim
