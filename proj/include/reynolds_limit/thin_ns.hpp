#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "reynolds_limit/errors.hpp"
#include "reynolds_limit/geometry.hpp"
#include "reynolds_limit/laws.hpp"
#include "reynolds_limit/thin_state.hpp"

namespace reylim {

/// Pseudo-transient continuation controls.
struct SolveConfig {
  double dt0 = 1e-2;     ///< first pseudo-time step
  double cfl = 10.0;     ///< cap on the growth of dt between consecutive steps
  double tol = 1e-10;    ///< stop when the residual drops below tol (absolute) or tol * initial
  int max_steps = 200;
  double hyper4 = 0.0;   ///< fourth-difference velocity dissipation; 0 disables it
  double dt_max = 1e12;

  void validate() const;
};

/// Pointwise residual fields of the steady equations, scaled so that every
/// row is O(1) as eps -> 0:
///   mass = -(d_x(rho v) + d_Z(rho w))
///   momx = eps^2 * (rhs - lhs of the horizontal momentum equation)
///   momz = eps^3 * (rhs - lhs of the vertical momentum equation)
/// momz rows at the walls (k = 0, ns) are zero.
struct ResidualFields {
  Eigen::ArrayXXd mass;
  Eigen::ArrayXXd momx;
  Eigen::ArrayXXd momz;
};

struct ResidualNorms {
  double mass = 0.0;
  double momx = 0.0;
  double momz = 0.0;

  double combined() const;
};

ResidualFields residual_fields(const ThinState& state, const LawSet& laws,
                               const ThinGeometry& geom, double hyper4 = 0.0);

/// Area-weighted discrete L2 norms of residual_fields.
ResidualNorms residual(const ThinState& state, const LawSet& laws, const ThinGeometry& geom,
                       double hyper4 = 0.0);

struct ResidualRecord {
  int step = 0;
  double dt = 0.0;
  ResidualNorms norms;
};

/// Thrown by march_to_steady; carries the residual history so far.
class MarchFailure : public SolverFailure {
 public:
  MarchFailure(const std::string& what, double last, std::vector<ResidualRecord> records)
      : SolverFailure(what, last), records_(std::move(records)) {}
  const std::vector<ResidualRecord>& records() const noexcept { return records_; }

 private:
  std::vector<ResidualRecord> records_;
};

struct MarchResult {
  ThinState state;
  std::vector<ResidualRecord> history;  ///< entry 0 is the initial state
  int steps = 0;
  double initial_mass = 0.0;
  double max_step_mass_drift = 0.0;     ///< max relative mass change over one step
};

/// Default starting guess: density extended constant in Z from a cell-centered
/// profile (or uniform M0 / |Omega| when empty) with the lift velocity.
ThinState initial_guess(const ThinGeometry& geom, const LawSet& laws, const ThinGrid& grid,
                        const Eigen::VectorXd& rho_columns = {});

/// Drives the pseudo-time problem to a steady state. Each step solves the
/// linearized backward-Euler system (D/dt - J) delta = R exactly, with J the
/// exact Jacobian; dt grows by switched evolution relaxation.
MarchResult march_to_steady(const ThinGeometry& geom, const LawSet& laws,
                            const SolveConfig& config, const ThinGrid& grid,
                            std::optional<ThinState> init = std::nullopt);

/// Sparse Jacobian of the packed residual, assembled by colored forward-mode
/// evaluation. Exposed for verification.
Eigen::MatrixXd dense_jacobian_for_testing(const ThinState& state, const LawSet& laws,
                                           const ThinGeometry& geom, bool colored);

/// Column flux sum_j Fx(i, j) ds through each x-face, as used by the mass equation.
Eigen::VectorXd column_flux(const ThinState& state, const ThinGeometry& geom);

std::string residual_history_csv(const std::vector<ResidualRecord>& history);

}  // namespace reylim
