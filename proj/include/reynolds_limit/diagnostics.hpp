#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "reynolds_limit/dual.hpp"
#include "reynolds_limit/fit_rate.hpp"
#include "reynolds_limit/geometry.hpp"
#include "reynolds_limit/laws.hpp"
#include "reynolds_limit/thin_state.hpp"

namespace reylim {

/// Cell-centered x and Z derivatives of a cell field in the rescaled channel,
/// via the terrain-following chain rule. Centered in the interior, one-sided
/// second order on the first and last sigma rows.
struct CellGradient {
  Eigen::ArrayXXd dx;
  Eigen::ArrayXXd dz;
};

CellGradient cell_gradient(const Eigen::ArrayXXd& f, const ThinGrid& grid, const ThinGeometry& geom);

/// Effective velocity at cell centers: (V, W) = (2 dx mu(rho) / rho, 2 dZ mu(rho) / (eps rho)),
/// together with the same drift formed as 2 grad phi(rho).
struct EffectiveVelocity {
  Eigen::ArrayXXd V, W;
  Eigen::ArrayXXd V_phi, W_phi;
};

EffectiveVelocity effective_velocity(const ThinState& state, const LawSet& laws,
                                     const ThinGeometry& geom);

/// Pointwise drift in one direction for a density carrying its directional
/// derivative as tangent: returns (2 d mu(rho) / rho, 2 d phi(rho)).
inline std::pair<double, double> effective_velocity_pointwise(const LawSet& laws, const Dual& rho) {
  const Dual m = mu(laws, rho);
  const Dual p = phi(laws, rho);
  return {2.0 * m.der / rho.val, 2.0 * p.der};
}

/// Area-weighted L2 norm of eps dx W - dZ V.
double curl_identity_defect(const ThinState& state, const LawSet& laws, const ThinGeometry& geom);

using NamedValues = std::vector<std::pair<std::string, double>>;

struct DiagnosticsReport {
  double eps = 0.0;
  NamedValues energy_terms;
  NamedValues bd_terms;
  NamedValues scaling_norms;
  double curl_defect = 0.0;

  /// Looks a value up in any section; throws InputError for unknown names.
  double value(const std::string& name) const;
};

DiagnosticsReport energy_report(const ThinState& state, const LawSet& laws, const ThinGeometry& geom);

/// name,value rows for every entry of the report.
std::string report_csv(const DiagnosticsReport& report);

/// Names of the ten scaling norms in table order, and the exponent each norm is
/// bounded by (norm <= C eps^bound, so the fitted slope should be >= bound).
const std::vector<std::string>& scaling_norm_names();
const std::vector<double>& scaling_norm_bounds();

struct ScalingRow {
  std::string name;
  double bound = 0.0;
  std::vector<double> eps;
  std::vector<double> values;
  RateFit fit;
};

using ScalingTable = std::vector<ScalingRow>;

/// One row per scaling norm with its fitted log-log slope. Needs at least three
/// distinct eps; each state's own eps is used.
ScalingTable scaling_table(const std::vector<DiagnosticsReport>& reports);
ScalingTable scaling_table(const std::vector<ThinState>& states, const LawSet& laws,
                           const ThinGeometry& geom);

/// norm_name,eps,value,fitted_slope,fit_residual rows.
std::string scaling_csv(const ScalingTable& table);

}  // namespace reylim
