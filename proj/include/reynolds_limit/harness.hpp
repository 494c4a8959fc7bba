#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reynolds_limit/diagnostics.hpp"
#include "reynolds_limit/fit_rate.hpp"
#include "reynolds_limit/geometry.hpp"
#include "reynolds_limit/laws.hpp"
#include "reynolds_limit/reynolds.hpp"
#include "reynolds_limit/thin_ns.hpp"

namespace reylim {

struct SweepConfig {
  std::vector<double> eps_list = {0.2, 0.1, 0.05, 0.025};
  int nx = 128;
  int ns = 32;
  int boundary_exclusion = 2;  ///< sigma rows dropped at each wall before comparing
  double reynolds_tol = 1e-12;
  SolveConfig solve;
  int threads = 0;             ///< 0: REYNOLDS_LIMIT_THREADS or the hardware concurrency

  void validate() const;
};

struct ConvergenceRow {
  double eps = 0.0;
  double err_rho_L2 = 0.0;
  double err_rho_L32 = 0.0;
  double err_v_L2 = 0.0;
  double err_v_L32 = 0.0;
  double err_w_L2 = 0.0;
  double flux_ns_mean = 0.0;
  double flux_ns_maxdev = 0.0;
  double flux_reynolds = 0.0;
  bool converged = false;
  int steps = 0;
  double final_residual = 0.0;
  double seconds = 0.0;
  std::string failure;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;  ///< eps descending
  bool complete = false;
  ReynoldsProfile reynolds;
  std::vector<std::pair<std::string, RateFit>> slopes;  ///< empty when fewer than 3 eps converged
  std::vector<DiagnosticsReport> diagnostics;          ///< converged eps only
  ScalingTable scaling;
  std::vector<ThinState> states;                        ///< converged eps only
  std::vector<std::string> notes;
  double seconds = 0.0;

  const RateFit* slope(const std::string& name) const;
};

/// Errors of a thin-channel state against the Reynolds limit over interior sigma rows.
ConvergenceRow compare_with_limit(const ThinState& state, const ReynoldsProfile& limit,
                                  const ThinGeometry& geom, const LawSet& laws,
                                  int boundary_exclusion);

/// Solves the Reynolds limit once, then the thin-channel problem at every eps
/// (concurrently), and assembles errors, fitted rates and the scaling table.
ConvergenceReport run_sweep(const ThinGeometry& geom, const LawSet& laws, const SweepConfig& sweep);

/// Number of worker threads for a sweep over `jobs` independent runs.
int sweep_threads(int requested, int jobs);

std::string convergence_csv(const ConvergenceReport& report);

/// Writes convergence.csv, scaling.csv and manifest.txt into `dir`. The
/// manifest echoes `config` verbatim, followed by versions, wall times and notes.
void emit_report(const ConvergenceReport& report, const std::filesystem::path& dir,
                 const std::vector<std::pair<std::string, std::string>>& config);

}  // namespace reylim
