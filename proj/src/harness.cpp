#include "reynolds_limit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <thread>

#include "reynolds_limit/io.hpp"

#ifndef REYNOLDS_LIMIT_VERSION
#define REYNOLDS_LIMIT_VERSION "unknown"
#endif

namespace reylim {
namespace {

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Accumulates sum |e|^p * weight for p = 2 and p = 3/2.
struct NormPair {
  double s2 = 0.0;
  double s32 = 0.0;
  void add(double e, double weight) {
    const double a = std::abs(e);
    s2 += a * a * weight;
    s32 += std::pow(a, 1.5) * weight;
  }
  double l2() const { return std::sqrt(s2); }
  double l32() const { return std::pow(s32, 2.0 / 3.0); }
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void SweepConfig::validate() const {
  if (eps_list.empty()) throw InputError("sweep: eps_list must not be empty");
  for (size_t k = 0; k < eps_list.size(); ++k) {
    if (!(eps_list[k] > 0.0 && eps_list[k] <= 1.0))
      throw InputError("sweep: every eps must lie in (0, 1]");
    if (k > 0 && !(eps_list[k] < eps_list[k - 1]))
      throw InputError("sweep: eps_list must be strictly decreasing");
  }
  ThinGrid{nx, ns, 1.0}.validate();
  if (nx < 16) throw InputError("sweep: nx must be >= 16");
  if (boundary_exclusion < 0 || 2 * boundary_exclusion >= ns)
    throw InputError("sweep: boundary_exclusion must satisfy 0 <= 2 * exclusion < n_sigma");
  if (!(reynolds_tol > 0.0)) throw InputError("sweep: reynolds_tol must be > 0");
  if (threads < 0) throw InputError("sweep: threads must be >= 0");
  solve.validate();
}

const RateFit* ConvergenceReport::slope(const std::string& name) const {
  for (const auto& [k, f] : slopes)
    if (k == name) return &f;
  return nullptr;
}

ConvergenceRow compare_with_limit(const ThinState& state, const ReynoldsProfile& limit,
                                  const ThinGeometry& geom, const LawSet& laws,
                                  int boundary_exclusion) {
  const ThinGrid& g = state.grid;
  if (limit.size() != g.nx) throw InputError("compare_with_limit: Reynolds grid differs from nx");
  const int b = boundary_exclusion;
  if (b < 0 || 2 * b >= g.ns) throw InputError("compare_with_limit: invalid boundary exclusion");
  const double dx = g.dx(), ds = g.ds();

  ConvergenceRow row;
  row.eps = state.eps;

  NormPair er, ev;
  for (int i = 0; i < g.nx; ++i) {
    const int ip = g.periodic(i + 1);
    const double hc = geom.h(g.x_cell(i));
    const double hf = geom.h(g.x_face(i));
    const double rho_f = 0.5 * (limit.rho[i] + limit.rho[ip]);
    const double dPdx = (limit.P[ip] - limit.P[i]) / dx;
    const double mu_f = mu(laws, rho_f);
    for (int j = b; j < g.ns - b; ++j) {
      er.add(state.rho(i, j) - limit.rho[i], hc * dx * ds);
      const double vl = limit_velocity(geom.V, hf, dPdx, mu_f, g.sigma_cell(j) * hf);
      ev.add(state.v(i, j) - vl, hf * dx * ds);
    }
  }
  row.err_rho_L2 = er.l2();
  row.err_rho_L32 = er.l32();
  row.err_v_L2 = ev.l2();
  row.err_v_L32 = ev.l32();

  const int kb = std::max(b, 1);
  Eigen::VectorXd levels(g.ns - 2 * kb + 1);
  for (int k = kb; k <= g.ns - kb; ++k) levels[k - kb] = g.sigma_level(k);
  const LimitVelocity lv = reconstruct_velocity(limit, geom, laws, levels);
  NormPair ew;
  for (int i = 0; i < g.nx; ++i) {
    const double hc = geom.h(g.x_cell(i));
    for (int k = kb; k <= g.ns - kb; ++k) ew.add(state.w(i, k) - lv.w(i, k - kb), hc * dx * ds);
  }
  row.err_w_L2 = ew.l2();

  const Eigen::VectorXd q = column_flux(state, geom);
  row.flux_ns_mean = q.mean();
  row.flux_ns_maxdev = (q.array() - row.flux_ns_mean).abs().maxCoeff();
  row.flux_reynolds = limit.flux;
  return row;
}

int sweep_threads(int requested, int jobs) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("REYNOLDS_LIMIT_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end == env || *end != '\0' || v < 1)
        throw InputError("REYNOLDS_LIMIT_THREADS must be a positive integer");
      n = static_cast<int>(v);
    } else {
      n = static_cast<int>(std::thread::hardware_concurrency());
    }
  }
  return std::clamp(n, 1, std::max(jobs, 1));
}

ConvergenceReport run_sweep(const ThinGeometry& geom, const LawSet& laws, const SweepConfig& sweep) {
  const auto t0 = std::chrono::steady_clock::now();
  geom.validate();
  sweep.validate();
  if (!validate_assumptions(laws, 2).admissible)
    throw InputError("run_sweep: laws are not admissible in dimension 2");

  ConvergenceReport report;
  report.reynolds = solve_stationary(geom, laws, sweep.nx, sweep.reynolds_tol, {});
  const ThinGrid grid{sweep.nx, sweep.ns, geom.L};
  const int n = static_cast<int>(sweep.eps_list.size());

  std::vector<ConvergenceRow> rows(n);
  std::vector<std::optional<ThinState>> states(n);
  auto run_one = [&](int k) {
    const auto tk = std::chrono::steady_clock::now();
    ThinGeometry ge = geom;
    ge.eps = sweep.eps_list[k];
    ConvergenceRow& row = rows[k];
    try {
      ThinState init = initial_guess(ge, laws, grid, report.reynolds.rho);
      MarchResult res = march_to_steady(ge, laws, sweep.solve, grid, std::move(init));
      row = compare_with_limit(res.state, report.reynolds, ge, laws, sweep.boundary_exclusion);
      row.converged = true;
      row.steps = res.steps;
      row.final_residual = res.history.back().norms.combined();
      states[k] = std::move(res.state);
    } catch (const MarchFailure& e) {
      row = ConvergenceRow{};
      row.failure = e.what();
      row.steps = e.records().empty() ? 0 : e.records().back().step;
      row.final_residual = e.last_residual();
    } catch (const std::exception& e) {
      row = ConvergenceRow{};
      row.failure = e.what();
      row.final_residual = kNaN;
    }
    if (!row.converged) {
      row.err_rho_L2 = row.err_rho_L32 = row.err_v_L2 = row.err_v_L32 = row.err_w_L2 = kNaN;
      row.flux_ns_mean = row.flux_ns_maxdev = kNaN;
      row.flux_reynolds = report.reynolds.flux;
    }
    row.eps = ge.eps;
    row.seconds = elapsed(tk);
  };

  const int nthreads = sweep_threads(sweep.threads, n);
  if (nthreads == 1) {
    for (int k = 0; k < n; ++k) run_one(k);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&] {
        for (int k = next++; k < n; k = next++) run_one(k);
      });
    for (auto& th : pool) th.join();
  }

  report.rows = std::move(rows);
  report.complete = std::all_of(report.rows.begin(), report.rows.end(),
                                [](const ConvergenceRow& r) { return r.converged; });
  for (int k = 0; k < n; ++k) {
    if (!states[k]) continue;
    ThinGeometry ge = geom;
    ge.eps = sweep.eps_list[k];
    report.diagnostics.push_back(energy_report(*states[k], laws, ge));
    report.states.push_back(std::move(*states[k]));
  }

  if (report.states.size() >= 3) {
    auto fit = [&](const char* name, double ConvergenceRow::*field) {
      std::vector<std::pair<double, double>> pairs;
      for (const auto& r : report.rows)
        if (r.converged) pairs.emplace_back(r.eps, r.*field);
      report.slopes.emplace_back(name, fit_rate(pairs));
    };
    fit("err_rho_L2", &ConvergenceRow::err_rho_L2);
    fit("err_rho_L32", &ConvergenceRow::err_rho_L32);
    fit("err_v_L2", &ConvergenceRow::err_v_L2);
    fit("err_v_L32", &ConvergenceRow::err_v_L32);
    fit("err_w_L2", &ConvergenceRow::err_w_L2);
    report.scaling = scaling_table(report.diagnostics);

    const double rho_slope = report.slope("err_rho_L2")->slope;
    const double v_slope = report.slope("err_v_L2")->slope;
    if (rho_slope > 0.8 && !(v_slope > 0.2))
      report.notes.push_back(
          "velocity errors plateau while density errors vanish: consistent with weak-only "
          "convergence of the velocity");
  }
  if (!report.complete) report.notes.push_back("incomplete: at least one eps solve failed");
  report.seconds = elapsed(t0);
  return report;
}

std::string convergence_csv(const ConvergenceReport& report) {
  std::string out =
      "eps,err_rho_L2,err_rho_L32,err_v_L2,err_v_L32,err_w_L2,flux_ns_mean,flux_ns_maxdev,"
      "flux_reynolds\n";
  for (const auto& r : report.rows)
    out += csv_row({r.eps, r.err_rho_L2, r.err_rho_L32, r.err_v_L2, r.err_v_L32, r.err_w_L2,
                    r.flux_ns_mean, r.flux_ns_maxdev, r.flux_reynolds});
  return out;
}

void emit_report(const ConvergenceReport& report, const std::filesystem::path& dir,
                 const std::vector<std::pair<std::string, std::string>>& config) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "convergence.csv", convergence_csv(report));
  if (!report.scaling.empty()) {
    write_file_atomic(dir / "scaling.csv", scaling_csv(report.scaling));
  } else {
    write_file_atomic(dir / "scaling.csv", "norm_name,eps,value,fitted_slope,fit_residual\n");
  }

  std::string m = "# reynolds_limit sweep manifest\n[config]\n";
  for (const auto& [k, v] : config) m += k + "=" + v + "\n";
  m += "[versions]\n";
  m += std::string("reynolds_limit=") + REYNOLDS_LIMIT_VERSION + "\n";
  m += "eigen=" + std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
       "." + std::to_string(EIGEN_MINOR_VERSION) + "\n";
#ifdef __VERSION__
  m += std::string("compiler=") + __VERSION__ + "\n";
#endif
  m += "[status]\n";
  m += std::string("complete=") + (report.complete ? "true" : "false") + "\n";
  for (const auto& r : report.rows) {
    m += "eps=" + format_double(r.eps) + " converged=" + (r.converged ? "true" : "false") +
         " steps=" + std::to_string(r.steps) + " final_residual=" + format_double(r.final_residual);
    if (!r.failure.empty()) m += " failure=\"" + r.failure + "\"";
    m += "\n";
  }
  m += "[slopes]\n";
  for (const auto& [k, f] : report.slopes)
    m += k + "=" + format_double(f.slope) + " fit_residual=" + format_double(f.residual) + "\n";
  m += "[timing]\n";
  for (const auto& r : report.rows)
    m += "eps=" + format_double(r.eps) + " seconds=" + format_double(r.seconds) + "\n";
  m += "total_seconds=" + format_double(report.seconds) + "\n";
  m += "[notes]\n";
  m += "The density-rate threshold 0.8 is an acceptance choice of this artifact; the limit "
       "theorem proves convergence without a rate.\n";
  m += "Errors exclude the sigma rows next to each wall (boundary_exclusion); w is compared "
       "with the mass-equation reconstruction of the limit.\n";
  for (const auto& n : report.notes) m += n + "\n";
  write_file_atomic(dir / "manifest.txt", m);
}

}  // namespace reylim
