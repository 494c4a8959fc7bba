#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "reynolds_limit/config.hpp"
#include "reynolds_limit/diagnostics.hpp"
#include "reynolds_limit/harness.hpp"
#include "reynolds_limit/io.hpp"
#include "reynolds_limit/reynolds.hpp"
#include "reynolds_limit/thin_ns.hpp"

namespace {

using namespace reylim;

constexpr int kOk = 0;
constexpr int kNumerical = 1;
constexpr int kUsage = 2;

/// Laws that fail the validator are a configuration error for every command but `validate`.
void require_admissible(const RunConfig& c) {
  const ValidationReport r = validate_assumptions(c.laws, c.dimension, c.q2d);
  if (r.admissible) return;
  std::string failed;
  for (const auto& ch : r.checks)
    if (!ch.satisfied) failed += " " + ch.name;
  throw InputError("laws are not admissible; failing checks:" + failed);
}

std::string profile_csv(const ReynoldsProfile& p) {
  std::string out = "x,rho,P,flux\n";
  for (int i = 0; i < p.size(); ++i) out += csv_row({p.x[i], p.rho[i], p.P[i], p.flux});
  return out;
}

ThinState solve_ns(const RunConfig& c, const std::filesystem::path& out) {
  const ThinGrid grid{c.nx, c.ns, c.geom.L};
  Eigen::VectorXd columns;
  if (c.ns_init == "reynolds") columns = solve_stationary(c.geom, c.laws, c.nx, c.reynolds_tol, {}).rho;
  ThinState init = initial_guess(c.geom, c.laws, grid, columns);
  try {
    MarchResult res = march_to_steady(c.geom, c.laws, c.solve, grid, std::move(init));
    write_file_atomic(out / "history.csv", residual_history_csv(res.history));
    std::printf("converged in %d steps, residual %.3e, mass drift per step <= %.3e\n", res.steps,
                res.history.back().norms.combined(), res.max_step_mass_drift);
    return std::move(res.state);
  } catch (const MarchFailure& e) {
    write_file_atomic(out / "history.csv", residual_history_csv(e.records()));
    throw;
  }
}

int cmd_validate(const RunConfig& c, const std::filesystem::path&) {
  const ValidationReport r = validate_assumptions(c.laws, c.dimension, c.q2d);
  std::cout << to_csv(r);
  std::cout << "admissible=" << (r.admissible ? "true" : "false") << "\n";
  return r.admissible ? kOk : kNumerical;
}

int cmd_reynolds(const RunConfig& c, const std::filesystem::path& out) {
  require_admissible(c);
  const ReynoldsProfile p = solve_stationary(c.geom, c.laws, c.nx, c.reynolds_tol, {});
  write_file_atomic(out / "profile.csv", profile_csv(p));
  std::printf("flux %.17g, rho in [%.6g, %.6g]\n", p.flux, p.rho.minCoeff(), p.rho.maxCoeff());
  return kOk;
}

int cmd_ns(const RunConfig& c, const std::filesystem::path& out) {
  require_admissible(c);
  const ThinState s = solve_ns(c, out);
  export_fields(s, c.geom, out / "fields.csv");
  return kOk;
}

int cmd_diagnostics(const RunConfig& c, const std::filesystem::path& out) {
  require_admissible(c);
  const ThinState s = c.fields_in.empty() ? solve_ns(c, out) : import_fields(c.fields_in, c.geom, c.laws);
  write_file_atomic(out / "diagnostics.csv", report_csv(energy_report(s, c.laws, c.geom)));
  return kOk;
}

int cmd_sweep(const RunConfig& c, const std::filesystem::path& out) {
  require_admissible(c);
  const ConvergenceReport r = run_sweep(c.geom, c.laws, c.sweep);
  auto echo = c.echo;
  for (auto& [k, v] : echo)
    if (k == "out_dir") v = out.string();
  emit_report(r, out, echo);
  for (const auto& row : r.rows)
    std::printf("eps=%-8g err_rho_L2=%.3e err_v_L2=%.3e %s\n", row.eps, row.err_rho_L2, row.err_v_L2,
                row.converged ? "" : row.failure.c_str());
  for (const auto& [k, f] : r.slopes) std::printf("slope %s = %.3f\n", k.c_str(), f.slope);
  return r.complete ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressible thin-film lubrication laboratory"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_override;

  using Handler = int (*)(const RunConfig&, const std::filesystem::path&);
  Handler handler = nullptr;
  const std::pair<const char*, Handler> commands[] = {
      {"validate", cmd_validate}, {"reynolds", cmd_reynolds}, {"ns", cmd_ns},
      {"diagnostics", cmd_diagnostics}, {"sweep", cmd_sweep}};
  const char* help[] = {"check the exponent assumptions of the laws",
                        "solve the stationary Reynolds equation",
                        "solve the thin-channel Navier-Stokes system",
                        "energy and entropy diagnostics of a thin-channel state",
                        "eps sweep against the Reynolds limit"};
  int k = 0;
  for (const auto& [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help[k++]);
    sub->add_option("config", config_path, "key = value config file")->required();
    sub->add_option("--out", out_override, "output directory (overrides out_dir)");
    sub->callback([&handler, fn = fn] { handler = fn; });
  }
  bool print_defaults = false;
  app.add_subcommand("defaults", "print every config key with its default")->callback([&] {
    print_defaults = true;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (print_defaults) {
    std::cout << default_config_text();
    return kOk;
  }
  try {
    const RunConfig c = load_config(config_path);
    const std::filesystem::path out = out_override.empty() ? c.out_dir : std::filesystem::path(out_override);
    std::filesystem::create_directories(out);
    return handler(c, out);
  } catch (const InputError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kUsage;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << " (last residual " << e.last_residual() << ")\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
}
