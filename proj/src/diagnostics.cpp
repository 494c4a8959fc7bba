#include "reynolds_limit/diagnostics.hpp"

#include <cmath>
#include <set>

#include "reynolds_limit/io.hpp"

namespace reylim {
namespace {

struct Metric {
  Eigen::ArrayXd h, hp;
};

Metric metric_of(const ThinGrid& g, const ThinGeometry& geom) {
  Metric m{Eigen::ArrayXd(g.nx), Eigen::ArrayXd(g.nx)};
  for (int i = 0; i < g.nx; ++i) {
    m.h[i] = geom.h(g.x_cell(i));
    m.hp[i] = geom.h.slope(g.x_cell(i));
  }
  return m;
}

// Written in differences so that constant columns give exactly zero.
double dsig_one_sided(const Eigen::ArrayXXd& f, int i, int j, int ns, double ds) {
  if (j == 0) return (4.0 * (f(i, 1) - f(i, 0)) - (f(i, 2) - f(i, 0))) / (2.0 * ds);
  if (j == ns - 1)
    return (4.0 * (f(i, ns - 1) - f(i, ns - 2)) - (f(i, ns - 1) - f(i, ns - 3))) / (2.0 * ds);
  return (f(i, j + 1) - f(i, j - 1)) / (2.0 * ds);
}

// Exact for quadratics through the known wall values.
double dsig_walls(const Eigen::ArrayXXd& f, int i, int j, int ns, double ds, double bottom,
                  double top) {
  if (j == 0) return (-4.0 * bottom + 3.0 * f(i, 0) + f(i, 1)) / (3.0 * ds);
  if (j == ns - 1) return (4.0 * top - 3.0 * f(i, ns - 1) - f(i, ns - 2)) / (3.0 * ds);
  return (f(i, j + 1) - f(i, j - 1)) / (2.0 * ds);
}

// Velocity derivatives at cell centers.
struct VelocityGradients {
  Eigen::ArrayXXd vc, wc, dxv, dzv, dxw, dzw;
};

VelocityGradients velocity_gradients(const ThinState& s, const ThinGeometry& geom, const Metric& m) {
  const ThinGrid& g = s.grid;
  const int nx = g.nx, ns = g.ns;
  const double dx = g.dx(), ds = g.ds();
  VelocityGradients out;
  out.vc.resize(nx, ns);
  out.wc.resize(nx, ns);
  for (int i = 0; i < nx; ++i) {
    const int im = g.periodic(i - 1);
    for (int j = 0; j < ns; ++j) {
      out.vc(i, j) = 0.5 * (s.v(im, j) + s.v(i, j));
      out.wc(i, j) = 0.5 * (s.w(i, j) + s.w(i, j + 1));
    }
  }
  out.dxv.resize(nx, ns);
  out.dzv.resize(nx, ns);
  out.dxw.resize(nx, ns);
  out.dzw.resize(nx, ns);
  for (int i = 0; i < nx; ++i) {
    const int im = g.periodic(i - 1), ip = g.periodic(i + 1);
    const double rel = m.hp[i] / m.h[i];
    for (int j = 0; j < ns; ++j) {
      const double sig = g.sigma_cell(j);
      const double dsv = dsig_walls(out.vc, i, j, ns, ds, geom.V, 0.0);
      const double dsw = (s.w(i, j + 1) - s.w(i, j)) / ds;
      out.dxv(i, j) = (s.v(i, j) - s.v(im, j)) / dx - sig * rel * dsv;
      out.dzv(i, j) = dsv / m.h[i];
      out.dxw(i, j) = (out.wc(ip, j) - out.wc(im, j)) / (2.0 * dx) - sig * rel * dsw;
      out.dzw(i, j) = dsw / m.h[i];
    }
  }
  return out;
}

double integrate(const Eigen::ArrayXXd& f, const ThinGrid& g, const Metric& m) {
  double sum = 0.0;
  for (int i = 0; i < g.nx; ++i) sum += f.row(i).sum() * m.h[i];
  return sum * g.dx() * g.ds();
}

double l2(const Eigen::ArrayXXd& f, const ThinGrid& g, const Metric& m) {
  return std::sqrt(integrate(f.square(), g, m));
}

void require_positive_density(const ThinState& s) {
  if (!(s.rho > 0.0).all()) throw DomainError("diagnostics: density must be positive everywhere");
}

}  // namespace

CellGradient cell_gradient(const Eigen::ArrayXXd& f, const ThinGrid& g, const ThinGeometry& geom) {
  if (f.rows() != g.nx || f.cols() != g.ns) throw InputError("cell_gradient: shape mismatch");
  const Metric m = metric_of(g, geom);
  const double dx = g.dx(), ds = g.ds();
  CellGradient out{Eigen::ArrayXXd(g.nx, g.ns), Eigen::ArrayXXd(g.nx, g.ns)};
  for (int i = 0; i < g.nx; ++i) {
    const int im = g.periodic(i - 1), ip = g.periodic(i + 1);
    for (int j = 0; j < g.ns; ++j) {
      const double dsf = dsig_one_sided(f, i, j, g.ns, ds);
      out.dx(i, j) = (f(ip, j) - f(im, j)) / (2.0 * dx) - g.sigma_cell(j) * m.hp[i] / m.h[i] * dsf;
      out.dz(i, j) = dsf / m.h[i];
    }
  }
  return out;
}

EffectiveVelocity effective_velocity(const ThinState& state, const LawSet& laws,
                                     const ThinGeometry& geom) {
  require_positive_density(state);
  const auto mu_f = state.rho.unaryExpr([&](double s) { return mu(laws, s); }).eval();
  const auto phi_f = state.rho.unaryExpr([&](double s) { return phi(laws, s); }).eval();
  const CellGradient gm = cell_gradient(mu_f, state.grid, geom);
  const CellGradient gp = cell_gradient(phi_f, state.grid, geom);
  EffectiveVelocity u;
  u.V = 2.0 * gm.dx / state.rho;
  u.W = 2.0 * gm.dz / (state.eps * state.rho);
  u.V_phi = 2.0 * gp.dx;
  u.W_phi = 2.0 * gp.dz / state.eps;
  return u;
}

double curl_identity_defect(const ThinState& state, const LawSet& laws, const ThinGeometry& geom) {
  const EffectiveVelocity u = effective_velocity(state, laws, geom);
  const CellGradient gw = cell_gradient((state.eps * u.W).eval(), state.grid, geom);
  const CellGradient gv = cell_gradient(u.V, state.grid, geom);
  return l2(gw.dx - gv.dz, state.grid, metric_of(state.grid, geom));
}

double DiagnosticsReport::value(const std::string& name) const {
  for (const NamedValues* sec : {&energy_terms, &bd_terms, &scaling_norms})
    for (const auto& [k, v] : *sec)
      if (k == name) return v;
  if (name == "curl_defect") return curl_defect;
  throw InputError("diagnostics: unknown quantity '" + name + "'");
}

const std::vector<std::string>& scaling_norm_names() {
  static const std::vector<std::string> names = {
      "sqrt_mu_dx_v",  "sqrt_mu_dz_v",  "sqrt_mu_dx_w",   "sqrt_mu_dz_w",      "dx_xi_M",
      "dz_xi_M",       "dx_rho_N",      "dz_rho_N",       "sqrt_rho_v_3_2",    "sqrt_rho_w_3_2"};
  return names;
}

const std::vector<double>& scaling_norm_bounds() {
  static const std::vector<double> bounds = {-1.0, 0.0, -2.0, -1.0, 0.0, 1.0, 0.0, 1.0, -1.0, -2.5};
  return bounds;
}

DiagnosticsReport energy_report(const ThinState& state, const LawSet& laws, const ThinGeometry& geom) {
  require_positive_density(state);
  const ThinGrid& g = state.grid;
  const Metric m = metric_of(g, geom);
  const double eps = state.eps, e2 = eps * eps;
  const VelocityGradients vg = velocity_gradients(state, geom, m);

  const Eigen::ArrayXXd& rho = state.rho;
  const auto mu_f = rho.unaryExpr([&](double s) { return mu(laws, s); }).eval();
  const auto lam_f = rho.unaryExpr([&](double s) { return lambda_of(laws, s); }).eval();
  const auto rhoN = rho.unaryExpr([&](double s) { return std::pow(s, laws.N()); }).eval();
  const auto xi_slope = rho.unaryExpr([&](double s) { return xi_power_slope(laws, s); }).eval();

  const CellGradient gN = cell_gradient(rhoN, g, geom);
  const CellGradient grho = cell_gradient(rho, g, geom);
  const Eigen::ArrayXXd dx_xi = xi_slope * grho.dx;
  const Eigen::ArrayXXd dz_xi = xi_slope * grho.dz;

  const Eigen::ArrayXXd sym = eps * vg.dxw + vg.dzv / eps;
  const Eigen::ArrayXXd anti = eps * vg.dxw - vg.dzv / eps;
  const Eigen::ArrayXXd speed = (vg.vc.square() + e2 * vg.wc.square()).sqrt();
  const double drag = laws.r0 * integrate(rho * speed.cube(), g, m);

  DiagnosticsReport r;
  r.eps = eps;
  r.energy_terms = {
      {"energy_2mu_dx_v_sq", 2.0 * integrate(mu_f * vg.dxv.square(), g, m)},
      {"energy_2mu_dz_w_sq", 2.0 * integrate(mu_f * vg.dzw.square(), g, m)},
      {"energy_mu_sym_sq", integrate(mu_f * sym.square(), g, m)},
      {"energy_lambda_div_sq", integrate(lam_f * (vg.dxv + vg.dzw).square(), g, m)},
      {"energy_drag", drag},
  };
  r.bd_terms = {
      {"bd_mu_antisym_sq", integrate(mu_f * anti.square(), g, m)},
      {"bd_dx_xi_M_sq", integrate(dx_xi.square(), g, m) / e2},
      {"bd_dz_xi_M_sq", integrate(dz_xi.square(), g, m) / (e2 * e2)},
      {"bd_drag", drag},
      {"bd_dx_rho_N_sq", integrate(gN.dx.square(), g, m) / e2},
      {"bd_dz_rho_N_sq", integrate(gN.dz.square(), g, m) / (e2 * e2)},
  };
  const Eigen::ArrayXXd smu = mu_f.sqrt();
  const Eigen::ArrayXXd srho = rho.sqrt();
  const std::vector<double> norms = {
      l2(smu * vg.dxv, g, m),
      l2(smu * vg.dzv, g, m),
      l2(smu * vg.dxw, g, m),
      l2(smu * vg.dzw, g, m),
      l2(dx_xi, g, m),
      l2(dz_xi, g, m),
      l2(gN.dx, g, m),
      l2(gN.dz, g, m),
      l2(srho * vg.vc.abs().pow(1.5), g, m),
      l2(srho * vg.wc.abs().pow(1.5), g, m),
  };
  for (size_t k = 0; k < norms.size(); ++k) r.scaling_norms.emplace_back(scaling_norm_names()[k], norms[k]);
  r.curl_defect = curl_identity_defect(state, laws, geom);
  return r;
}

std::string report_csv(const DiagnosticsReport& report) {
  std::string out = "name,value\n";
  auto add = [&](const std::string& k, double v) { out += k + "," + format_double(v) + "\n"; };
  add("eps", report.eps);
  for (const NamedValues* sec : {&report.energy_terms, &report.bd_terms, &report.scaling_norms})
    for (const auto& [k, v] : *sec) add(k, v);
  add("curl_defect", report.curl_defect);
  return out;
}

ScalingTable scaling_table(const std::vector<DiagnosticsReport>& reports) {
  std::set<double> distinct;
  for (const auto& r : reports) distinct.insert(r.eps);
  if (reports.size() < 3 || distinct.size() < 3)
    throw InputError("scaling_table: need at least three distinct eps values");
  ScalingTable table;
  const auto& names = scaling_norm_names();
  for (size_t k = 0; k < names.size(); ++k) {
    ScalingRow row;
    row.name = names[k];
    row.bound = scaling_norm_bounds()[k];
    std::vector<std::pair<double, double>> pairs;
    for (const auto& r : reports) {
      const double v = r.value(names[k]);
      row.eps.push_back(r.eps);
      row.values.push_back(v);
      pairs.emplace_back(r.eps, v);
    }
    row.fit = fit_rate(pairs);
    table.push_back(std::move(row));
  }
  return table;
}

ScalingTable scaling_table(const std::vector<ThinState>& states, const LawSet& laws,
                           const ThinGeometry& geom) {
  std::vector<DiagnosticsReport> reports;
  reports.reserve(states.size());
  for (const auto& s : states) reports.push_back(energy_report(s, laws, geom));
  return scaling_table(reports);
}

std::string scaling_csv(const ScalingTable& table) {
  std::string out = "norm_name,eps,value,fitted_slope,fit_residual\n";
  for (const auto& row : table)
    for (size_t k = 0; k < row.eps.size(); ++k)
      out += row.name + "," + format_double(row.eps[k]) + "," + format_double(row.values[k]) + "," +
             format_double(row.fit.slope) + "," + format_double(row.fit.residual) + "\n";
  return out;
}

}  // namespace reylim
