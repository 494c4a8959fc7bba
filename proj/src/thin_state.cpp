#include "reynolds_limit/thin_state.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "reynolds_limit/io.hpp"

namespace reylim {

void ThinGrid::validate() const {
  if (nx < 8) throw InputError("grid: nx must be >= 8");
  if (ns < 4) throw InputError("grid: n_sigma must be >= 4");
  if (!(L > 0.0)) throw InputError("grid: L must be > 0");
}

ThinState ThinState::zeros(const ThinGrid& grid, double eps) {
  ThinState s;
  s.grid = grid;
  s.eps = eps;
  s.rho = Eigen::ArrayXXd::Zero(grid.nx, grid.ns);
  s.v = Eigen::ArrayXXd::Zero(grid.nx, grid.ns);
  s.w = Eigen::ArrayXXd::Zero(grid.nx, grid.ns + 1);
  s.P = Eigen::ArrayXXd::Zero(grid.nx, grid.ns);
  return s;
}

void ThinState::update_pressure(const LawSet& laws) {
  P = rho.unaryExpr([&](double s) { return pressure(laws, s); });
}

double ThinState::mass(const ThinGeometry& geom) const {
  double m = 0.0;
  for (int i = 0; i < grid.nx; ++i) m += rho.row(i).sum() * geom.h(grid.x_cell(i));
  return m * grid.dx() * grid.ds();
}

Eigen::ArrayXXd lift_velocity(const ThinGeometry& geom, const ThinGrid& grid) {
  Eigen::ArrayXXd v(grid.nx, grid.ns);
  for (int i = 0; i < grid.nx; ++i) {
    const double h = geom.h(grid.x_face(i));
    for (int j = 0; j < grid.ns; ++j) v(i, j) = lift_velocity(geom.V, grid.sigma_cell(j) * h);
  }
  return v;
}

std::string fields_csv(const ThinState& state, const ThinGeometry& geom) {
  const ThinGrid& g = state.grid;
  std::string out = "x,sigma,Z,rho,v,w,P\n";
  out.reserve(out.size() + static_cast<size_t>(g.nx) * g.ns * 7 * 25);
  for (int i = 0; i < g.nx; ++i) {
    const double x = g.x_cell(i);
    const double h = geom.h(x);
    for (int j = 0; j < g.ns; ++j) {
      const double sig = g.sigma_cell(j);
      out += csv_row({x, sig, sig * h, state.rho(i, j), state.v(i, j), state.w(i, j), state.P(i, j)});
    }
  }
  return out;
}

void export_fields(const ThinState& state, const ThinGeometry& geom,
                   const std::filesystem::path& path) {
  write_file_atomic(path, fields_csv(state, geom));
}

ThinState import_fields(const std::filesystem::path& path, const ThinGeometry& geom,
                        const LawSet& laws) {
  std::ifstream in(path);
  if (!in) throw InputError("import_fields: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "x,sigma,Z,rho,v,w,P")
    throw InputError("import_fields: unexpected header in " + path.string());

  std::vector<std::array<double, 7>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto vals = parse_csv_doubles(line);
    if (vals.size() != 7)
      throw InputError("import_fields: line " + std::to_string(lineno) + " needs 7 columns");
    rows.push_back({vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], vals[6]});
  }
  if (rows.empty()) throw InputError("import_fields: no data rows");

  int ns = 0;
  while (ns < static_cast<int>(rows.size()) && rows[ns][0] == rows[0][0]) ++ns;
  if (rows.size() % ns != 0) throw InputError("import_fields: ragged grid");
  ThinGrid grid{static_cast<int>(rows.size() / ns), ns, geom.L};

  ThinState s = ThinState::zeros(grid, geom.eps);
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < ns; ++j) {
      const auto& r = rows[static_cast<size_t>(i) * ns + j];
      s.rho(i, j) = r[3];
      s.v(i, j) = r[4];
      s.w(i, j) = r[5];
    }
  }
  s.update_pressure(laws);
  return s;
}

}  // namespace reylim
