#include "reynolds_limit/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "reynolds_limit/io.hpp"

namespace reylim {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x))
    throw std::invalid_argument("expected a finite number, got '" + v + "'");
  return x;
}

int to_int(const std::string& v) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size())
    throw std::invalid_argument("expected an integer, got '" + v + "'");
  return static_cast<int>(x);
}

std::vector<double> to_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_real(trim(item)));
  if (out.empty()) throw std::invalid_argument("expected a comma-separated list of numbers");
  return out;
}

struct Key {
  std::string name;
  std::string fallback;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> apply;
};

using Pred = std::function<bool(double)>;

Key real(std::string name, std::string fallback, std::string help, Pred ok, std::string range,
         std::function<void(RunConfig&, double)> set) {
  return {std::move(name), std::move(fallback), std::move(help),
          [ok, range, set](RunConfig& c, const std::string& v) {
            const double x = to_real(v);
            if (!ok(x)) throw std::invalid_argument("must be " + range);
            set(c, x);
          }};
}

Key integer(std::string name, std::string fallback, std::string help, int lo,
            std::function<void(RunConfig&, int)> set) {
  return {std::move(name), std::move(fallback), std::move(help),
          [lo, set](RunConfig& c, const std::string& v) {
            const int x = to_int(v);
            if (x < lo) throw std::invalid_argument("must be >= " + std::to_string(lo));
            set(c, x);
          }};
}

Key choice(std::string name, std::string fallback, std::string help,
           std::vector<std::string> options, std::function<void(RunConfig&, const std::string&)> set) {
  return {std::move(name), std::move(fallback), std::move(help),
          [options, set](RunConfig& c, const std::string& v) {
            for (const auto& o : options)
              if (o == v) return set(c, v);
            std::string all;
            for (const auto& o : options) all += (all.empty() ? "" : "|") + o;
            throw std::invalid_argument("must be one of " + all);
          }};
}

const Pred positive = [](double x) { return x > 0.0; };
const Pred nonnegative = [](double x) { return x >= 0.0; };

const std::vector<Key>& schema() {
  static const std::vector<Key> keys = {
      // constitutive laws
      choice("viscosity", "power_pair", "mu(s) = s^n + s^m, or linear mu(s) = s",
             {"power_pair", "linear"},
             [](RunConfig& c, const std::string& v) {
               c.laws.family = v == "linear" ? ViscosityFamily::linear : ViscosityFamily::power_pair;
             }),
      real("a", "1", "hot pressure coefficient", positive, "> 0", [](RunConfig& c, double x) { c.laws.a = x; }),
      real("gamma", "2", "hot pressure exponent", nonnegative, ">= 0",
           [](RunConfig& c, double x) { c.laws.gamma = x; }),
      real("n", "0.75", "small-density viscosity exponent", positive, "> 0",
           [](RunConfig& c, double x) { c.laws.n = x; }),
      real("m", "2", "large-density viscosity exponent", positive, "> 0",
           [](RunConfig& c, double x) { c.laws.m = x; }),
      real("alpha", "1", "cold pressure singularity exponent", positive, "> 0",
           [](RunConfig& c, double x) { c.laws.alpha = x; }),
      real("beta", "1", "cold pressure growth exponent", positive, "> 0",
           [](RunConfig& c, double x) { c.laws.beta = x; }),
      real("eps_c", "0.01", "cold pressure amplitude", nonnegative, ">= 0",
           [](RunConfig& c, double x) { c.laws.eps_c = x; }),
      real("rho_star", "0.5", "cold/hot crossover density", positive, "> 0",
           [](RunConfig& c, double x) { c.laws.rho_star = x; }),
      real("A", "1", "viscosity crossover density", positive, "> 0",
           [](RunConfig& c, double x) { c.laws.A = x; }),
      real("r0", "1", "turbulent drag coefficient", nonnegative, ">= 0",
           [](RunConfig& c, double x) { c.laws.r0 = x; }),
      integer("dimension", "2", "dimension for the exponent validator (2 or 3)", 2,
              [](RunConfig& c, int x) {
                if (x > 3) throw std::invalid_argument("must be 2 or 3");
                c.dimension = x;
              }),
      real("q2d", "40", "Sobolev exponent proxy in two dimensions", positive, "> 0",
           [](RunConfig& c, double x) { c.q2d = x; }),
      // geometry
      real("L", "1", "period length", positive, "> 0", [](RunConfig& c, double x) { c.geom.L = x; }),
      choice("height", "slider", "film height profile", {"flat", "slider"},
             [](RunConfig& c, const std::string& v) {
               c.geom.h.kind = v == "flat" ? HeightProfile::Kind::constant : HeightProfile::Kind::slider;
             }),
      real("h_const", "1", "height of the flat channel", [](double x) { return x >= 1.0; }, ">= 1",
           [](RunConfig& c, double x) { c.geom.h.c = x; }),
      real("delta", "0.3", "slider amplitude", [](double x) { return x >= 0.0 && x < 1.0; }, "in [0, 1)",
           [](RunConfig& c, double x) { c.geom.h.delta = x; }),
      real("eps", "0.1", "aspect ratio", [](double x) { return x > 0.0 && x <= 1.0; }, "in (0, 1]",
           [](RunConfig& c, double x) { c.geom.eps = x; }),
      real("V", "1", "lower wall speed", nonnegative, ">= 0", [](RunConfig& c, double x) { c.geom.V = x; }),
      real("rho_b", "1", "density at the lower wall", positive, "> 0",
           [](RunConfig& c, double x) { c.geom.rho_b = x; }),
      real("rho_t", "1", "density at the upper wall", positive, "> 0",
           [](RunConfig& c, double x) { c.geom.rho_t = x; }),
      {"M0", "auto", "total mass; auto gives unit mean density",
       [](RunConfig& c, const std::string& v) {
         if (v == "auto") {
           c.geom.M0 = -1.0;
           return;
         }
         const double x = to_real(v);
         if (!(x > 0.0)) throw std::invalid_argument("must be > 0 or auto");
         c.geom.M0 = x;
       }},
      // discretization and solvers
      integer("nx", "128", "horizontal cells", 16, [](RunConfig& c, int x) { c.nx = x; }),
      integer("n_sigma", "32", "vertical cells", 4, [](RunConfig& c, int x) { c.ns = x; }),
      real("reynolds_tol", "1e-12", "Reynolds residual tolerance", positive, "> 0",
           [](RunConfig& c, double x) { c.reynolds_tol = x; }),
      real("dt0", "0.01", "first pseudo-time step", positive, "> 0",
           [](RunConfig& c, double x) { c.solve.dt0 = x; }),
      real("cfl", "10", "cap on pseudo-time step growth", [](double x) { return x > 1.0; }, "> 1",
           [](RunConfig& c, double x) { c.solve.cfl = x; }),
      real("tol", "1e-10", "steady residual tolerance", positive, "> 0",
           [](RunConfig& c, double x) { c.solve.tol = x; }),
      integer("max_steps", "200", "pseudo-time step limit", 0, [](RunConfig& c, int x) { c.solve.max_steps = x; }),
      real("hyper4", "0", "fourth-difference dissipation", nonnegative, ">= 0",
           [](RunConfig& c, double x) { c.solve.hyper4 = x; }),
      real("dt_max", "1e12", "pseudo-time step ceiling", positive, "> 0",
           [](RunConfig& c, double x) { c.solve.dt_max = x; }),
      choice("ns_init", "reynolds", "initial density for the thin-channel solve", {"reynolds", "uniform"},
             [](RunConfig& c, const std::string& v) { c.ns_init = v; }),
      {"fields_in", "", "field CSV analysed by the diagnostics command instead of solving",
       [](RunConfig& c, const std::string& v) { c.fields_in = v; }},
      // sweep
      {"eps_list", "0.2,0.1,0.05,0.025", "strictly decreasing aspect ratios",
       [](RunConfig& c, const std::string& v) { c.sweep.eps_list = to_list(v); }},
      integer("boundary_exclusion", "2", "sigma rows excluded at each wall", 0,
              [](RunConfig& c, int x) { c.sweep.boundary_exclusion = x; }),
      integer("threads", "0", "sweep workers; 0 uses REYNOLDS_LIMIT_THREADS or all cores", 0,
              [](RunConfig& c, int x) { c.sweep.threads = x; }),
      {"out_dir", "out", "output directory", [](RunConfig& c, const std::string& v) {
         if (v.empty()) throw std::invalid_argument("must not be empty");
         c.out_dir = v;
       }},
  };
  return keys;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  std::map<std::string, std::pair<std::string, int>> given;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](int ln, const std::string& msg) {
    throw InputError(source + ":" + std::to_string(ln) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(lineno, "missing key before '='");
    bool known = false;
    for (const auto& k : schema()) known = known || k.name == key;
    if (!known) fail(lineno, "unknown key '" + key + "'");
    if (given.count(key)) fail(lineno, "duplicate key '" + key + "' (first set on line " +
                                           std::to_string(given[key].second) + ")");
    given[key] = {value, lineno};
  }

  RunConfig c;
  for (const auto& k : schema()) {
    const auto it = given.find(k.name);
    const std::string value = it == given.end() ? k.fallback : it->second.first;
    try {
      k.apply(c, value);
    } catch (const std::invalid_argument& e) {
      const std::string where = it == given.end() ? source + ": default" : source + ":" + std::to_string(it->second.second);
      throw InputError(where + ": " + k.name + ": " + e.what());
    }
    c.echo.emplace_back(k.name, value);
  }

  c.geom.h.L = c.geom.L;
  if (c.geom.M0 < 0.0) c.geom.M0 = c.geom.h.integral();
  c.sweep.nx = c.nx;
  c.sweep.ns = c.ns;
  c.sweep.reynolds_tol = c.reynolds_tol;
  c.sweep.solve = c.solve;
  if (c.laws.family == ViscosityFamily::linear) {
    c.laws.n = c.laws.m = 1.0;
    for (auto& [k, v] : c.echo)
      if (k == "n" || k == "m") v = "1";
  }
  try {
    c.geom.validate();
    c.solve.validate();
    c.sweep.validate();
  } catch (const InputError& e) {
    throw InputError(source + ": " + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string default_config_text() {
  std::string out;
  for (const auto& k : schema()) out += "# " + k.help + "\n" + k.name + " = " + k.fallback + "\n";
  return out;
}

}  // namespace reylim
