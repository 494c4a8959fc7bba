#include "reynolds_limit/fit_rate.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "reynolds_limit/errors.hpp"
#include "reynolds_limit/io.hpp"

namespace reylim {

RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw InputError("fit_rate: need at least 3 (eps, err) pairs");
  RateFit fit;
  std::vector<double> lx, ly;
  bool all_zero = true;
  std::set<double> distinct;
  for (const auto& [eps, err] : pairs) {
    if (!(eps > 0.0)) throw InputError("fit_rate: eps must be > 0");
    if (err != 0.0) all_zero = false;
    distinct.insert(eps);
  }
  if (distinct.size() != pairs.size()) throw InputError("fit_rate: eps values must be distinct");
  if (all_zero) {
    fit.slope = std::numeric_limits<double>::infinity();
    return fit;
  }
  for (const auto& [eps, err] : pairs) {
    if (err > 0.0 && std::isfinite(err)) {
      lx.push_back(std::log(eps));
      ly.push_back(std::log(err));
    } else {
      fit.warnings.push_back("excluded eps=" + format_double(eps) + " with err=" + format_double(err));
    }
  }
  fit.used = static_cast<int>(lx.size());
  if (fit.used < 2) {
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    fit.residual = std::numeric_limits<double>::quiet_NaN();
    fit.warnings.push_back("fewer than two positive errors; slope undefined");
    return fit;
  }

  const double n = fit.used;
  double mx = 0.0, my = 0.0;
  for (int k = 0; k < fit.used; ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int k = 0; k < fit.used; ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
  }
  fit.slope = sxy / sxx;
  double ss = 0.0;
  for (int k = 0; k < fit.used; ++k) {
    const double e = ly[k] - (my + fit.slope * (lx[k] - mx));
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

}  // namespace reylim
