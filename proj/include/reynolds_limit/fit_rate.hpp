#pragma once

#include <string>
#include <utility>
#include <vector>

namespace reylim {

/// Least-squares slope of log(err) against log(eps): err ~ eps^slope.
struct RateFit {
  double slope = 0.0;
  double residual = 0.0;              ///< RMS of the log-space residuals
  int used = 0;                       ///< pairs entering the fit
  std::vector<std::string> warnings;  ///< one entry per excluded pair
};

/// Needs at least three pairs with distinct eps. When every err is zero the
/// slope is +infinity; otherwise non-positive errors are excluded with a
/// warning, and the slope is NaN if fewer than two remain.
RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs);

}  // namespace reylim
