#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "reynolds_limit/geometry.hpp"
#include "reynolds_limit/harness.hpp"
#include "reynolds_limit/laws.hpp"
#include "reynolds_limit/thin_ns.hpp"

namespace reylim {

/// Everything a command needs, parsed from `key = value` lines.
struct RunConfig {
  LawSet laws;
  ThinGeometry geom;
  int dimension = 2;
  double q2d = kDefaultQ2D;
  int nx = 128;
  int ns = 32;
  double reynolds_tol = 1e-12;
  SolveConfig solve;
  SweepConfig sweep;
  std::string ns_init = "reynolds";  ///< "reynolds" or "uniform"
  std::string fields_in;             ///< diagnostics input; empty means solve first
  std::filesystem::path out_dir = "out";

  /// Every schema key with its effective value, in schema order.
  std::vector<std::pair<std::string, std::string>> echo;
};

/// Parses config text. Unknown keys, duplicates, malformed values and out-of-range
/// values raise InputError naming `source` and the line number.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");

/// Reads and parses a config file; a missing file raises InputError.
RunConfig load_config(const std::filesystem::path& path);

/// The documented keys with their defaults, as `key = value` lines.
std::string default_config_text();

}  // namespace reylim
