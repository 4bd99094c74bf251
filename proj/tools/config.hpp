#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "bernoulli/minimizer.hpp"

namespace bernoulli::cli {

/// A bad key or value. what() starts with the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct CentreRule {
  bool nearest = true;  // nearest-fb:x,y; otherwise the point itself
  Point point{};
};

struct RunConfig {
  // problem.*
  Point lo{-1.0, -1.0};
  Point hi{1.0, 1.0};
  double h = 1.0 / 32;
  std::string domain = "grid";  // grid | rectangle | disk
  Point rect_lo{-1.0, -1.0};
  Point rect_hi{1.0, 1.0};
  Point disk_centre{};
  double disk_radius = 1.0;
  std::string boundary = "zero";
  double perturb = 0.0;
  int perturb_modes = 3;
  double lambda = 1.0;
  std::string density = "linear";

  // solver.*
  SolverConfig solver;
  bool certificate = true;
  int certificate_trials = 50;

  // diag.*
  CentreRule centre;
  std::vector<double> radii;
  std::vector<double> scales{0.4, 0.2, 0.1};
  std::vector<double> t_samples{0.5, 1.5};

  // run.*
  std::string output = "out";
  std::uint64_t seed = 1;

  /// Every key with its value as given, defaults included, sorted.
  std::map<std::string, std::string> echo;
};

/// Flat "key = value" lines, '#' comments. Unknown or repeated keys and
/// malformed values throw ConfigError before anything is computed.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Keys accepted by parse_config with their defaults.
const std::map<std::string, std::string>& config_defaults();

Problem make_problem(const RunConfig& c);

}  // namespace bernoulli::cli
