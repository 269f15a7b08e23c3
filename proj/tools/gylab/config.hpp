#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gylab/continuum.hpp"
#include "gylab/discrete.hpp"
#include "gylab/gy.hpp"
#include "gylab/model.hpp"

namespace gylab::cli {

// Malformed or inconsistent configuration; maps to exit code 3.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemConfig {
  std::string hamiltonian = "harmonic";
  Index dimension = 1;
  double mass = 1.0;
  double horizon = 1.0;
  double omega = 1.0;
  double lambda = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  std::vector<double> stiffness;
  std::uint64_t seed = 0;
  std::vector<double> f1_a;
  std::vector<double> f2_a;
  std::vector<double> f1_coupling;
  std::vector<double> f2_coupling;
  std::vector<double> b1;
  std::vector<double> b2;
};

struct NumericsConfig {
  Index points = 101;
  std::vector<Index> n_list;  // empty means the default sweep
  bool n_list_given = false;
  NewtonOptions newton;
  ShootOptions shoot;
  double fd_step = 0.0;
  std::string which = "gy-discrete";
  CrossMethod cross = CrossMethod::chain;
  int eigen_count = 5;
  int fd_intervals = 2000;
  std::vector<double> mu_list{1e2, 1e3, 1e4};
  std::vector<Index> weak_points{101, 201, 401, 801};
};

struct OutputConfig {
  std::string prefix = "gylab";
  bool continuum = false;
  bool timestamp = true;
};

struct RunConfig {
  ProblemConfig problem;
  NumericsConfig numerics;
  OutputConfig output;
  // Raw key/value pairs per section, sorted, echoed into the JSON report.
  std::map<std::string, std::map<std::string, std::string>> raw;
};

/// Parses INI text; throws ConfigError on syntax errors, unknown sections or
/// keys, and values that fail to parse or violate a basic range check.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Builds and validates the problem; ConfigError on invalid physics.
ProblemSpec build_problem(const ProblemConfig& cfg);

/// "1.5", "pi", "pi/2", "3*pi/4", "2e-3".
double parse_real(const std::string& text);

const std::vector<std::string>& verify_identities();

}  // namespace gylab::cli
