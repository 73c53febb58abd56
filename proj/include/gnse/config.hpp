#pragma once

// INI-style run configuration: sections [grid], [frac], [solver], [forcing],
// [initial], [control], [output].  Parsing is fail-closed: unknown sections or
// keys, duplicates and out-of-range values are rejected with the offending
// line number.  Runs are archival; the full configuration lands in the
// manifest.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gnse {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  // [grid]
  int n = 32;
  std::string weight = "sine";  // constant | sine | tabulated
  double weight_c = 1.0;
  double weight_eps = 0.1;
  std::string weight_file;

  // [frac]
  double alpha = 0.5;
  double alpha1 = 0.25;  // default alpha/2 applied when absent

  // [solver]
  double nu = 0.05;
  double dt = 1.0 / 256;
  double T = 0.5;
  int m = 8;
  double picard_tol = 1e-10;
  int picard_max = 50;
  double slack = 1.10;
  int threads = 1;

  // [forcing]: eta(t) = amp * cos(2 pi freq t) * e_k
  std::string forcing = "mode";  // zero | mode
  int forcing_k = 2;
  double forcing_amp = 0.05;
  double forcing_freq = 1.0;

  // [initial]
  std::string initial = "stream";  // zero | mode | stream
  int initial_k = 1;
  double initial_amp = 0.1;

  // [control]
  int d_c = 1;
  std::vector<int> actuators = {1};  // basis mode indices, 1-based
  double kappa = 1e-6;
  double box_lo = -2.0;
  double box_hi = 2.0;
  int max_iters = 200;
  double ctrl_tol = 1e-8;
  double fd_eps = 1e-6;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  double sigma0 = 1.0;
  std::string target = "recovery";  // recovery | unforced | zero
  double wstar_amp = 0.8;

  // [output]
  std::string out_dir = "out";

  int n_steps() const;
  void validate() const;  // cross-field constraints
  std::map<std::string, std::string> flat() const;  // section.key -> value, for the manifest
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);  // same grammar, for tests

// One line per key: "section.key  default  description".
std::string config_reference();

}  // namespace gnse
