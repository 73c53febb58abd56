#pragma once

// Named invariant checks across all modules, runnable as a table from the
// CLI (`gnse verify`) or individually from tests.  Each check returns the
// measured quantity so regressions are visible, not just pass/fail.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gnse/fracops.hpp"

namespace gnse {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  std::string note;  // what `measured` is, plus the threshold
};

// Runs every check whose name contains `filter` (empty runs all).
std::vector<CheckResult> run_verify_checks(const std::string& filter);

// Caputo power-rule consistency |D^0.5 t - 1/Gamma(1.5)| at t = 1, with the
// L1 weight provider injectable so weight mutations are detectable.
using WeightProvider = std::function<Eigen::VectorXd(FractionalOrder, int)>;
CheckResult caputo_power_rule_check(const WeightProvider& weights);

}  // namespace gnse
