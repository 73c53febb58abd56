#pragma once

// Command implementations behind the CLI.  Exit codes: 0 success, 1 error,
// 2 hypothesis H(g) failed, 3 certificate failed.

#include <iosfwd>
#include <string>

#include "gnse/config.hpp"
#include "gnse/control.hpp"
#include "gnse/solver.hpp"

namespace gnse {

inline constexpr const char* kVersion = "0.1.0";

// Everything a run needs, assembled from a configuration.
struct RunSetup {
  WeightedGrid grid;
  GStokesBasis basis;
  GalerkinSystem system;
  SolverConfig cfg;
  Eigen::VectorXd xi0;
  Eigen::MatrixXd eta;
};

RunSetup build_setup(const RunConfig& rc);

// Output directory: config value unless GNSE_OUT is set; created on demand.
std::string resolve_out_dir(const RunConfig& rc);

int cmd_eig(const RunConfig& rc, std::ostream& log);
int cmd_solve(const RunConfig& rc, std::ostream& log);
int cmd_control(const RunConfig& rc, std::ostream& log);
int cmd_verify(const std::string& filter, std::ostream& log);

}  // namespace gnse
