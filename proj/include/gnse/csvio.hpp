#pragma once

// CSV and manifest emission.  All files: comma separator, '.' decimal,
// LF endings, 17-significant-digit floats, so identical runs are
// byte-identical.

#include <map>
#include <string>
#include <vector>

#include "gnse/control.hpp"
#include "gnse/solver.hpp"
#include "gnse/wdomain.hpp"

namespace gnse {

std::string fmt17(double v);

void write_velocity_csv(const std::string& path, const VelocityField& u, double h);
void write_scalar_csv(const std::string& path, const ScalarField& f, double h);
void write_spectrum_csv(const std::string& path, const Eigen::VectorXd& lambdas);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
void write_diagnostics_csv(const std::string& path, const Trajectory& traj);
void write_certificate_csv(const std::string& path, const EnergyCertificate& cert);
void write_control_log_csv(const std::string& path, const std::vector<ControlIterate>& log);
void write_wopt_csv(const std::string& path, const Eigen::MatrixXd& w, double dt);

// Flat JSON object; numeric-looking values are emitted as numbers.
void write_manifest(const std::string& path, const std::map<std::string, std::string>& entries);

}  // namespace gnse
