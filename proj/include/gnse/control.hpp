#pragma once

// The optimal-control problem: tracking objective with coercive control cost
// over box-constrained piecewise-constant controls, state given by the
// fractional Galerkin solver, minimized by projected finite-difference
// descent with Armijo backtracking.

#include <Eigen/Core>

#include <vector>

#include "gnse/solver.hpp"

namespace gnse {

struct ControlProblem {
  // Actuator map: column i is the basis-coefficient vector of the i-th
  // (g-projected, g-divergence-free) actuator field.
  Eigen::MatrixXd Cop;        // m x d_c
  Eigen::MatrixXd f_base;     // (n_steps+1) x m forcing coefficients
  Eigen::VectorXd xi0;        // initial state coefficients
  Eigen::MatrixXd zeta;       // (n_steps+1) x m target coefficients
  Eigen::VectorXd rho;        // per-step |z_perp|_g^2 outside span(basis); zero if z resolved
  double kappa = 1e-3;        // control cost weight
  double cost_exponent = 4.0; // 2 / alpha1, must exceed 2
  Eigen::VectorXd box_lo, box_hi;
  GalerkinSystem system;
  SolverConfig cfg;

  int dc() const { return static_cast<int>(Cop.cols()); }
  void validate() const;
};

// Builds the actuator map from grid fields: each column is Leray-projected,
// checked g-divergence-free to 1e-9, then expanded in the basis.
Eigen::MatrixXd actuator_coeffs(const std::vector<VelocityField>& actuators,
                                const GStokesBasis& basis);

struct ControlIterate {
  Eigen::MatrixXd w;  // n_steps x d_c, piecewise constant per cell
  double J = 0.0;
  double grad_norm = 0.0;      // projected-gradient norm
  double state_residual = 0.0; // max step residual of the accepted trajectory
  double step_len = 0.0;       // accepted Armijo step reaching this iterate
  bool stationary = false;     // no descent step found at min_step
};

// Forward map: eta(t_n) = f_base(t_n) + Cop * w(cell ending at t_n); the
// solver's uniqueness makes this single-valued.
Trajectory solution_map(const Eigen::Ref<const Eigen::MatrixXd>& w, const ControlProblem& prob);

// J = 1/2 * trapz |u - z|_g^2 dt + sum_cells dt * kappa ||w||^p
double objective(const Trajectory& traj, const Eigen::Ref<const Eigen::MatrixXd>& w,
                 const ControlProblem& prob);

double tracking_error(const Trajectory& traj, const ControlProblem& prob);

// Central differences per control cell/coordinate, one-sided at the box.
// Probes are independent solves writing disjoint slots, so `threads` > 1
// changes nothing but wall time.
Eigen::MatrixXd fd_gradient(const Eigen::Ref<const Eigen::MatrixXd>& w, const ControlProblem& prob,
                            double eps, int threads = 1);

struct MinimizeOptions {
  int max_iters = 100;
  double tol = 1e-6;          // on the projected-gradient norm
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  double sigma0 = 1.0;        // first trial step; later trials rescale to the accepted step
  double min_step = 1e-12;
  double fd_eps = 1e-6;
  int threads = 1;            // worker cap for gradient probes
};

// Projected FD descent; returns the accepted-iterate log (a computable
// minimizing sequence).  J is nonincreasing across entries; the last entry is
// flagged stationary when no descent step exists at min_step.
std::vector<ControlIterate> minimize(const ControlProblem& prob,
                                     const Eigen::Ref<const Eigen::MatrixXd>& w_init,
                                     const MinimizeOptions& opts);

}  // namespace gnse
