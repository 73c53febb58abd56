#pragma once

// Shared fixtures for the solver/control suites: memoized bases and small
// reference integrators coded independently of the library's stepping path.

#include <cmath>
#include <Eigen/Dense>

#include "gnse/control.hpp"
#include "gnse/solver.hpp"
#include "gnse/spectral.hpp"

namespace fixtures {

using namespace gnse;

inline const GStokesBasis& smoke_basis16() {
  static GStokesBasis b = eigenbasis(build_weight(WeightRecipe::sine(0.1), 32), 16);
  return b;
}

inline GalerkinSystem smoke_system(int m, double nu) {
  static GalerkinSystem full = build_galerkin_system(smoke_basis16(), 1.0);
  GalerkinSystem sys = truncate_system(full, m);
  sys.nu = nu;
  return sys;
}

// Single decoupled mode with unit nu*lambda and no convection: D^a xi = -xi + eta.
inline GalerkinSystem scalar_relaxation_system(double nu, double lambda) {
  GalerkinSystem sys;
  sys.Lambda = Eigen::VectorXd::Constant(1, lambda);
  sys.Cmat = Eigen::MatrixXd::Zero(1, 1);
  sys.T.Tk.assign(1, Eigen::MatrixXd::Zero(1, 1));
  sys.nu = nu;
  return sys;
}

// Implicit-Euler integrator for the same Galerkin dynamics, written without
// the L1 machinery: (x_n - x_{n-1})/dt + nu(L + C)x_n + N(x_n) = eta_n.
inline Eigen::MatrixXd implicit_euler_reference(const GalerkinSystem& sys, const TimeGrid& time,
                                                const Eigen::VectorXd& xi0,
                                                const Eigen::MatrixXd& eta, double tol = 1e-13,
                                                int max_fp = 400) {
  const int m = sys.m();
  Eigen::MatrixXd out(time.n_steps + 1, m);
  out.row(0) = xi0.transpose();
  Eigen::MatrixXd A = sys.nu * (Eigen::MatrixXd(sys.Lambda.asDiagonal()) + sys.Cmat);
  A.diagonal().array() += 1.0 / time.dt;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd x = xi0;
  for (int n = 1; n <= time.n_steps; ++n) {
    Eigen::VectorXd prev = x;
    for (int it = 0; it < max_fp; ++it) {
      Eigen::VectorXd rhs = eta.row(n).transpose() + prev / time.dt - sys.T.apply(x);
      Eigen::VectorXd xn = lu.solve(rhs);
      const double d = (xn - x).norm();
      x = xn;
      if (d < tol) break;
    }
    out.row(n) = x.transpose();
  }
  return out;
}

}  // namespace fixtures
