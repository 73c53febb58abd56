#pragma once

// L1 time stepping for the Galerkin fractional ODE system
//   D^alpha xi_k + nu lambda_k xi_k + nu (Cmat xi)_k + N(xi)_k = eta_k,
// plus the a-priori energy certificate and the uniqueness/stability gap
// check that mirror the continuous estimates.

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "gnse/fracops.hpp"
#include "gnse/spectral.hpp"

namespace gnse {

struct SolverConfig {
  FractionalOrder alpha;
  double alpha1;  // estimate exponent, 0 < alpha1 < alpha
  double nu;
  TimeGrid time;
  double picard_tol = 1e-10;
  int picard_max = 50;
  double certificate_slack = 1.10;

  SolverConfig(FractionalOrder a, double a1, double nu_, TimeGrid t)
      : alpha(a), alpha1(a1), nu(nu_), time(t) {
    if (!(alpha1 > 0.0) || !(alpha1 < alpha.value()))
      throw std::invalid_argument("SolverConfig: need 0 < alpha1 < alpha");
    if (!(nu > 0.0)) throw std::invalid_argument("SolverConfig: nu must be positive");
  }
  // b = (alpha - alpha1) / (1 - alpha1)
  double b() const { return (alpha.value() - alpha1) / (1.0 - alpha1); }
};

struct Trajectory {
  TimeGrid time;
  Eigen::MatrixXd xi;   // (n_steps+1) x m coefficient history
  Eigen::MatrixXd eta;  // (n_steps+1) x m forcing coefficients
  // per-step diagnostics (index 0 describes the initial state)
  Eigen::VectorXi picard_iters;
  Eigen::VectorXd residual;
  Eigen::VectorXd energy;     // |xi|^2
  Eigen::VectorXd enstrophy;  // sum lambda_k xi_k^2
  Eigen::VectorXd eta_dual;   // (sum eta_k^2 / lambda_k)^(1/2)

  int m() const { return static_cast<int>(xi.cols()); }
};

// Picard failed to contract; carries the step index and last residual so the
// caller can halve dt and retry.
struct PicardError : std::runtime_error {
  int step;
  double residual;
  PicardError(int step_, double res);
};

// Refused certificate: H(g) does not hold for the supplied grid/lambda1.
struct HgViolation : std::runtime_error {
  HgReport report;
  explicit HgViolation(const HgReport& r);
};

// xi0_k = (u0, phi_k)_g
Eigen::VectorXd project_initial(const VelocityField& u0, const GStokesBasis& basis);

// eta_k(t_j) = (f(t_j), phi_k)_g for a time-indexed forcing field
template <class F>
Eigen::MatrixXd forcing_coeffs(F&& f, const GStokesBasis& basis, const TimeGrid& time) {
  Eigen::MatrixXd eta(time.n_samples(), basis.m());
  for (int j = 0; j < time.n_samples(); ++j) {
    const VelocityField fj = f(time.t(j));
    eta.row(j) = project_initial(fj, basis).transpose();
  }
  return eta;
}

struct StepResult {
  Eigen::VectorXd xi;
  int picard_iters;
  double residual;
};

// One L1 step: history rows are xi^0..xi^{n-1} (n = history.rows()), eta_n the
// forcing at the new time level.  The linear part (including Cmat) is solved
// implicitly each Picard iterate, the convection tensor lags one iterate.
StepResult step(const GalerkinSystem& sys, const SolverConfig& cfg,
                const Eigen::Ref<const Eigen::MatrixXd>& history,
                const Eigen::Ref<const Eigen::VectorXd>& eta_n);

// Full integration; bit-deterministic for identical inputs.
Trajectory solve_ivp(const GalerkinSystem& sys, const SolverConfig& cfg,
                     const Eigen::Ref<const Eigen::VectorXd>& xi0,
                     const Eigen::Ref<const Eigen::MatrixXd>& eta);

VelocityField reconstruct(const Trajectory& traj, const GStokesBasis& basis, int n);

struct CertificateRow {
  double t;
  double lhs, rhs, margin;
  bool pass;
};

struct EnergyCertificate {
  std::vector<CertificateRow> sup_rows;       // Eq. (4.3) analogue, per step
  std::vector<CertificateRow> integral_rows;  // Eq. (4.4) analogue, per step
  bool all_pass = true;
  double nu_prime = 0.0;
  double lambda1 = 0.0;
  double slack = 0.0;
  double alpha1 = 0.0;
  std::uint64_t input_hash = 0;
};

// Checks, for every t_n,
//   |xi^n|^2 <= slack [ |xi^0|^2 + (1/nu') int_0^T ||eta||_*^{2/a1} + T^{1+b}/((1+b) nu') ]
// and the kernel-weighted enstrophy bound
//   int_0^{t_n} (t_n-s)^{a-1} ||xi||_V^2 <= slack [ |xi^0|^2/nu' + (1/nu'^2) int ||eta||_*^{2/a1}
//                                                   + T^{1+b}/((1+b) nu'^2) ],
// with nu' = nu * nu_prime_factor from check_Hg.  Refuses (throws HgViolation)
// when H(g) fails; that is not a verdict on the trajectory.
EnergyCertificate energy_certificate(const Trajectory& traj, const WeightedGrid& grid,
                                     double lambda1, const SolverConfig& cfg);

struct StabilityReport {
  std::vector<CertificateRow> rows;  // |w^n|^2 against the Gronwall envelope
  bool all_pass = true;
  double c_hat = 0.0;  // measured Ladyzhenskaya constant (empirical input)
  double c2 = 0.0;     // c_hat^2 / nu, the Gronwall rate actually used
  bool c2_is_empirical = true;
};

// Discrete Theorem-4.2 shadow: w = xi_1 - xi_2 must satisfy
//   |w^n|^2 <= slack |w^0|^2 exp( c2 * int_0^{t_n} k_alpha(t_n-s) ||xi_2(s)||_V^2 ds * Gamma(alpha) )
// (the quadrature is the same product-integration rule as everywhere else).
StabilityReport stability_gap(const Trajectory& traj1, const Trajectory& traj2,
                              const WeightedGrid& grid, double lambda1, const SolverConfig& cfg,
                              double c_hat);

std::uint64_t fnv1a_hash(const void* data, std::size_t bytes, std::uint64_t seed = 1469598103934665603ull);

}  // namespace gnse
