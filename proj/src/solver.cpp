#include "gnse/solver.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace gnse {

PicardError::PicardError(int step_, double res)
    : std::runtime_error("Picard iteration failed to contract at step " + std::to_string(step_) +
                         " (residual " + std::to_string(res) + "); halve dt and restart"),
      step(step_),
      residual(res) {}

HgViolation::HgViolation(const HgReport& r)
    : std::runtime_error("certificate refused: hypothesis H(g) fails (margin " +
                         std::to_string(r.margin) + ")"),
      report(r) {}

Eigen::VectorXd project_initial(const VelocityField& u0, const GStokesBasis& basis) {
  if (u0.n() != basis.grid.n()) throw std::invalid_argument("project_initial: size mismatch");
  Eigen::VectorXd xi0(basis.m());
  for (int k = 0; k < basis.m(); ++k) xi0[k] = weighted_inner(u0, basis.modes[k], basis.grid);
  return xi0;
}

namespace {

// Known-history part of the L1 convolution:
//   H = xi^{n-1} - sum_{j=1}^{n-1} b_j (xi^{n-j} - xi^{n-j-1}),
// so that D^alpha xi ~ c (xi^n - H), c = dt^{-alpha}/Gamma(2-alpha).
Eigen::VectorXd l1_history_term(const Eigen::VectorXd& bweights,
                                const Eigen::Ref<const Eigen::MatrixXd>& history) {
  const int n = static_cast<int>(history.rows());
  Eigen::VectorXd H = history.row(n - 1).transpose();
  for (int j = 1; j < n; ++j)
    H -= bweights[j] * (history.row(n - j) - history.row(n - j - 1)).transpose();
  return H;
}

struct StepWorkspace {
  double c = 0.0;                        // dt^{-alpha}/Gamma(2-alpha)
  Eigen::VectorXd bweights;              // L1 weights for the full run
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;  // c I + nu (Lambda + Cmat)

  StepWorkspace(const GalerkinSystem& sys, const SolverConfig& cfg) {
    const double a = cfg.alpha.value();
    c = std::pow(cfg.time.dt, -a) / std::tgamma(2.0 - a);
    bweights = l1_weights(cfg.alpha, cfg.time.n_steps);
    Eigen::MatrixXd Alin = sys.nu * (Eigen::MatrixXd(sys.Lambda.asDiagonal()) + sys.Cmat);
    Alin.diagonal().array() += c;
    lu.compute(Alin);
  }
};

StepResult step_impl(const GalerkinSystem& sys, const SolverConfig& cfg, const StepWorkspace& ws,
                     const Eigen::Ref<const Eigen::MatrixXd>& history,
                     const Eigen::Ref<const Eigen::VectorXd>& eta_n) {
  const int n = static_cast<int>(history.rows());
  const Eigen::VectorXd H = l1_history_term(ws.bweights, history);
  Eigen::VectorXd x = history.row(n - 1).transpose();
  int iters = 0;
  double diff = 0.0;
  bool converged = false;
  for (; iters < cfg.picard_max; ++iters) {
    const Eigen::VectorXd rhs = eta_n + ws.c * H - sys.T.apply(x);
    Eigen::VectorXd x_next = ws.lu.solve(rhs);
    diff = (x_next - x).norm();
    x.swap(x_next);
    if (!x.allFinite()) throw PicardError(n, diff);
    if (diff < cfg.picard_tol) {
      converged = true;
      ++iters;
      break;
    }
  }
  if (!converged) throw PicardError(n, diff);
  const double res =
      (ws.c * (x - H) + sys.nu * (sys.Lambda.asDiagonal() * x + sys.Cmat * x) + sys.T.apply(x) -
       eta_n)
          .norm();
  return StepResult{std::move(x), iters, res};
}

void check_system_config(const GalerkinSystem& sys, const SolverConfig& cfg) {
  if (sys.nu != cfg.nu)
    throw std::invalid_argument("solver: GalerkinSystem.nu and SolverConfig.nu disagree");
}

}  // namespace

StepResult step(const GalerkinSystem& sys, const SolverConfig& cfg,
                const Eigen::Ref<const Eigen::MatrixXd>& history,
                const Eigen::Ref<const Eigen::VectorXd>& eta_n) {
  check_system_config(sys, cfg);
  if (history.rows() < 1) throw std::invalid_argument("step: history must contain xi^0");
  if (history.cols() != sys.m() || eta_n.size() != sys.m())
    throw std::invalid_argument("step: dimension mismatch with system");
  const StepWorkspace ws(sys, cfg);
  return step_impl(sys, cfg, ws, history, eta_n);
}

Trajectory solve_ivp(const GalerkinSystem& sys, const SolverConfig& cfg,
                     const Eigen::Ref<const Eigen::VectorXd>& xi0,
                     const Eigen::Ref<const Eigen::MatrixXd>& eta) {
  check_system_config(sys, cfg);
  const int m = sys.m();
  const int ns = cfg.time.n_steps;
  if (xi0.size() != m) throw std::invalid_argument("solve_ivp: xi0 size mismatch");
  if (eta.rows() != ns + 1 || eta.cols() != m)
    throw std::invalid_argument("solve_ivp: eta must be (n_steps+1) x m");

  Trajectory traj{cfg.time,
                  Eigen::MatrixXd(ns + 1, m),
                  eta,
                  Eigen::VectorXi::Zero(ns + 1),
                  Eigen::VectorXd::Zero(ns + 1),
                  Eigen::VectorXd::Zero(ns + 1),
                  Eigen::VectorXd::Zero(ns + 1),
                  Eigen::VectorXd::Zero(ns + 1)};
  traj.xi.row(0) = xi0.transpose();

  const StepWorkspace ws(sys, cfg);
  auto record = [&](int nrow) {
    const Eigen::VectorXd x = traj.xi.row(nrow).transpose();
    traj.energy[nrow] = x.squaredNorm();
    traj.enstrophy[nrow] = (sys.Lambda.array() * x.array().square()).sum();
    traj.eta_dual[nrow] =
        std::sqrt((traj.eta.row(nrow).transpose().array().square() / sys.Lambda.array()).sum());
  };
  record(0);
  for (int n = 1; n <= ns; ++n) {
    StepResult r = step_impl(sys, cfg, ws, traj.xi.topRows(n), eta.row(n).transpose());
    traj.xi.row(n) = r.xi.transpose();
    traj.picard_iters[n] = r.picard_iters;
    traj.residual[n] = r.residual;
    record(n);
  }
  return traj;
}

VelocityField reconstruct(const Trajectory& traj, const GStokesBasis& basis, int n) {
  if (n < 0 || n > traj.time.n_steps) throw std::invalid_argument("reconstruct: index out of range");
  if (traj.m() != basis.m()) throw std::invalid_argument("reconstruct: basis/trajectory mismatch");
  VelocityField out = VelocityField::zero(basis.grid.n());
  for (int k = 0; k < basis.m(); ++k) {
    out.u1 += traj.xi(n, k) * basis.modes[k].u1;
    out.u2 += traj.xi(n, k) * basis.modes[k].u2;
  }
  return out;
}

std::uint64_t fnv1a_hash(const void* data, std::size_t bytes, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::uint64_t trajectory_hash(const Trajectory& traj, const SolverConfig& cfg) {
  std::uint64_t h = fnv1a_hash(traj.xi.data(), sizeof(double) * traj.xi.size());
  h = fnv1a_hash(traj.eta.data(), sizeof(double) * traj.eta.size(), h);
  const double params[4] = {cfg.alpha.value(), cfg.alpha1, cfg.nu, cfg.time.dt};
  return fnv1a_hash(params, sizeof(params), h);
}

// trapezoid of s^{2/alpha1} over the whole horizon
double dual_source_integral(const Trajectory& traj, const SolverConfig& cfg) {
  const double p = 2.0 / cfg.alpha1;
  const int ns = traj.time.n_steps;
  double acc = 0.5 * (std::pow(traj.eta_dual[0], p) + std::pow(traj.eta_dual[ns], p));
  for (int j = 1; j < ns; ++j) acc += std::pow(traj.eta_dual[j], p);
  return acc * traj.time.dt;
}

}  // namespace

EnergyCertificate energy_certificate(const Trajectory& traj, const WeightedGrid& grid,
                                     double lambda1, const SolverConfig& cfg) {
  const HgReport hg = check_Hg(grid, lambda1);
  if (!hg.holds) throw HgViolation(hg);

  EnergyCertificate cert;
  cert.nu_prime = cfg.nu * hg.nu_prime_factor;
  cert.lambda1 = lambda1;
  cert.slack = cfg.certificate_slack;
  cert.alpha1 = cfg.alpha1;
  cert.input_hash = trajectory_hash(traj, cfg);

  const double T = traj.time.horizon();
  const double b = cfg.b();
  const double nu_p = cert.nu_prime;
  const double source = dual_source_integral(traj, cfg);
  const double tail = std::pow(T, 1.0 + b) / (1.0 + b);

  const double rhs_sup =
      cfg.certificate_slack * (traj.energy[0] + source / nu_p + tail / nu_p);
  const double rhs_int =
      cfg.certificate_slack *
      (traj.energy[0] / nu_p + source / (nu_p * nu_p) + tail / (nu_p * nu_p));

  const SampledFunction enst(traj.time, traj.enstrophy);
  const double ga = std::tgamma(cfg.alpha.value());
  const int ns = traj.time.n_steps;
  cert.sup_rows.reserve(ns + 1);
  cert.integral_rows.reserve(ns + 1);
  for (int n = 0; n <= ns; ++n) {
    const double t = traj.time.t(n);
    const double lhs_sup = traj.energy[n];
    cert.sup_rows.push_back({t, lhs_sup, rhs_sup, rhs_sup - lhs_sup, lhs_sup <= rhs_sup});
    const double lhs_int = ga * rl_integral_left(cfg.alpha, enst, n);
    cert.integral_rows.push_back({t, lhs_int, rhs_int, rhs_int - lhs_int, lhs_int <= rhs_int});
    cert.all_pass = cert.all_pass && cert.sup_rows.back().pass && cert.integral_rows.back().pass;
  }
  return cert;
}

StabilityReport stability_gap(const Trajectory& traj1, const Trajectory& traj2,
                              const WeightedGrid& grid, double lambda1, const SolverConfig& cfg,
                              double c_hat) {
  if (traj1.m() != traj2.m() || !traj1.time.same_as(traj2.time))
    throw std::invalid_argument("stability_gap: trajectories come from different systems");
  if ((traj1.eta - traj2.eta).cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument("stability_gap: forcings differ; the bound assumes same forcing");
  const HgReport hg = check_Hg(grid, lambda1);
  if (!hg.holds) throw HgViolation(hg);  // the absorption step needs nu' >= 0

  StabilityReport rep;
  rep.c_hat = c_hat;
  rep.c2 = c_hat * c_hat / cfg.nu;

  const SampledFunction enst2(traj2.time, traj2.enstrophy);
  const double w0 = (traj1.xi.row(0) - traj2.xi.row(0)).squaredNorm();
  const int ns = traj1.time.n_steps;
  rep.rows.reserve(ns + 1);
  for (int n = 0; n <= ns; ++n) {
    const double lhs = (traj1.xi.row(n) - traj2.xi.row(n)).squaredNorm();
    // int (t-s)^{a-1} ||xi_2||_V^2 / Gamma(a) is exactly the RL integral
    const double expo = rep.c2 * rl_integral_left(cfg.alpha, enst2, n);
    const double rhs = cfg.certificate_slack * w0 * std::exp(expo);
    rep.rows.push_back({traj1.time.t(n), lhs, rhs, rhs - lhs, lhs <= rhs});
    rep.all_pass = rep.all_pass && rep.rows.back().pass;
  }
  return rep;
}

}  // namespace gnse
