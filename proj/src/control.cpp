#include "gnse/control.hpp"

#include <cmath>
#include <thread>

namespace gnse {

void ControlProblem::validate() const {
  const int ns = cfg.time.n_steps;
  if (Cop.rows() != system.m()) throw std::invalid_argument("ControlProblem: Cop rows != m");
  if (xi0.size() != system.m()) throw std::invalid_argument("ControlProblem: xi0 size");
  if (f_base.rows() != ns + 1 || f_base.cols() != system.m())
    throw std::invalid_argument("ControlProblem: f_base shape");
  if (zeta.rows() != ns + 1 || zeta.cols() != system.m())
    throw std::invalid_argument("ControlProblem: target shape");
  if (rho.size() != ns + 1) throw std::invalid_argument("ControlProblem: rho length");
  if (!(kappa > 0.0)) throw std::invalid_argument("ControlProblem: kappa must be positive");
  if (!(cost_exponent > 2.0))
    throw std::invalid_argument("ControlProblem: cost exponent 2/alpha1 must exceed 2");
  if (box_lo.size() != dc() || box_hi.size() != dc() || (box_lo.array() > box_hi.array()).any())
    throw std::invalid_argument("ControlProblem: empty admissible box");
}

Eigen::MatrixXd actuator_coeffs(const std::vector<VelocityField>& actuators,
                                const GStokesBasis& basis) {
  Eigen::MatrixXd Cop(basis.m(), static_cast<int>(actuators.size()));
  for (std::size_t i = 0; i < actuators.size(); ++i) {
    const VelocityField proj = leray_project_g(actuators[i], basis.grid);
    const double dv = div_g(proj, basis.grid).v.abs().maxCoeff();
    if (dv > 1e-9)
      throw std::invalid_argument("actuator_coeffs: projected actuator not divergence-free");
    Cop.col(static_cast<int>(i)) = project_initial(proj, basis);
  }
  return Cop;
}

namespace {

void check_in_box(const Eigen::Ref<const Eigen::MatrixXd>& w, const ControlProblem& prob) {
  for (int i = 0; i < w.cols(); ++i)
    if ((w.col(i).array() < prob.box_lo[i] - 1e-14).any() ||
        (w.col(i).array() > prob.box_hi[i] + 1e-14).any())
      throw std::invalid_argument("control outside the admissible box");
}

Eigen::MatrixXd clip_to_box(Eigen::MatrixXd w, const ControlProblem& prob) {
  for (int i = 0; i < w.cols(); ++i)
    w.col(i) = w.col(i).cwiseMax(prob.box_lo[i]).cwiseMin(prob.box_hi[i]);
  return w;
}

}  // namespace

Trajectory solution_map(const Eigen::Ref<const Eigen::MatrixXd>& w, const ControlProblem& prob) {
  const int ns = prob.cfg.time.n_steps;
  if (w.rows() != ns || w.cols() != prob.dc())
    throw std::invalid_argument("solution_map: control must be n_steps x d_c");
  check_in_box(w, prob);
  Eigen::MatrixXd eta = prob.f_base;
  // cell j covers (t_j, t_{j+1}]; the implicit step at t_{j+1} sees w_j
  for (int j = 0; j < ns; ++j) eta.row(j + 1) += (prob.Cop * w.row(j).transpose()).transpose();
  eta.row(0) += (prob.Cop * w.row(0).transpose()).transpose();
  return solve_ivp(prob.system, prob.cfg, prob.xi0, eta);
}

double objective(const Trajectory& traj, const Eigen::Ref<const Eigen::MatrixXd>& w,
                 const ControlProblem& prob) {
  const int ns = prob.cfg.time.n_steps;
  if (w.rows() != ns || w.cols() != prob.dc()) throw std::invalid_argument("objective: w shape");
  const double dt = prob.cfg.time.dt;
  double track = 0.0;
  for (int n = 0; n <= ns; ++n) {
    const double e2 = (traj.xi.row(n) - prob.zeta.row(n)).squaredNorm() + prob.rho[n];
    track += (n == 0 || n == ns) ? 0.5 * e2 : e2;
  }
  track *= 0.5 * dt;
  double cost = 0.0;
  for (int j = 0; j < ns; ++j) cost += std::pow(w.row(j).norm(), prob.cost_exponent);
  cost *= prob.kappa * dt;
  return track + cost;
}

double tracking_error(const Trajectory& traj, const ControlProblem& prob) {
  const int ns = prob.cfg.time.n_steps;
  const double dt = prob.cfg.time.dt;
  double acc = 0.0;
  for (int n = 0; n <= ns; ++n) {
    const double e2 = (traj.xi.row(n) - prob.zeta.row(n)).squaredNorm() + prob.rho[n];
    acc += (n == 0 || n == ns) ? 0.5 * e2 : e2;
  }
  return std::sqrt(acc * dt);
}

Eigen::MatrixXd fd_gradient(const Eigen::Ref<const Eigen::MatrixXd>& w, const ControlProblem& prob,
                            double eps, int threads) {
  if (!(eps > 0.0)) throw std::invalid_argument("fd_gradient: eps must be positive");
  const int ns = static_cast<int>(w.rows());
  const int dc = static_cast<int>(w.cols());
  Eigen::MatrixXd grad(ns, dc);
  auto probe = [&](int slot) {
    const int j = slot / dc, i = slot % dc;
    const double lo = prob.box_lo[i], hi = prob.box_hi[i];
    const double up = std::min(w(j, i) + eps, hi);
    const double dn = std::max(w(j, i) - eps, lo);
    if (up == dn) {  // degenerate box direction
      grad(j, i) = 0.0;
      return;
    }
    Eigen::MatrixXd wp = w;
    wp(j, i) = up;
    const double Jp = objective(solution_map(wp, prob), wp, prob);
    wp(j, i) = dn;
    const double Jm = objective(solution_map(wp, prob), wp, prob);
    grad(j, i) = (Jp - Jm) / (up - dn);
  };
  const int total = ns * dc;
  if (threads <= 1) {
    for (int slot = 0; slot < total; ++slot) probe(slot);
    return grad;
  }
  std::vector<std::thread> pool;
  const int nw = std::min(threads, total);
  for (int t = 0; t < nw; ++t)
    pool.emplace_back([&, t]() {
      for (int slot = t; slot < total; slot += nw) probe(slot);
    });
  for (auto& th : pool) th.join();
  return grad;
}

std::vector<ControlIterate> minimize(const ControlProblem& prob,
                                     const Eigen::Ref<const Eigen::MatrixXd>& w_init,
                                     const MinimizeOptions& opts) {
  prob.validate();
  check_in_box(w_init, prob);

  std::vector<ControlIterate> log;
  Eigen::MatrixXd w = w_init;
  Trajectory traj = solution_map(w, prob);
  double J = objective(traj, w, prob);
  double last_sigma = 0.0;
  double sigma_start = opts.sigma0;

  for (int it = 0;; ++it) {
    const Eigen::MatrixXd g = fd_gradient(w, prob, opts.fd_eps, opts.threads);
    const double pgnorm = (w - clip_to_box(w - g, prob)).norm();
    log.push_back({w, J, pgnorm, traj.residual.cwiseAbs().maxCoeff(), last_sigma, false});
    if (pgnorm <= opts.tol || it >= opts.max_iters) break;

    double sigma = sigma_start;
    bool accepted = false;
    while (sigma >= opts.min_step) {
      const Eigen::MatrixXd w_trial = clip_to_box(w - sigma * g, prob);
      const double decrease = opts.armijo_c * (w - w_trial).squaredNorm() / sigma;
      Trajectory t_trial = solution_map(w_trial, prob);
      const double J_trial = objective(t_trial, w_trial, prob);
      if (J_trial <= J - decrease) {
        w = w_trial;
        traj = std::move(t_trial);
        J = J_trial;
        last_sigma = sigma;
        sigma_start = 4.0 * sigma;  // rescale the next trial to the accepted step
        accepted = true;
        break;
      }
      sigma *= opts.armijo_shrink;
    }
    if (!accepted) {
      log.back().stationary = true;
      break;
    }
  }
  return log;
}

}  // namespace gnse
