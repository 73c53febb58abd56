#include "gnse/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "gnse/csvio.hpp"
#include "gnse/verify.hpp"

namespace gnse {

namespace {

using std::numbers::pi;

WeightedGrid grid_from_config(const RunConfig& rc) {
  if (rc.weight == "constant") return build_weight(WeightRecipe::constant(rc.weight_c), rc.n);
  if (rc.weight == "sine") return build_weight(WeightRecipe::sine(rc.weight_eps), rc.n);
  // tabulated: scalar-field CSV x,y,value in row-major traversal
  std::ifstream in(rc.weight_file);
  if (!in) throw ConfigError("cannot open weight file '" + rc.weight_file + "'");
  std::string line;
  std::getline(in, line);  // header
  Eigen::ArrayXXd g(rc.n, rc.n);
  for (int i = 0; i < rc.n; ++i)
    for (int j = 0; j < rc.n; ++j) {
      if (!std::getline(in, line))
        throw ConfigError("weight file ends early at row " + std::to_string(i * rc.n + j));
      const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
      if (c2 == std::string::npos) throw ConfigError("weight file: malformed row '" + line + "'");
      g(i, j) = std::stod(line.substr(c2 + 1));
    }
  return build_weight(WeightRecipe::tabulated(std::move(g)), rc.n);
}

// Fixed smooth stream-function recipe; amp scales the velocity.
VelocityField stream_initial(const WeightedGrid& grid, double amp) {
  const int n = grid.n();
  Eigen::ArrayXXd psi(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = static_cast<double>(i) / n, y = static_cast<double>(j) / n;
      psi(i, j) = amp * (std::sin(2 * pi * y) + std::cos(2 * pi * x) +
                         0.5 * std::sin(2 * pi * (x + y)) + 0.25 * std::cos(2 * pi * (2 * x - y)));
    }
  return VelocityField((-dyc(psi, grid.h()) / grid.g()).eval(),
                       (dxc(psi, grid.h()) / grid.g()).eval());
}

std::string join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::map<std::string, std::string> manifest_entries(const RunConfig& rc, const SolverConfig& cfg,
                                                    double nu_prime, double wall_seconds) {
  auto entries = rc.flat();
  std::ostringstream os;
  os.precision(17);
  entries["version"] = kVersion;
  os.str("");
  os << cfg.alpha1;
  entries["alpha1"] = os.str();
  os.str("");
  os << cfg.b();
  entries["b"] = os.str();
  os.str("");
  os << nu_prime;
  entries["nu_prime"] = os.str();
  os.str("");
  os << wall_seconds;
  entries["wall_seconds"] = os.str();
  return entries;
}

}  // namespace

std::string resolve_out_dir(const RunConfig& rc) {
  const char* env = std::getenv("GNSE_OUT");
  const std::string dir = (env && *env) ? env : rc.out_dir;
  std::filesystem::create_directories(dir);
  return dir;
}

RunSetup build_setup(const RunConfig& rc) {
  rc.validate();
  WeightedGrid grid = grid_from_config(rc);
  GStokesBasis basis = eigenbasis(grid, rc.m);
  GalerkinSystem system = build_galerkin_system(std::move(basis), rc.nu);
  SolverConfig cfg(FractionalOrder(rc.alpha), rc.alpha1, rc.nu, TimeGrid(rc.dt, rc.n_steps()));
  cfg.picard_tol = rc.picard_tol;
  cfg.picard_max = rc.picard_max;
  cfg.certificate_slack = rc.slack;

  Eigen::VectorXd xi0 = Eigen::VectorXd::Zero(rc.m);
  if (rc.initial == "mode")
    xi0[rc.initial_k - 1] = rc.initial_amp;
  else if (rc.initial == "stream")
    xi0 = project_initial(stream_initial(system.basis.grid, rc.initial_amp), system.basis);

  Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(rc.n_steps() + 1, rc.m);
  if (rc.forcing == "mode")
    for (int n = 0; n <= rc.n_steps(); ++n)
      eta(n, rc.forcing_k - 1) = rc.forcing_amp * std::cos(2.0 * pi * rc.forcing_freq * n * rc.dt);

  return RunSetup{system.basis.grid, system.basis, system, cfg, std::move(xi0), std::move(eta)};
}

int cmd_eig(const RunConfig& rc, std::ostream& log) {
  const Timer timer;
  rc.validate();
  const std::string dir = resolve_out_dir(rc);
  const WeightedGrid grid = grid_from_config(rc);
  const GStokesBasis basis = eigenbasis(grid, rc.m);

  write_spectrum_csv(join(dir, "spectrum.csv"), basis.lambdas);
  for (int k = 0; k < basis.m(); ++k) {
    std::ostringstream name;
    name << "mode_" << std::setw(3) << std::setfill('0') << (k + 1) << ".csv";
    write_velocity_csv(join(dir, name.str()), basis.modes[k], grid.h());
  }

  const HgReport hg = check_Hg(grid, basis.lambdas[0]);
  {
    std::ofstream out(join(dir, "hg_check.txt"), std::ios::binary);
    out << "holds=" << (hg.holds ? "true" : "false") << '\n'
        << "lambda1=" << fmt17(basis.lambdas[0]) << '\n'
        << "margin=" << fmt17(hg.margin) << '\n'
        << "nu_prime_factor=" << fmt17(hg.nu_prime_factor) << '\n'
        << "grad_g_sup=" << fmt17(grid.grad_g_sup()) << '\n'
        << "m0=" << fmt17(grid.m0()) << '\n'
        << "M0=" << fmt17(grid.M0()) << '\n';
  }
  log << "eig: m=" << basis.m() << " lambda1=" << basis.lambdas[0] << " H(g) "
      << (hg.holds ? "holds" : "fails") << " (margin " << hg.margin << ") ["
      << timer.seconds() << " s]\n";
  return hg.holds ? 0 : 2;
}

int cmd_solve(const RunConfig& rc, std::ostream& log) {
  const Timer timer;
  const RunSetup setup = build_setup(rc);
  const std::string dir = resolve_out_dir(rc);

  const Trajectory traj = solve_ivp(setup.system, setup.cfg, setup.xi0, setup.eta);
  write_trajectory_csv(join(dir, "trajectory.csv"), traj);
  write_diagnostics_csv(join(dir, "diagnostics.csv"), traj);

  const HgReport hg = check_Hg(setup.grid, setup.system.Lambda[0]);
  if (!hg.holds) {
    write_manifest(join(dir, "manifest.json"),
                   manifest_entries(rc, setup.cfg, rc.nu * hg.nu_prime_factor, timer.seconds()));
    log << "solve: H(g) fails (margin " << hg.margin << "); certificate refused\n";
    return 2;
  }
  const EnergyCertificate cert =
      energy_certificate(traj, setup.grid, setup.system.Lambda[0], setup.cfg);
  write_certificate_csv(join(dir, "certificate.csv"), cert);
  write_manifest(join(dir, "manifest.json"),
                 manifest_entries(rc, setup.cfg, cert.nu_prime, timer.seconds()));
  log << "solve: " << rc.n_steps() << " steps, certificate "
      << (cert.all_pass ? "pass" : "FAIL") << " [" << timer.seconds() << " s]\n";
  return cert.all_pass ? 0 : 3;
}

int cmd_control(const RunConfig& rc, std::ostream& log) {
  const Timer timer;
  const RunSetup setup = build_setup(rc);
  const std::string dir = resolve_out_dir(rc);
  const int ns = rc.n_steps();

  ControlProblem prob{Eigen::MatrixXd::Zero(rc.m, rc.d_c),
                      setup.eta,
                      setup.xi0,
                      Eigen::MatrixXd::Zero(ns + 1, rc.m),
                      Eigen::VectorXd::Zero(ns + 1),
                      rc.kappa,
                      2.0 / rc.alpha1,
                      Eigen::VectorXd::Constant(rc.d_c, rc.box_lo),
                      Eigen::VectorXd::Constant(rc.d_c, rc.box_hi),
                      setup.system,
                      setup.cfg};
  for (int i = 0; i < rc.d_c; ++i) prob.Cop(rc.actuators[i] - 1, i) = 1.0;

  if (rc.target == "recovery") {
    Eigen::MatrixXd w_star(ns, rc.d_c);
    for (int j = 0; j < ns; ++j)
      for (int i = 0; i < rc.d_c; ++i)
        w_star(j, i) = rc.wstar_amp * std::sin(2.0 * pi * (i + 1) * setup.cfg.time.t(j) / rc.T);
    prob.zeta = solution_map(w_star, prob).xi;
  } else if (rc.target == "unforced") {
    prob.zeta = solution_map(Eigen::MatrixXd::Zero(ns, rc.d_c), prob).xi;
  }  // "zero" keeps the zero target

  MinimizeOptions opts;
  opts.max_iters = rc.max_iters;
  opts.tol = rc.ctrl_tol;
  opts.fd_eps = rc.fd_eps;
  opts.armijo_c = rc.armijo_c;
  opts.armijo_shrink = rc.armijo_shrink;
  opts.sigma0 = rc.sigma0;
  opts.threads = rc.threads;

  const auto iters = minimize(prob, Eigen::MatrixXd::Zero(ns, rc.d_c), opts);
  write_control_log_csv(join(dir, "control_log.csv"), iters);
  write_wopt_csv(join(dir, "w_opt.csv"), iters.back().w, rc.dt);
  const Trajectory final_traj = solution_map(iters.back().w, prob);
  write_trajectory_csv(join(dir, "trajectory.csv"), final_traj);
  write_manifest(join(dir, "manifest.json"),
                 manifest_entries(rc, setup.cfg, rc.nu, timer.seconds()));

  log << "control: " << iters.size() << " iterates, J " << iters.front().J << " -> "
      << iters.back().J << (iters.back().stationary ? " (stationary)" : "") << " ["
      << timer.seconds() << " s]\n";
  return 0;
}

int cmd_verify(const std::string& filter, std::ostream& log) {
  const Timer timer;
  const auto results = run_verify_checks(filter);
  std::size_t width = 0;
  for (const auto& r : results) width = std::max(width, r.name.size());
  bool all_pass = !results.empty();
  for (const auto& r : results) {
    log << std::left << std::setw(static_cast<int>(width) + 2) << r.name
        << (r.pass ? "pass" : "FAIL") << "  " << std::setw(12) << std::setprecision(4)
        << std::scientific << r.measured << std::defaultfloat << "  " << r.note << '\n';
    all_pass = all_pass && r.pass;
  }
  log << (all_pass ? "all checks passed" : "CHECKS FAILED") << " (" << results.size()
      << " checks, " << timer.seconds() << " s)\n";
  return all_pass ? 0 : 1;
}

}  // namespace gnse
