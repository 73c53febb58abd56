#include "gnse/verify.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

#include "gnse/control.hpp"
#include "gnse/csvio.hpp"
#include "gnse/solver.hpp"
#include "gnse/spectral.hpp"

namespace gnse {

namespace {

using std::numbers::pi;

// shared fixtures, built lazily so `--filter fracops` stays cheap
const WeightedGrid& sine_grid32() {
  static WeightedGrid g = build_weight(WeightRecipe::sine(0.1), 32);
  return g;
}

const GStokesBasis& sine_basis32() {
  static GStokesBasis b = eigenbasis(sine_grid32(), 16);
  return b;
}

const GStokesBasis& flat_basis32() {
  static GStokesBasis b = eigenbasis(build_weight(WeightRecipe::constant(1.0), 32), 8);
  return b;
}

CheckResult make(const std::string& name, bool pass, double measured, const std::string& note) {
  return CheckResult{name, pass, measured, note};
}

VelocityField random_field(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::ArrayXXd a(n, n), b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a(i, j) = unif(rng);
      b(i, j) = unif(rng);
    }
  return VelocityField(std::move(a), std::move(b));
}

// ---------------- fracops ----------------

void fracops_checks(std::vector<CheckResult>& out) {
  const FractionalOrder half(0.5);

  out.push_back(caputo_power_rule_check(
      [](FractionalOrder o, int n) { return l1_weights(o, n); }));

  {
    const int N = 512;
    auto sq = SampledFunction::from(TimeGrid(1.0 / N, N), [](double t) { return t * t; });
    const double err = std::abs(caputo_l1_apply(half, sq, N) - 1.5045055561273501);
    out.push_back(make("fracops.caputo_power_rule_t2", err < 1.0 * std::pow(1.0 / N, 1.5), err,
                       "|D^0.5 t^2 - G(3)/G(2.5)| at t=1, threshold dt^1.5"));
  }
  {
    bool mono = true;
    for (double a : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const Eigen::VectorXd b = l1_weights(FractionalOrder(a), 128);
      for (int j = 0; j + 1 < b.size(); ++j)
        mono = mono && b[j] > 0.0 && b[j + 1] < b[j];
    }
    out.push_back(make("fracops.l1_weights_monotone", mono, mono ? 1.0 : 0.0,
                       "positive strictly-decreasing weights for alpha in (0,1)"));
  }
  {
    const Eigen::VectorXd b = l1_weights(FractionalOrder(0.3), 100);
    const double err = std::abs(b.sum() - std::pow(100.0, 0.7));
    out.push_back(make("fracops.l1_weights_telescope", err < 1e-12, err,
                       "|sum b_j - n^{1-alpha}|, alpha=0.3, n=100"));
  }
  {
    // empirical order on t^2 across four refinements
    double worst = 10.0;
    for (double a : {0.3, 0.5, 0.8}) {
      std::vector<double> errs;
      for (int N : {64, 128, 256, 512}) {
        auto sq = SampledFunction::from(TimeGrid(1.0 / N, N), [](double t) { return t * t; });
        const double exact = std::tgamma(3.0) / std::tgamma(3.0 - a);
        double maxe = 0.0;
        for (int n = 1; n <= N; ++n)
          maxe = std::max(maxe, std::abs(caputo_l1_apply(FractionalOrder(a), sq, n) -
                                         exact * std::pow(n / static_cast<double>(N), 2.0 - a)));
        errs.push_back(maxe);
      }
      for (std::size_t i = 0; i + 1 < errs.size(); ++i)
        worst = std::min(worst, std::log2(errs[i] / errs[i + 1]) - ((2.0 - a) - 0.2));
    }
    out.push_back(make("fracops.l1_convergence_order", worst >= 0.0, worst,
                       "min over alpha of (order - (2-alpha-0.2)); pass when >= 0"));
  }
  {
    double maxe = 0.0;
    for (double z = -10.0; z <= 10.0; z += 0.5)
      maxe = std::max(maxe, std::abs(mittag_leffler(FractionalOrder(1.0), z) - std::exp(z)));
    out.push_back(make("fracops.ml_exp_agreement", maxe < 1e-10 * std::exp(10.0), maxe,
                       "max |E_1(z) - exp(z)| over |z|<=10"));
  }
  {
    const double err = std::abs(mittag_leffler(half, -1.0) - 0.42758357615580700);
    out.push_back(make("fracops.ml_erfc_identity", err < 1e-12, err,
                       "|E_0.5(-1) - exp(1) erfc(1)|"));
  }
  {
    const int N = 256;
    auto f = SampledFunction::from(TimeGrid(1.0 / N, N), [](double t) { return std::sin(2.0 * t); });
    Eigen::VectorXd F(N + 1);
    for (int n = 0; n <= N; ++n) F[n] = rl_integral_left(half, f, n);
    SampledFunction If(f.grid, F);
    double maxe = 0.0;
    for (int n = 1; n <= N; ++n)
      maxe = std::max(maxe, std::abs(caputo_l1_apply(half, If, n) - f.values[n]));
    out.push_back(make("fracops.semigroup_recovery", maxe < 4.0 / N, maxe,
                       "max |D^a I^a f - f| for f=sin(2t), threshold 4 dt"));
  }
  {
    const int N = 512;
    const TimeGrid grid(1.0 / N, N);
    auto u = SampledFunction::from(grid, [](double t) { return t; });
    auto psi = SampledFunction::from(grid, [](double t) { return (1.0 - t) * (1.0 - t); });
    const double res = ibp_residual(half, u, psi);
    out.push_back(make("fracops.ibp_residual_smooth", res <= 1e-3, res,
                       "fractional integration-by-parts residual at n_steps=512"));
  }
  {
    const int N = 128;
    auto lin = SampledFunction::from(TimeGrid(1.0 / N, N), [](double t) { return t; });
    const double err =
        std::abs(gronwall_bound(FractionalOrder(0.3), 0.0, lin, N) - 0.85710962195946296);
    out.push_back(make("fracops.gronwall_power_rule", err < 1e-12, err,
                       "|bound(0, s, 0.3) - 1/Gamma(2.3)| at t=1"));
  }
}

// ---------------- wdomain ----------------

void wdomain_checks(std::vector<CheckResult>& out) {
  const WeightedGrid& gs = sine_grid32();
  {
    const WeightedGrid g64 = build_weight(WeightRecipe::sine(0.1), 64);
    const double e1 = std::abs(g64.m0() - 0.9);
    const double e2 = std::abs(g64.M0() - 1.1);
    const double e3 = std::abs(g64.grad_g_sup() - 0.2 * pi);
    const double worst = std::max({e1, e2, e3});
    out.push_back(make("wdomain.weight_bounds", worst < 1e-12, worst,
                       "bounds of 1+0.1 sin(2 pi x) at n=64 vs analytic"));
  }
  {
    const WeightedGrid unit = build_weight(WeightRecipe::constant(1.0), 32);
    double worst = 0.0;
    bool pass = true;
    for (unsigned s = 0; s < 10; ++s) {
      const VelocityField u = random_field(32, 500 + s);
      const double wg = weighted_inner(u, u, gs);
      const double w1 = weighted_inner(u, u, unit);
      pass = pass && wg >= gs.m0() * w1 * (1 - 1e-12) && wg <= gs.M0() * w1 * (1 + 1e-12);
      worst = std::max(worst, std::abs(wg / w1 - 1.0));
    }
    out.push_back(make("wdomain.norm_equivalence", pass, worst,
                       "m0 |u|^2 <= |u|_g^2 <= M0 |u|^2 over random fields"));
  }
  {
    const Eigen::ArrayXXd psi = random_field(32, 600).u1;
    const VelocityField curl((-dyc(psi, gs.h())).eval(), dxc(psi, gs.h()).eval());
    const WeightedGrid unit = build_weight(WeightRecipe::constant(1.0), 32);
    const double dv = div_g(curl, unit).v.abs().maxCoeff();
    out.push_back(make("wdomain.div_curl_identity", dv < 1e-12, dv,
                       "max |div(curl psi)| with matched stencils"));
  }
  {
    const VelocityField u = random_field(32, 700);
    const VelocityField v = leray_project_g(u, gs);
    const double dv = div_g(v, gs).v.abs().maxCoeff();
    VelocityField diff(u.u1 - v.u1, u.u2 - v.u2);
    const double ortho = std::abs(weighted_inner(v, diff, gs)) / weighted_inner(u, u, gs);
    const VelocityField vv = leray_project_g(v, gs);
    const double idem =
        std::max((vv.u1 - v.u1).abs().maxCoeff(), (vv.u2 - v.u2).abs().maxCoeff());
    out.push_back(make("wdomain.leray_divfree", dv < 1e-10, dv, "max |div_g P_g u|"));
    out.push_back(make("wdomain.leray_orthogonality", ortho < 1e-10, ortho,
                       "(P_g u, u - P_g u)_g / |u|_g^2"));
    out.push_back(make("wdomain.leray_idempotent", idem < 1e-10, idem, "max |P_g P_g u - P_g u|"));
  }
  {
    const HgReport rep = check_Hg(gs, sine_basis32().lambdas[0]);
    out.push_back(make("wdomain.hg_margin", rep.holds && rep.margin > 0.0, rep.margin,
                       "H(g) margin for 1+0.1 sin at n=32"));
  }
}

// ---------------- spectral ----------------

void spectral_checks(std::vector<CheckResult>& out) {
  {
    const GStokesBasis& b = flat_basis32();
    double worst = 0.0;
    for (int k = 0; k < 4; ++k)
      worst = std::max(worst, std::abs(b.lambdas[k] / (4.0 * pi * pi) - 1.0));
    out.push_back(make("spectral.eig_fidelity", worst < 0.02, worst,
                       "max relative gap of the first shell to 4 pi^2 (n=32)"));
  }
  {
    const GStokesBasis& b = sine_basis32();
    const double bound = 4.0 * pi * pi * b.grid.m0() / b.grid.M0();
    const double ratio = b.lambdas[0] / bound;
    out.push_back(make("spectral.prop_lower_bound", ratio >= 0.95, ratio,
                       "lambda_1 / (4 pi^2 m0/M0), pass when >= 0.95"));
  }
  {
    const GStokesBasis& b = sine_basis32();
    double worst_on = 0.0, worst_dv = 0.0, worst_rq = 0.0;
    for (int k = 0; k < b.m(); ++k) {
      for (int l = 0; l <= k; ++l)
        worst_on = std::max(worst_on, std::abs(weighted_inner(b.modes[k], b.modes[l], b.grid) -
                                               (k == l ? 1.0 : 0.0)));
      worst_dv = std::max(worst_dv, div_g(b.modes[k], b.grid).v.abs().maxCoeff());
      worst_rq = std::max(worst_rq,
                          std::abs(weighted_h1_inner(b.modes[k], b.modes[k], b.grid) /
                                       b.lambdas[k] -
                                   1.0));
    }
    out.push_back(make("spectral.orthonormality", worst_on < 1e-10, worst_on,
                       "max |(phi_k, phi_l)_g - delta|"));
    out.push_back(make("spectral.modes_divfree", worst_dv < 1e-10, worst_dv,
                       "max |div_g phi_k|"));
    out.push_back(make("spectral.rayleigh_consistency", worst_rq < 1e-8, worst_rq,
                       "max relative |((phi,phi))_g - lambda|"));
  }
  {
    const Eigen::MatrixXd C0 = cg_matrix(flat_basis32());
    out.push_back(make("spectral.cmat_zero_for_flat_g", C0.cwiseAbs().maxCoeff() < 1e-13,
                       C0.cwiseAbs().maxCoeff(), "max |Cmat| when g is constant"));
    const Eigen::MatrixXd C = cg_matrix(sine_basis32());
    const double skew = (C + C.transpose()).cwiseAbs().maxCoeff();
    out.push_back(make("spectral.cmat_skew", skew < 1e-13, skew, "max |Cmat + Cmat^T|"));
  }
  {
    const ConvectionTensor T = convection_tensor(sine_basis32());
    std::mt19937 rng(321);
    std::normal_distribution<double> gauss;
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
      Eigen::VectorXd xi(T.m());
      for (int k = 0; k < T.m(); ++k) xi[k] = gauss(rng);
      worst = std::max(worst, std::abs(xi.dot(T.apply(xi))) / std::pow(xi.norm(), 3.0));
    }
    out.push_back(make("spectral.tensor_energy_neutrality", worst <= 1e-12, worst,
                       "max |xi.N(xi)| / |xi|^3 over 100 random xi"));
  }
  {
    double prev = -1.0, worst_growth = 0.0, last = 0.0;
    for (int n : {16, 32, 64}) {
      const WeightedGrid g = build_weight(WeightRecipe::sine(0.1), n);
      last = measure_ladyzhenskaya(g, 40, 2024u);
      if (prev > 0.0) worst_growth = std::max(worst_growth, last / prev - 1.0);
      prev = last;
    }
    out.push_back(make("spectral.ladyzhenskaya_ratio", worst_growth <= 0.25, last,
                       "empirical c-hat at n=64; pass when growth per refinement <= 25%"));
  }
}

// ---------------- solver ----------------

void solver_checks(std::vector<CheckResult>& out) {
  {
    GalerkinSystem sys;
    sys.Lambda = Eigen::VectorXd::Ones(1);
    sys.Cmat = Eigen::MatrixXd::Zero(1, 1);
    sys.T.Tk.assign(1, Eigen::MatrixXd::Zero(1, 1));
    sys.nu = 1.0;
    const int ns = 512;
    const SolverConfig cfg(FractionalOrder(0.5), 0.25, 1.0, TimeGrid(1.0 / ns, ns));
    const Trajectory traj =
        solve_ivp(sys, cfg, Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Zero(ns + 1, 1));
    const double err = std::abs(traj.xi(ns, 0) - 0.42758357615580700);
    out.push_back(make("solver.ml_oracle_final", err <= 5e-3, err,
                       "|xi(1) - E_0.5(-1)| at dt=1/512"));
  }
  {
    GalerkinSystem sys = truncate_system(build_galerkin_system(sine_basis32(), 0.05), 8);
    SolverConfig cfg(FractionalOrder(1.0), 0.5, 0.05, TimeGrid(1.0 / 128, 64));
    cfg.picard_tol = 1e-13;
    Eigen::VectorXd xi0 = Eigen::VectorXd::Zero(8);
    xi0[0] = 0.4;
    xi0[2] = -0.2;
    const Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(65, 8);
    const Trajectory traj = solve_ivp(sys, cfg, xi0, eta);
    // independent implicit-Euler recurrence, resynced per step
    Eigen::MatrixXd A = sys.nu * (Eigen::MatrixXd(sys.Lambda.asDiagonal()) + sys.Cmat);
    A.diagonal().array() += 128.0;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::VectorXd prev = xi0;
    double worst = 0.0;
    for (int n = 1; n <= 64; ++n) {
      Eigen::VectorXd y = prev;
      for (int it = 0; it < 200; ++it) {
        const Eigen::VectorXd yn = lu.solve(128.0 * prev - sys.T.apply(y));
        const double d = (yn - y).norm();
        y = yn;
        if (d < 1e-14) break;
      }
      worst = std::max(worst, (traj.xi.row(n).transpose() - y).norm());
      prev = traj.xi.row(n).transpose();
    }
    out.push_back(make("solver.alpha1_euler_match", worst < 1e-10, worst,
                       "per-step gap to an implicit-Euler recurrence at alpha=1"));
  }
  {
    GalerkinSystem sys = truncate_system(build_galerkin_system(sine_basis32(), 0.05), 8);
    const SolverConfig cfg(FractionalOrder(0.5), 0.25, 0.05, TimeGrid(1.0 / 256, 128));
    Eigen::VectorXd xi0 = Eigen::VectorXd::Zero(8);
    xi0[0] = 0.5;
    Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(129, 8);
    for (int n = 0; n <= 128; ++n) eta(n, 1) = 0.05 * std::cos(2.0 * pi * n / 256.0);
    const Trajectory traj = solve_ivp(sys, cfg, xi0, eta);
    double worst = 0.0;
    for (int n = 1; n <= 128; ++n) {
      const Eigen::VectorXd xi = traj.xi.row(n).transpose();
      worst = std::max(worst, std::abs(xi.dot(sys.T.apply(xi))) / std::pow(xi.norm(), 3.0));
    }
    out.push_back(make("solver.nonlinear_neutrality_run", worst <= 1e-12, worst,
                       "max |xi.N(xi)|/|xi|^3 along the smoke run"));

    const EnergyCertificate cert =
        energy_certificate(traj, sys.basis.grid, sys.Lambda[0], cfg);
    double min_margin = std::numeric_limits<double>::infinity();
    for (const auto& r : cert.sup_rows) min_margin = std::min(min_margin, r.margin);
    for (const auto& r : cert.integral_rows) min_margin = std::min(min_margin, r.margin);
    out.push_back(make("solver.certificate_smoke", cert.all_pass, min_margin,
                       "smallest certificate margin on the smoke run"));

    const double c_hat = measure_ladyzhenskaya(sys.basis.grid, 40, 2024u);
    Eigen::VectorXd xi0p = xi0;
    xi0p[0] += 1e-6;
    const Trajectory traj2 = solve_ivp(sys, cfg, xi0p, eta);
    const StabilityReport rep =
        stability_gap(traj, traj2, sys.basis.grid, sys.Lambda[0], cfg, c_hat);
    double min_m = std::numeric_limits<double>::infinity();
    for (const auto& r : rep.rows) min_m = std::min(min_m, r.margin);
    out.push_back(make("solver.stability_gap_bound", rep.all_pass, min_m,
                       "smallest Gronwall-gap margin for a 1e-6 perturbation"));

    const Trajectory traj_b = solve_ivp(sys, cfg, xi0, eta);
    const bool same =
        std::memcmp(traj.xi.data(), traj_b.xi.data(), sizeof(double) * traj.xi.size()) == 0;
    out.push_back(make("solver.determinism", same, same ? 0.0 : 1.0,
                       "bit-identical repeat of the smoke run"));
  }
  {
    // temporal order on the forced-smooth linear problem, alpha = 0.5
    std::vector<double> errs;
    for (int ns : {64, 128, 256, 512}) {
      GalerkinSystem sys;
      sys.Lambda = Eigen::VectorXd::Ones(1);
      sys.Cmat = Eigen::MatrixXd::Zero(1, 1);
      sys.T.Tk.assign(1, Eigen::MatrixXd::Zero(1, 1));
      sys.nu = 1.0;
      SolverConfig cfg(FractionalOrder(0.5), 0.25, 1.0, TimeGrid(1.0 / ns, ns));
      cfg.picard_tol = 1e-14;
      Eigen::MatrixXd eta(ns + 1, 1);
      const double c = std::tgamma(3.0) / std::tgamma(2.5);
      for (int n = 0; n <= ns; ++n) {
        const double t = cfg.time.t(n);
        eta(n, 0) = c * std::pow(t, 1.5) + t * t;
      }
      const Trajectory traj = solve_ivp(sys, cfg, Eigen::VectorXd::Zero(1), eta);
      double maxe = 0.0;
      for (int n = 0; n <= ns; ++n)
        maxe = std::max(maxe, std::abs(traj.xi(n, 0) - cfg.time.t(n) * cfg.time.t(n)));
      errs.push_back(maxe);
    }
    double order = 0.0;
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) order += std::log2(errs[i] / errs[i + 1]);
    order /= 3.0;
    out.push_back(make("solver.temporal_order", std::abs(order - 1.5) <= 0.25, order,
                       "empirical order vs 2-alpha=1.5 (+-0.25)"));
  }
  {
    GalerkinSystem sys = truncate_system(build_galerkin_system(sine_basis32(), 0.05), 8);
    const int ns = 128;
    SolverConfig cfg(FractionalOrder(0.999), 0.5, 0.05, TimeGrid(0.5 / ns, ns));
    Eigen::VectorXd xi0 = Eigen::VectorXd::Zero(8);
    xi0[0] = 0.4;
    xi0[1] = -0.2;
    const Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(ns + 1, 8);
    const Trajectory frac = solve_ivp(sys, cfg, xi0, eta);
    SolverConfig cfg1(FractionalOrder(1.0), 0.5, 0.05, cfg.time);
    const Trajectory euler = solve_ivp(sys, cfg1, xi0, eta);
    double sup = 0.0;
    for (int n = 0; n <= ns; ++n) sup = std::max(sup, (frac.xi.row(n) - euler.xi.row(n)).norm());
    out.push_back(make("solver.alpha_to_one_continuity", sup <= 1e-2, sup,
                       "sup gap between alpha=0.999 and the alpha=1 run on [0,0.5]"));
  }
  {
    // Galerkin refinement on the projected smooth initial field
    const GStokesBasis& basis = sine_basis32();
    Eigen::ArrayXXd psi(32, 32);
    for (int i = 0; i < 32; ++i)
      for (int j = 0; j < 32; ++j) {
        const double x = i / 32.0, y = j / 32.0;
        psi(i, j) = 0.05 * (std::sin(2 * pi * y) + std::cos(2 * pi * x) +
                            0.5 * std::sin(2 * pi * (x + y)) + 0.25 * std::cos(2 * pi * (2 * x - y)));
      }
    const VelocityField u0((-dyc(psi, basis.grid.h()) / basis.grid.g()).eval(),
                           (dxc(psi, basis.grid.h()) / basis.grid.g()).eval());
    const Eigen::VectorXd xi0 = project_initial(u0, basis);
    const GalerkinSystem full = build_galerkin_system(basis, 0.05);
    std::vector<Eigen::VectorXd> finals;
    const int ns = 128;
    for (int m : {4, 8, 16}) {
      const GalerkinSystem sys = truncate_system(full, m);
      const SolverConfig cfg(FractionalOrder(0.5), 0.25, 0.05, TimeGrid(0.5 / ns, ns));
      finals.push_back(
          solve_ivp(sys, cfg, xi0.head(m), Eigen::MatrixXd::Zero(ns + 1, m)).xi.row(ns));
    }
    auto gap = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
      Eigen::VectorXd ap = Eigen::VectorXd::Zero(b.size());
      ap.head(a.size()) = a;
      return (ap - b).norm();
    };
    const double d48 = gap(finals[0], finals[1]);
    const double d816 = gap(finals[1], finals[2]);
    out.push_back(make("solver.galerkin_refinement", d816 <= d48 + 1e-14, d816 / d48,
                       "|u8-u16| / |u4-u8| at T; pass when <= 1"));
  }
}

// ---------------- control ----------------

void control_checks(std::vector<CheckResult>& out) {
  const GStokesBasis basis = eigenbasis(build_weight(WeightRecipe::sine(0.1), 16), 4);
  const int ns = 32;
  auto make_prob = [&]() {
    ControlProblem prob{Eigen::MatrixXd::Zero(4, 1),
                        Eigen::MatrixXd::Zero(ns + 1, 4),
                        Eigen::VectorXd::Zero(4),
                        Eigen::MatrixXd::Zero(ns + 1, 4),
                        Eigen::VectorXd::Zero(ns + 1),
                        1e-6,
                        8.0,
                        Eigen::VectorXd::Constant(1, -2.0),
                        Eigen::VectorXd::Constant(1, 2.0),
                        build_galerkin_system(basis, 0.05),
                        SolverConfig(FractionalOrder(0.5), 0.25, 0.05, TimeGrid(0.25 / ns, ns))};
    prob.Cop(0, 0) = 1.0;
    prob.xi0[0] = 0.3;
    prob.xi0[1] = -0.1;
    return prob;
  };
  {
    ControlProblem prob = make_prob();
    Eigen::MatrixXd w_star(ns, 1);
    for (int j = 0; j < ns; ++j)
      w_star(j, 0) = 0.8 * std::sin(2.0 * pi * prob.cfg.time.t(j) / 0.25);
    prob.zeta = solution_map(w_star, prob).xi;
    MinimizeOptions opts;
    opts.max_iters = 400;
    opts.tol = 1e-10;
    const auto log = minimize(prob, Eigen::MatrixXd::Zero(ns, 1), opts);
    const double ratio = log.back().J / log.front().J;
    out.push_back(make("control.recovery_objective", ratio <= 1e-4, ratio,
                       "J_final / J_start on the recovery fixture"));
    const double trk0 = tracking_error(solution_map(Eigen::MatrixXd::Zero(ns, 1), prob), prob);
    const double trkf = tracking_error(solution_map(log.back().w, prob), prob);
    out.push_back(make("control.recovery_tracking", trk0 >= 10.0 * trkf, trk0 / trkf,
                       "tracking-error reduction factor"));
    bool mono = true, feas = true;
    for (std::size_t i = 0; i < log.size(); ++i) {
      if (i > 0) mono = mono && log[i].J <= log[i - 1].J + 1e-15;
      feas = feas && (log[i].w.array() >= -2.0 - 1e-14).all() &&
             (log[i].w.array() <= 2.0 + 1e-14).all();
    }
    out.push_back(make("control.monotone_descent", mono, mono ? 1.0 : 0.0,
                       "J nonincreasing across accepted iterates"));
    out.push_back(make("control.box_feasibility", feas, feas ? 1.0 : 0.0,
                       "every iterate inside the admissible box"));
  }
  {
    ControlProblem prob = make_prob();
    prob.zeta = solution_map(Eigen::MatrixXd::Zero(ns, 1), prob).xi;
    MinimizeOptions opts;
    const auto log = minimize(prob, Eigen::MatrixXd::Zero(ns, 1), opts);
    out.push_back(make("control.stationary_at_optimum",
                       log.size() == 1 && log.front().J == 0.0, log.front().grad_norm,
                       "projected-gradient norm at the already-optimal start"));
  }
  {
    ControlProblem prob = make_prob();
    const Trajectory base = solution_map(Eigen::MatrixXd::Zero(ns, 1), prob);
    Eigen::MatrixXd pert = Eigen::MatrixXd::Zero(ns + 1, 4);
    pert.col(2).setConstant(0.2);
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    double lastgap = 0.0;
    for (int k : {1, 2, 4, 8}) {
      ControlProblem p = make_prob();
      p.f_base += pert / static_cast<double>(k);
      lastgap = (solution_map(Eigen::MatrixXd::Zero(ns, 1), p).xi.row(ns) - base.xi.row(ns)).norm();
      monotone = monotone && lastgap < prev;
      prev = lastgap;
    }
    out.push_back(make("control.solution_map_stability", monotone, lastgap,
                       "state gap at T decreases as the forcing perturbation shrinks"));
  }
}

}  // namespace

CheckResult caputo_power_rule_check(const WeightProvider& weights) {
  const int N = 512;
  const FractionalOrder half(0.5);
  const double dt = 1.0 / N;
  const Eigen::VectorXd b = weights(half, N);
  // D^0.5 t at t=1 via the supplied weights
  double acc = 0.0;
  for (int j = 0; j < N; ++j) acc += b[j] * dt;  // increments of xi(t)=t are dt
  const double val = std::pow(dt, -0.5) / std::tgamma(1.5) * acc;
  const double err = std::abs(val - 1.1283791670955126);
  return CheckResult{"fracops.caputo_power_rule_t", err < 1e-12, err,
                     "|D^0.5 t - 1/Gamma(1.5)| at t=1 (weights injectable)"};
}

std::vector<CheckResult> run_verify_checks(const std::string& filter) {
  using ModuleFn = void (*)(std::vector<CheckResult>&);
  const std::pair<const char*, ModuleFn> modules[] = {{"fracops", fracops_checks},
                                                      {"wdomain", wdomain_checks},
                                                      {"spectral", spectral_checks},
                                                      {"solver", solver_checks},
                                                      {"control", control_checks}};
  auto names_module = [&](const char* name) {
    return filter.find(name) != std::string::npos || std::string(name).find(filter) == 0;
  };
  bool module_filter = false;
  for (const auto& [name, fn] : modules) module_filter = module_filter || names_module(name);
  std::vector<CheckResult> all;
  for (const auto& [name, fn] : modules) {
    // a filter naming a module skips the others, so `--filter fracops` stays cheap
    if (!filter.empty() && module_filter && !names_module(name)) continue;
    fn(all);
  }
  if (filter.empty()) return all;
  std::vector<CheckResult> kept;
  for (auto& c : all)
    if (c.name.find(filter) != std::string::npos) kept.push_back(std::move(c));
  return kept;
}

}  // namespace gnse
