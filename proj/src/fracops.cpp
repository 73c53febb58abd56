#include "gnse/fracops.hpp"

#include <cmath>
#include <limits>

namespace gnse {

double kernel_eval(FractionalOrder order, double t) {
  if (!(t > 0.0))
    throw std::domain_error("kernel_eval: t must be positive (kernel singular at 0)");
  const double a = order.value();
  return std::pow(t, a - 1.0) / std::tgamma(a);
}

namespace {

// Exact moments of tau^(beta-1)/Gamma(beta) over [a, b], 0 <= a < b:
//   M0 = int tau^(beta-1), M1 = int tau^beta   (Gamma factor applied by caller).
inline void kernel_moments(double beta, double a, double b, double& M0, double& M1) {
  M0 = (std::pow(b, beta) - std::pow(a, beta)) / beta;
  M1 = (std::pow(b, beta + 1.0) - std::pow(a, beta + 1.0)) / (beta + 1.0);
}

}  // namespace

double rl_integral_left(FractionalOrder order, const SampledFunction& f, int n) {
  if (n < 0 || n > f.grid.n_steps)
    throw std::invalid_argument("rl_integral_left: step index out of range");
  if (n == 0) return 0.0;
  const double a = order.value();
  const double dt = f.grid.dt;
  const double ga = std::tgamma(a);
  double total = 0.0;
  // s in [t_j, t_{j+1}] maps to tau = t_n - s in [(n-j-1)dt, (n-j)dt];
  // f(s) = f_j + slope*(s - t_j) with s = t_n - tau.
  for (int j = 0; j < n; ++j) {
    const double lo = (n - j - 1) * dt;
    const double hi = (n - j) * dt;
    double M0, M1;
    kernel_moments(a, lo, hi, M0, M1);
    const double slope = (f.values[j + 1] - f.values[j]) / dt;
    total += (f.values[j] + slope * hi) * M0 - slope * M1;
  }
  return total / ga;
}

double right_rl_integral_at(FractionalOrder beta, const SampledFunction& psi, double t) {
  const double T = psi.grid.horizon();
  if (t < 0.0 || t > T)
    throw std::invalid_argument("right_rl_integral_at: t outside [0, T]");
  const double b = beta.value();
  const double dt = psi.grid.dt;
  const double gb = std::tgamma(b);
  double total = 0.0;
  for (int j = 0; j < psi.grid.n_steps; ++j) {
    const double sa = j * dt;
    const double sb = (j + 1) * dt;
    const double lo = std::max(sa, t);
    if (sb <= lo) continue;
    double M0, M1;
    kernel_moments(b, lo - t, sb - t, M0, M1);
    const double slope = (psi.values[j + 1] - psi.values[j]) / dt;
    total += (psi.values[j] + slope * (t - sa)) * M0 + slope * M1;
  }
  return total / gb;
}

double rl_derivative_right(FractionalOrder order, const SampledFunction& psi, int n) {
  const int N = psi.grid.n_steps;
  if (n < 0 || n >= N)
    throw std::domain_error("rl_derivative_right: n = n_steps has no one-sided stencil");
  const double a = order.value();
  const double dt = psi.grid.dt;
  if (a == 1.0) {
    // order-1 inner integral is the identity; the derivative reduces to -psi'.
    return -(psi.values[n + 1] - psi.values[n]) / dt;
  }
  const FractionalOrder beta(1.0 - a);
  const double t = n * dt;
  if (n == 0) {
    const double g0 = right_rl_integral_at(beta, psi, 0.0);
    const double gh = right_rl_integral_at(beta, psi, 0.5 * dt);
    return -(gh - g0) / (0.5 * dt);
  }
  const double gm = right_rl_integral_at(beta, psi, t - 0.5 * dt);
  const double gp = right_rl_integral_at(beta, psi, t + 0.5 * dt);
  return -(gp - gm) / dt;
}

Eigen::VectorXd l1_weights(FractionalOrder order, int n) {
  if (n < 1) throw std::invalid_argument("l1_weights: n must be >= 1");
  const double e = 1.0 - order.value();
  Eigen::VectorXd b(n);
  b[0] = 1.0;  // 0^e taken as 0 for every admissible alpha
  for (int j = 1; j < n; ++j) b[j] = std::pow(j + 1.0, e) - std::pow(static_cast<double>(j), e);
  return b;
}

double caputo_l1_apply(FractionalOrder order, const SampledFunction& history, int n) {
  if (n < 1) throw std::domain_error("caputo_l1_apply: n must be >= 1");
  if (n > history.grid.n_steps)
    throw std::invalid_argument("caputo_l1_apply: history shorter than requested step");
  return caputo_l1_apply(order, history.values, history.grid.dt, n)[0];
}

Eigen::VectorXd caputo_l1_apply(FractionalOrder order,
                                const Eigen::Ref<const Eigen::MatrixXd>& history, double dt,
                                int n) {
  if (n < 1) throw std::domain_error("caputo_l1_apply: n must be >= 1");
  if (history.rows() < n + 1)
    throw std::invalid_argument("caputo_l1_apply: history shorter than requested step");
  const double a = order.value();
  const Eigen::VectorXd b = l1_weights(order, n);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(history.cols());
  for (int j = 0; j < n; ++j)  // fixed index order keeps the sum bit-stable
    acc += b[j] * (history.row(n - j) - history.row(n - j - 1)).transpose();
  return std::pow(dt, -a) / std::tgamma(2.0 - a) * acc;
}

double mittag_leffler(FractionalOrder order, double z) {
  if (std::abs(z) > 50.0)
    throw std::out_of_range("mittag_leffler: |z| > 50 is outside the series window");
  const double a = order.value();
  const double az = std::abs(z);
  if (az == 0.0) return 1.0;
  long double sum = 1.0L;  // k = 0 term
  long double comp = 0.0L;
  double prev_mag = 1.0;
  constexpr int kMaxTerms = 200000;
  for (int k = 1; k < kMaxTerms; ++k) {
    const double mag = std::exp(k * std::log(az) - std::lgamma(a * k + 1.0));
    const double term = (z < 0.0 && (k & 1)) ? -mag : mag;
    const long double y = static_cast<long double>(term) - comp;
    const long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (!std::isfinite(static_cast<double>(sum)))
      throw std::runtime_error("mittag_leffler: series left double range");
    const double ratio = mag / prev_mag;
    if (ratio < 1.0) {
      const double tail = mag * ratio / (1.0 - ratio);
      if (tail <= 1e-12 * std::max(1.0, std::abs(static_cast<double>(sum)))) break;
    }
    prev_mag = mag;
  }
  return static_cast<double>(sum);
}

double gronwall_bound(FractionalOrder gamma, double v0, const SampledFunction& c2, int n) {
  if (v0 < 0.0) throw std::invalid_argument("gronwall_bound: v0 must be nonnegative");
  if ((c2.values.array() < 0.0).any())
    throw std::invalid_argument("gronwall_bound: c2 samples must be nonnegative");
  return v0 + rl_integral_left(gamma, c2, n);
}

double ibp_residual(FractionalOrder order, const SampledFunction& u, const SampledFunction& psi) {
  if (!u.grid.same_as(psi.grid))
    throw std::invalid_argument("ibp_residual: u and psi must share the grid");
  const int N = u.grid.n_steps;
  const double dt = u.grid.dt;
  const double psi_scale = psi.values.cwiseAbs().maxCoeff();
  if (std::abs(psi.values[N]) > 1e-12 * std::max(1.0, psi_scale))
    throw std::invalid_argument("ibp_residual: psi(T) must vanish");
  const double a = order.value();

  if (a == 1.0) {
    // Classical identity; rectangle rules are matched so the sum telescopes.
    double term1 = 0.0, term2 = 0.0;
    for (int n = 1; n <= N; ++n) term1 += (u.values[n] - u.values[n - 1]) * psi.values[n];
    for (int n = 0; n < N; ++n) term2 -= u.values[n] * (psi.values[n + 1] - psi.values[n]);
    return std::abs(term1 - term2 + u.values[0] * psi.values[0]);
  }

  // D^alpha u at grid points; the limit at t = 0 vanishes for alpha < 1.
  Eigen::VectorXd d = Eigen::VectorXd::Zero(N + 1);
  for (int n = 1; n <= N; ++n) d[n] = caputo_l1_apply(order, u, n);
  // Right RL derivative of psi; it tends to 0 at T since psi(T) = 0.
  Eigen::VectorXd r = Eigen::VectorXd::Zero(N + 1);
  for (int n = 0; n < N; ++n) r[n] = rl_derivative_right(order, psi, n);

  auto trapz = [&](const Eigen::VectorXd& f) {
    return dt * (f.sum() - 0.5 * (f[0] + f[N]));
  };
  const double term1 = trapz(d.cwiseProduct(psi.values));
  const double term2 = trapz(u.values.cwiseProduct(r));
  const double term3 =
      u.values[0] * right_rl_integral_at(FractionalOrder(1.0 - a), psi, 0.0);
  return std::abs(term1 - term2 + term3);
}

}  // namespace gnse
