#pragma once

// Fractional-calculus primitives on uniform time grids:
// Riemann-Liouville kernel and integrals, Caputo derivative via the L1
// scheme, a Mittag-Leffler series evaluator, the fractional Gronwall
// bound, and the integration-by-parts residual.
//
// All quadratures are product-integration rules: the sampled function is
// taken piecewise linear and the kernel moments are integrated exactly,
// so the kernel singularity at zero needs no special casing.

#include <Eigen/Core>

#include <stdexcept>

namespace gnse {

// Caputo/RL order alpha, restricted to (0, 1].
class FractionalOrder {
 public:
  explicit FractionalOrder(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0) || alpha > 1.0)
      throw std::invalid_argument("FractionalOrder: alpha must lie in (0,1], got " +
                                  std::to_string(alpha));
  }
  double value() const { return alpha_; }

 private:
  double alpha_;
};

// Uniform grid t_j = j*dt, j = 0..n_steps.
struct TimeGrid {
  double dt{};
  int n_steps{};

  TimeGrid(double dt_, int n_steps_) : dt(dt_), n_steps(n_steps_) {
    if (!(dt > 0.0) || n_steps < 1)
      throw std::invalid_argument("TimeGrid: need dt > 0 and n_steps >= 1");
  }
  double horizon() const { return dt * n_steps; }
  double t(int j) const { return dt * j; }
  int n_samples() const { return n_steps + 1; }
  bool same_as(const TimeGrid& o) const { return n_steps == o.n_steps && dt == o.dt; }
};

// Scalar function sampled on a TimeGrid; values.size() == n_steps+1, all finite.
struct SampledFunction {
  TimeGrid grid;
  Eigen::VectorXd values;

  SampledFunction(TimeGrid g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.n_samples())
      throw std::invalid_argument("SampledFunction: length mismatch with grid");
    if (!values.allFinite())
      throw std::invalid_argument("SampledFunction: values must be finite");
  }

  template <class F>
  static SampledFunction from(const TimeGrid& g, F&& f) {
    Eigen::VectorXd v(g.n_samples());
    for (int j = 0; j < g.n_samples(); ++j) v[j] = f(g.t(j));
    return SampledFunction(g, std::move(v));
  }
};

// k_alpha(t) = t^(alpha-1) / Gamma(alpha), t > 0.
double kernel_eval(FractionalOrder order, double t);

// Left RL integral  int_0^{t_n} k_alpha(t_n - s) f(s) ds  (n = 0 gives 0).
double rl_integral_left(FractionalOrder order, const SampledFunction& f, int n);

// Right RL integral  int_t^T k_beta(s - t) psi(s) ds  at an arbitrary t in [0, T].
// The |s-t| ordering keeps the kernel argument positive.
double right_rl_integral_at(FractionalOrder beta, const SampledFunction& psi, double t);

// Right RL derivative  -d/dt int_t^T k_{1-alpha}(s-t) psi(s) ds  at t_n,
// by centered differencing of the inner integral on a half-step stagger
// (one-sided at n = 0).  n = n_steps is rejected.
double rl_derivative_right(FractionalOrder order, const SampledFunction& psi, int n);

// L1 weights b_j = (j+1)^{1-alpha} - j^{1-alpha}, j = 0..n-1.  b_0 = 1 for every
// alpha; the sequence is positive and strictly decreasing for alpha < 1, and
// collapses to (1, 0, 0, ...) at alpha = 1.
Eigen::VectorXd l1_weights(FractionalOrder order, int n);

// Caputo derivative at t_n via the L1 scheme:
//   (dt^{-alpha} / Gamma(2-alpha)) * sum_{j=0}^{n-1} b_j (xi^{n-j} - xi^{n-j-1}).
// Equals the backward difference exactly at alpha = 1.  Requires n >= 1.
double caputo_l1_apply(FractionalOrder order, const SampledFunction& history, int n);

// Vector-valued variant; history rows are xi^0 .. (at least) xi^n.
Eigen::VectorXd caputo_l1_apply(FractionalOrder order, const Eigen::Ref<const Eigen::MatrixXd>& history,
                                double dt, int n);

// Mittag-Leffler E_alpha(z) = sum_k z^k / Gamma(alpha k + 1), truncated when the
// geometric tail bound drops below 1e-12 * max(1, |sum|).  Supported window
// |z| <= 50; outside it an unsupported-range error is thrown.
double mittag_leffler(FractionalOrder order, double z);

// Fractional Gronwall bound in source form:
//   v0 + (1/Gamma(gamma)) int_0^{t_n} (t_n - s)^{gamma-1} c2(s) ds.
// c2 must be nonnegative.
double gronwall_bound(FractionalOrder gamma, double v0, const SampledFunction& c2, int n);

// Residual of the fractional integration-by-parts identity
//   int_0^T (D^alpha u) psi dt  =  int_0^T u (right-RL-derivative psi) dt
//                                  - u(0) * (right RL integral of psi of order 1-alpha at 0),
// assembled from the discrete operators above.  psi must vanish at T.
double ibp_residual(FractionalOrder order, const SampledFunction& u, const SampledFunction& psi);

}  // namespace gnse
