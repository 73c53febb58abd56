#pragma once

// Periodic weighted domain on the unit torus [0,1)^2: the weight field g with
// its bounds, weighted inner products, the weighted divergence div(g u), the
// weighted Leray projection, and the H(g) smallness check.
//
// Discretization: n x n samples at x = i/n, y = j/n, second-order centered
// differences with all stencils wrapping.  The H1 form averages g to cell
// links so every assembled operator stays symmetric.

#include <Eigen/Core>

#include <optional>
#include <stdexcept>

namespace gnse {

// Two-component velocity sample field; u1(i,j), u2(i,j) at (x,y) = (i h, j h).
struct VelocityField {
  Eigen::ArrayXXd u1, u2;

  VelocityField() = default;
  VelocityField(Eigen::ArrayXXd a, Eigen::ArrayXXd b) : u1(std::move(a)), u2(std::move(b)) {
    if (u1.rows() != u1.cols() || u2.rows() != u2.cols() || u1.rows() != u2.rows())
      throw std::invalid_argument("VelocityField: components must be square and same size");
    if (!u1.allFinite() || !u2.allFinite())
      throw std::invalid_argument("VelocityField: entries must be finite");
  }
  static VelocityField zero(int n) {
    return VelocityField(Eigen::ArrayXXd::Zero(n, n), Eigen::ArrayXXd::Zero(n, n));
  }
  int n() const { return static_cast<int>(u1.rows()); }
};

struct ScalarField {
  Eigen::ArrayXXd v;

  ScalarField() = default;
  explicit ScalarField(Eigen::ArrayXXd a) : v(std::move(a)) {
    if (!v.allFinite()) throw std::invalid_argument("ScalarField: entries must be finite");
  }
  int n() const { return static_cast<int>(v.rows()); }
};

// Weight recipes accepted by build_weight.
struct WeightRecipe {
  enum class Kind { Constant, Sine, Tabulated };
  Kind kind;
  double c = 1.0;    // Constant: g = c
  double eps = 0.0;  // Sine: g = 1 + eps sin(2 pi x), |eps| < 1
  Eigen::ArrayXXd samples;

  static WeightRecipe constant(double c) {
    WeightRecipe r{Kind::Constant};
    r.c = c;
    return r;
  }
  static WeightRecipe sine(double eps) {
    WeightRecipe r{Kind::Sine};
    r.eps = eps;
    return r;
  }
  static WeightRecipe tabulated(Eigen::ArrayXXd samples) {
    WeightRecipe r{Kind::Tabulated};
    r.samples = std::move(samples);
    return r;
  }
};

// Grid plus weight field with derived bounds: 0 < m0 <= g <= M0, the sup norm
// of the discrete gradient (and the analytic one when the recipe provides it;
// the larger of the two is kept, which is conservative for H(g)).
class WeightedGrid {
 public:
  WeightedGrid() = default;  // empty sentinel; every operation checks sizes
  WeightedGrid(int n, Eigen::ArrayXXd g, std::optional<double> analytic_grad_sup = {});

  int n() const { return n_; }
  double h() const { return h_; }
  const Eigen::ArrayXXd& g() const { return g_; }
  double m0() const { return m0_; }
  double M0() const { return M0_; }
  double grad_g_sup() const { return grad_g_sup_; }
  const VelocityField& grad_g_over_g() const { return grad_g_over_g_; }

 private:
  int n_ = 0;
  double h_ = 0.0;
  Eigen::ArrayXXd g_;
  double m0_ = 0.0, M0_ = 0.0, grad_g_sup_ = 0.0;
  VelocityField grad_g_over_g_;
};

WeightedGrid build_weight(const WeightRecipe& recipe, int n);

// Centered periodic differences of a scalar sample field, (f(i+1)-f(i-1))/(2h).
Eigen::ArrayXXd dxc(const Eigen::ArrayXXd& f, double h);
Eigen::ArrayXXd dyc(const Eigen::ArrayXXd& f, double h);

// (u, v)_g = h^2 sum (u . v) g
double weighted_inner(const VelocityField& u, const VelocityField& v, const WeightedGrid& grid);

// ((u, v))_g with forward differences on links and link-midpoint averaged g.
double weighted_h1_inner(const VelocityField& u, const VelocityField& v, const WeightedGrid& grid);

double weighted_norm(const VelocityField& u, const WeightedGrid& grid);

// div(g u) by centered differences; mean is zero to rounding on the torus.
ScalarField div_g(const VelocityField& u, const WeightedGrid& grid);

// Weighted Leray projection: v = u - grad p with  div(g grad p) = div(g u)
// solved by deflated CG (relative residual 1e-12, mean and checkerboard
// components removed).  Output is g-divergence-free to ~1e-10 and
// g-orthogonal to discrete gradients.
VelocityField leray_project_g(const VelocityField& u, const WeightedGrid& grid);

struct HgReport {
  bool holds;
  double margin;           // 0.5 m0 sqrt(lambda1) - |grad g|_inf
  double nu_prime_factor;  // min of the two nu' factors
};

// Hypothesis H(g): |grad g|_inf < (1/2) m0 lambda1^(1/2).  The nu' factor is
// the conservative minimum of 1 - 2|grad g|/(m0 sqrt(l1)) and
// 1 - 2|grad g|^2/(l1 m0^2).
HgReport check_Hg(const WeightedGrid& grid, double lambda1);

}  // namespace gnse
