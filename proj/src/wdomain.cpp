#include "gnse/wdomain.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace gnse {

namespace {

Eigen::ArrayXXd shift_x(const Eigen::ArrayXXd& f, int s) {
  const int n = static_cast<int>(f.rows());
  Eigen::ArrayXXd out(n, n);
  for (int i = 0; i < n; ++i) out.row(i) = f.row(((i + s) % n + n) % n);
  return out;
}

Eigen::ArrayXXd shift_y(const Eigen::ArrayXXd& f, int s) {
  const int n = static_cast<int>(f.cols());
  Eigen::ArrayXXd out(n, n);
  for (int j = 0; j < n; ++j) out.col(j) = f.col(((j + s) % n + n) % n);
  return out;
}

}  // namespace

Eigen::ArrayXXd dxc(const Eigen::ArrayXXd& f, double h) {
  return (shift_x(f, 1) - shift_x(f, -1)) / (2.0 * h);
}

Eigen::ArrayXXd dyc(const Eigen::ArrayXXd& f, double h) {
  return (shift_y(f, 1) - shift_y(f, -1)) / (2.0 * h);
}

WeightedGrid::WeightedGrid(int n, Eigen::ArrayXXd g, std::optional<double> analytic_grad_sup)
    : n_(n), h_(1.0 / n), g_(std::move(g)) {
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("WeightedGrid: n must be even and >= 4");
  if (g_.rows() != n || g_.cols() != n)
    throw std::invalid_argument("WeightedGrid: weight field must be n x n");
  if (!g_.allFinite() || (g_ <= 0.0).any())
    throw std::invalid_argument("WeightedGrid: weight must be positive everywhere");
  m0_ = g_.minCoeff();
  M0_ = g_.maxCoeff();
  const Eigen::ArrayXXd gx = dxc(g_, h_);
  const Eigen::ArrayXXd gy = dyc(g_, h_);
  grad_g_sup_ = std::sqrt((gx.square() + gy.square()).maxCoeff());
  if (analytic_grad_sup) grad_g_sup_ = std::max(grad_g_sup_, *analytic_grad_sup);
  grad_g_over_g_ = VelocityField(gx / g_, gy / g_);
}

WeightedGrid build_weight(const WeightRecipe& recipe, int n) {
  using std::numbers::pi;
  switch (recipe.kind) {
    case WeightRecipe::Kind::Constant: {
      if (!(recipe.c > 0.0))
        throw std::invalid_argument("build_weight: constant weight must be positive");
      return WeightedGrid(n, Eigen::ArrayXXd::Constant(n, n, recipe.c), 0.0);
    }
    case WeightRecipe::Kind::Sine: {
      if (!(std::abs(recipe.eps) < 1.0))
        throw std::invalid_argument("build_weight: sine recipe needs |eps| < 1");
      Eigen::ArrayXXd g(n, n);
      for (int i = 0; i < n; ++i)
        g.row(i) = 1.0 + recipe.eps * std::sin(2.0 * pi * i / n);
      return WeightedGrid(n, std::move(g), 2.0 * pi * std::abs(recipe.eps));
    }
    case WeightRecipe::Kind::Tabulated:
      return WeightedGrid(n, recipe.samples);
  }
  throw std::invalid_argument("build_weight: unknown recipe");
}

double weighted_inner(const VelocityField& u, const VelocityField& v, const WeightedGrid& grid) {
  if (u.n() != grid.n() || v.n() != grid.n())
    throw std::invalid_argument("weighted_inner: size mismatch");
  const double h2 = grid.h() * grid.h();
  return h2 * ((u.u1 * v.u1 + u.u2 * v.u2) * grid.g()).sum();
}

double weighted_h1_inner(const VelocityField& u, const VelocityField& v, const WeightedGrid& grid) {
  if (u.n() != grid.n() || v.n() != grid.n())
    throw std::invalid_argument("weighted_h1_inner: size mismatch");
  const Eigen::ArrayXXd& g = grid.g();
  const Eigen::ArrayXXd gx_mid = 0.5 * (shift_x(g, 1) + g);
  const Eigen::ArrayXXd gy_mid = 0.5 * (shift_y(g, 1) + g);
  auto link_form = [&](const Eigen::ArrayXXd& a, const Eigen::ArrayXXd& b) {
    return ((shift_x(a, 1) - a) * (shift_x(b, 1) - b) * gx_mid).sum() +
           ((shift_y(a, 1) - a) * (shift_y(b, 1) - b) * gy_mid).sum();
  };
  // (du/h)(dv/h) g h^2 collapses to du dv g
  return link_form(u.u1, v.u1) + link_form(u.u2, v.u2);
}

double weighted_norm(const VelocityField& u, const WeightedGrid& grid) {
  return std::sqrt(std::max(0.0, weighted_inner(u, u, grid)));
}

ScalarField div_g(const VelocityField& u, const WeightedGrid& grid) {
  if (u.n() != grid.n()) throw std::invalid_argument("div_g: size mismatch");
  return ScalarField(dxc((grid.g() * u.u1).eval(), grid.h()) +
                     dyc((grid.g() * u.u2).eval(), grid.h()));
}

namespace {

// Wide-stencil weighted Laplacian  p -> -[Dxc(g Dxc p) + Dyc(g Dyc p)], SPD on
// the complement of the four +-1 sign patterns that centered differences
// cannot see.
Eigen::ArrayXXd wide_poisson_apply(const Eigen::ArrayXXd& p, const WeightedGrid& grid) {
  const double h = grid.h();
  return -(dxc((grid.g() * dxc(p, h)).eval(), h) + dyc((grid.g() * dyc(p, h)).eval(), h));
}

void deflate_patterns(Eigen::ArrayXXd& f) {
  const int n = static_cast<int>(f.rows());
  Eigen::ArrayXd sx(n), sy(n);
  for (int i = 0; i < n; ++i) sx[i] = (i % 2 == 0) ? 1.0 : -1.0;
  sy = sx;
  const double N = static_cast<double>(n) * n;
  Eigen::ArrayXXd cb1(n, n), cb2(n, n), cb3(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cb1(i, j) = sx[i];
      cb2(i, j) = sy[j];
      cb3(i, j) = sx[i] * sy[j];
    }
  f -= f.mean();
  f -= (f * cb1).sum() / N * cb1;
  f -= (f * cb2).sum() / N * cb2;
  f -= (f * cb3).sum() / N * cb3;
}

}  // namespace

VelocityField leray_project_g(const VelocityField& u, const WeightedGrid& grid) {
  if (u.n() != grid.n()) throw std::invalid_argument("leray_project_g: size mismatch");
  const int n = grid.n();
  const double h = grid.h();

  Eigen::ArrayXXd b = -div_g(u, grid).v;
  deflate_patterns(b);
  const double bnorm = std::sqrt(b.square().sum());
  Eigen::ArrayXXd p = Eigen::ArrayXXd::Zero(n, n);
  if (bnorm > 0.0) {
    const double tol = 1e-12 * bnorm;
    Eigen::ArrayXXd r = b;  // x0 = 0
    Eigen::ArrayXXd d = r;
    double rr = r.square().sum();
    const int max_iters = 10 * n * n + 500;
    int it = 0;
    for (; it < max_iters; ++it) {
      if (std::sqrt(rr) <= tol) break;
      Eigen::ArrayXXd Ad = wide_poisson_apply(d, grid);
      const double dAd = (d * Ad).sum();
      const double alpha = rr / dAd;
      p += alpha * d;
      r -= alpha * Ad;
      if ((it + 1) % 64 == 0) deflate_patterns(r);  // guard rounding drift
      const double rr_new = r.square().sum();
      d = r + (rr_new / rr) * d;
      rr = rr_new;
    }
    if (std::sqrt(rr) > tol) {
      std::ostringstream os;
      os << "leray_project_g: CG stalled, residual " << std::sqrt(rr) << " > tol " << tol
         << " after " << it << " iterations";
      throw std::runtime_error(os.str());
    }
  }
  return VelocityField(u.u1 - dxc(p, h), u.u2 - dyc(p, h));
}

HgReport check_Hg(const WeightedGrid& grid, double lambda1) {
  if (!(lambda1 > 0.0)) throw std::invalid_argument("check_Hg: lambda1 must be positive");
  const double gs = grid.grad_g_sup();
  const double m0 = grid.m0();
  const double sq = std::sqrt(lambda1);
  const double threshold = 0.5 * m0 * sq;
  const double f1 = 1.0 - 2.0 * gs / (m0 * sq);
  const double f2 = 1.0 - 2.0 * gs * gs / (lambda1 * m0 * m0);
  return HgReport{gs < threshold, threshold - gs, std::min(f1, f2)};
}

}  // namespace gnse
