#pragma once

// Discrete g-Stokes operator assembly, its eigenbasis (the Galerkin basis),
// the skew-symmetrized trilinear convection form b~_g, and the precomputed
// Galerkin system (eigenvalues, rotation matrix from C_g, convection tensor).
//
// Velocity degrees of freedom are stacked component-major: [u1; u2], each
// component in grid order p = i*n + j.

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <vector>

#include "gnse/wdomain.hpp"

namespace gnse {

using SpMat = Eigen::SparseMatrix<double>;

// Mg: weighted mass (diagonal, g h^2 per component).
// Kg: weighted stiffness realizing ((u,v))_g.
// Dg: weighted divergence, (Dg u)(p) = div(g u) at p.
struct GStokesOperators {
  SpMat Mg, Kg, Dg;
};

GStokesOperators assemble_gstokes(const WeightedGrid& grid);

// First m eigenpairs of the g-Stokes operator on the discretely
// g-divergence-free, zero-g-mean subspace; modes are g-orthonormal and the
// eigenvalues ascend with lambda_1 > 0.
struct GStokesBasis {
  WeightedGrid grid;
  Eigen::VectorXd lambdas;
  std::vector<VelocityField> modes;

  int m() const { return static_cast<int>(modes.size()); }
};

GStokesBasis eigenbasis(const WeightedGrid& grid, int m);

// Skew-symmetrized convection form
//   b~_g(u,v,w) = 1/2 [ q(u,v,w) - q(u,w,v) ],
//   q(u,v,w) = h^2 sum_x sum_{j,k} u_j (d_j v_k) w_k g,
// with centered differences.  b~_g(u,v,v) = 0 identically, for every u.
double trilinear_bg(const VelocityField& u, const VelocityField& v, const VelocityField& w,
                    const WeightedGrid& grid);

// Cmat[k,l] = b~_g(grad g / g, phi_l, phi_k); zero when g is constant and
// skew-symmetric by construction.
Eigen::MatrixXd cg_matrix(const GStokesBasis& basis);

// T[k](l,l') = b~_g(phi_l, phi_l', phi_k).  The cubic contraction
// sum T[k](l,l') xi_l xi_l' xi_k vanishes identically.
struct ConvectionTensor {
  std::vector<Eigen::MatrixXd> Tk;

  int m() const { return static_cast<int>(Tk.size()); }
  double entry(int k, int l, int lp) const { return Tk[k](l, lp); }
  // N(xi)_k = xi^T T[k] xi
  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& xi) const;
};

ConvectionTensor convection_tensor(const GStokesBasis& basis);

// Everything Eq.-(4.2)-shaped stepping needs, precomputed.
struct GalerkinSystem {
  GStokesBasis basis;
  Eigen::VectorXd Lambda;
  Eigen::MatrixXd Cmat;
  ConvectionTensor T;
  double nu = 0.0;

  int m() const { return static_cast<int>(Lambda.size()); }
};

GalerkinSystem build_galerkin_system(GStokesBasis basis, double nu);

// Truncation to the leading m modes (used by Galerkin-refinement studies).
GalerkinSystem truncate_system(const GalerkinSystem& sys, int m);

// Empirical constant of the Ladyzhenskaya-type bound
//   |b~_g(u,v,w)| <= c |u|^1/2 ||u||^1/2 ||v|| |w|^1/2 ||w||^1/2
// measured as the max ratio over `samples` random smooth field triples.
double measure_ladyzhenskaya(const WeightedGrid& grid, int samples, unsigned seed);

}  // namespace gnse
