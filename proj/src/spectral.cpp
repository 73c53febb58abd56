#include "gnse/spectral.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace gnse {

namespace {

constexpr int kDenseCutoff = 1500;  // reduced dims above this take the partial path

int pidx(int n, int i, int j) { return ((i % n + n) % n) * n + ((j % n + n) % n); }

Eigen::VectorXd field_to_vec(const VelocityField& u) {
  const int n = u.n();
  Eigen::VectorXd v(2 * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      v[i * n + j] = u.u1(i, j);
      v[n * n + i * n + j] = u.u2(i, j);
    }
  return v;
}

VelocityField vec_to_field(const Eigen::Ref<const Eigen::VectorXd>& v, int n) {
  Eigen::ArrayXXd a(n, n), b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a(i, j) = v[i * n + j];
      b(i, j) = v[n * n + i * n + j];
    }
  return VelocityField(std::move(a), std::move(b));
}

// Stream-function parameterization of the discrete g-divergence-free,
// zero-g-mean subspace: u = (-Dyc psi, Dxc psi) / g.  The four +-1 sign
// patterns are the kernel of the map; dropping the psi unknowns at
// (0,0),(1,0),(0,1),(1,1) selects a complement (the pattern values at those
// four points form a Hadamard matrix).  The six checkerboard velocity modes
// this leaves out carry eigenvalues ~ 8/h^2, far above any requested window.
SpMat curl_over_g_map(const WeightedGrid& grid, std::vector<int>& kept) {
  const int n = grid.n();
  const int N = n * n;
  const double h = grid.h();
  const Eigen::ArrayXXd& g = grid.g();

  std::vector<int> col_of(N, -1);
  kept.clear();
  kept.reserve(N - 4);
  for (int p = 0; p < N; ++p) {
    if (p == pidx(n, 0, 0) || p == pidx(n, 1, 0) || p == pidx(n, 0, 1) || p == pidx(n, 1, 1))
      continue;
    col_of[p] = static_cast<int>(kept.size());
    kept.push_back(p);
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(8 * N);
  for (int qi = 0; qi < n; ++qi)
    for (int qj = 0; qj < n; ++qj) {
      const int c = col_of[pidx(n, qi, qj)];
      if (c < 0) continue;
      // u1 = -Dyc(psi)/g
      trips.emplace_back(pidx(n, qi, qj - 1), c, -1.0 / (2.0 * h * g(qi, (qj - 1 + n) % n)));
      trips.emplace_back(pidx(n, qi, qj + 1), c, 1.0 / (2.0 * h * g(qi, (qj + 1) % n)));
      // u2 = Dxc(psi)/g
      trips.emplace_back(N + pidx(n, qi - 1, qj), c, 1.0 / (2.0 * h * g((qi - 1 + n) % n, qj)));
      trips.emplace_back(N + pidx(n, qi + 1, qj), c, -1.0 / (2.0 * h * g((qi + 1) % n, qj)));
    }
  SpMat C(2 * N, static_cast<int>(kept.size()));
  C.setFromTriplets(trips.begin(), trips.end());
  return C;
}

// ---- tridiagonal partial eigensolve (Sturm bisection + inverse iteration) ----

int sturm_count(const Eigen::VectorXd& d, const Eigen::VectorXd& e, double x, double pivmin) {
  const int K = static_cast<int>(d.size());
  int cnt = 0;
  double q = d[0] - x;
  if (q < 0) ++cnt;
  for (int i = 1; i < K; ++i) {
    if (std::abs(q) < pivmin) q = (q < 0 ? -pivmin : pivmin);
    q = d[i] - x - e[i - 1] * e[i - 1] / q;
    if (q < 0) ++cnt;
  }
  return cnt;
}

Eigen::VectorXd bisect_smallest(const Eigen::VectorXd& d, const Eigen::VectorXd& e, int m) {
  const int K = static_cast<int>(d.size());
  double lo = d[0], hi = d[0];
  for (int i = 0; i < K; ++i) {
    const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i < K - 1 ? std::abs(e[i]) : 0.0);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  const double pivmin = 1e-3 * std::numeric_limits<double>::min() +
                        std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi));
  Eigen::VectorXd lam(m);
  for (int k = 0; k < m; ++k) {
    double a = lo, b = hi;
    for (int it = 0; it < 120 && (b - a) > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
      const double mid = 0.5 * (a + b);
      if (sturm_count(d, e, mid, pivmin) >= k + 1)
        b = mid;
      else
        a = mid;
    }
    lam[k] = 0.5 * (a + b);
  }
  return lam;
}

// (T - mu I) x = b by tridiagonal LU with partial pivoting; tiny pivots are
// bumped so shifts at an exact eigenvalue stay usable.
void shifted_tridiag_solve(const Eigen::VectorXd& d, const Eigen::VectorXd& e, double mu,
                           Eigen::VectorXd& x) {
  const int K = static_cast<int>(d.size());
  Eigen::VectorXd dd = d.array() - mu;
  Eigen::VectorXd dl = e, du = e, du2 = Eigen::VectorXd::Zero(K);
  std::vector<int> swapped(K, 0);
  const double tiny = std::numeric_limits<double>::epsilon() *
                      (d.cwiseAbs().maxCoeff() + e.cwiseAbs().maxCoeff() + std::abs(mu));
  for (int i = 0; i < K - 1; ++i) {
    if (std::abs(dd[i]) >= std::abs(dl[i])) {
      if (std::abs(dd[i]) < tiny) dd[i] = (dd[i] < 0 ? -tiny : tiny);
      const double f = dl[i] / dd[i];
      dl[i] = f;
      dd[i + 1] -= f * du[i];
    } else {
      swapped[i] = 1;
      const double f = dd[i] / dl[i];
      dd[i] = dl[i];
      dl[i] = f;
      const double tmp = du[i];
      du[i] = dd[i + 1];
      dd[i + 1] = tmp - f * dd[i + 1];
      if (i < K - 2) {
        du2[i] = du[i + 1];
        du[i + 1] = -f * du[i + 1];
      }
    }
    // forward eliminate rhs
    if (swapped[i]) std::swap(x[i], x[i + 1]);
    x[i + 1] -= dl[i] * x[i];
  }
  if (std::abs(dd[K - 1]) < tiny) dd[K - 1] = (dd[K - 1] < 0 ? -tiny : tiny);
  // back substitution
  x[K - 1] /= dd[K - 1];
  if (K > 1) x[K - 2] = (x[K - 2] - du[K - 2] * x[K - 1]) / dd[K - 2];
  for (int i = K - 3; i >= 0; --i)
    x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / dd[i];
}

// Eigenvectors of the tridiagonal for precomputed eigenvalues; vectors inside
// a cluster are re-orthogonalized each sweep.
Eigen::MatrixXd tridiag_eigenvectors(const Eigen::VectorXd& d, const Eigen::VectorXd& e,
                                     const Eigen::VectorXd& lam) {
  const int K = static_cast<int>(d.size());
  const int m = static_cast<int>(lam.size());
  const double scale = d.cwiseAbs().maxCoeff() + e.cwiseAbs().maxCoeff();
  Eigen::MatrixXd Y(K, m);
  std::mt19937 rng(20240517u);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  int cluster_start = 0;
  for (int k = 0; k < m; ++k) {
    if (k > 0 && std::abs(lam[k] - lam[k - 1]) > 1e-7 * std::max(1.0, std::abs(lam[k])))
      cluster_start = k;
    Eigen::VectorXd x(K);
    for (int i = 0; i < K; ++i) x[i] = unif(rng);
    for (int sweep = 0; sweep < 5; ++sweep) {
      for (int j = cluster_start; j < k; ++j) x -= Y.col(j).dot(x) * Y.col(j);
      shifted_tridiag_solve(d, e, lam[k], x);
      x.normalize();
    }
    for (int j = cluster_start; j < k; ++j) x -= Y.col(j).dot(x) * Y.col(j);
    x.normalize();
    Y.col(k) = x;
  }
  return Y;
}

}  // namespace

GStokesOperators assemble_gstokes(const WeightedGrid& grid) {
  const int n = grid.n();
  const int N = n * n;
  const double h = grid.h();
  const Eigen::ArrayXXd& g = grid.g();

  GStokesOperators ops;
  // Mg
  {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(2 * N);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double v = g(i, j) * h * h;
        t.emplace_back(pidx(n, i, j), pidx(n, i, j), v);
        t.emplace_back(N + pidx(n, i, j), N + pidx(n, i, j), v);
      }
    ops.Mg.resize(2 * N, 2 * N);
    ops.Mg.setFromTriplets(t.begin(), t.end());
  }
  // Kg: link Laplacian with midpoint-averaged g, per component
  {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(16 * N);
    for (int comp = 0; comp < 2; ++comp) {
      const int off = comp * N;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const int p = pidx(n, i, j);
          const int qx = pidx(n, i + 1, j);
          const int qy = pidx(n, i, j + 1);
          const double gx = 0.5 * (g(i, j) + g((i + 1) % n, j));
          const double gy = 0.5 * (g(i, j) + g(i, (j + 1) % n));
          t.emplace_back(off + p, off + p, gx + gy);
          t.emplace_back(off + qx, off + qx, gx);
          t.emplace_back(off + qy, off + qy, gy);
          t.emplace_back(off + p, off + qx, -gx);
          t.emplace_back(off + qx, off + p, -gx);
          t.emplace_back(off + p, off + qy, -gy);
          t.emplace_back(off + qy, off + p, -gy);
        }
    }
    ops.Kg.resize(2 * N, 2 * N);
    ops.Kg.setFromTriplets(t.begin(), t.end());
  }
  // Dg: centered divergence of (g u1, g u2)
  {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(4 * N);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const int p = pidx(n, i, j);
        t.emplace_back(p, pidx(n, i + 1, j), g((i + 1) % n, j) / (2.0 * h));
        t.emplace_back(p, pidx(n, i - 1, j), -g((i - 1 + n) % n, j) / (2.0 * h));
        t.emplace_back(p, N + pidx(n, i, j + 1), g(i, (j + 1) % n) / (2.0 * h));
        t.emplace_back(p, N + pidx(n, i, j - 1), -g(i, (j - 1 + n) % n) / (2.0 * h));
      }
    ops.Dg.resize(N, 2 * N);
    ops.Dg.setFromTriplets(t.begin(), t.end());
  }
  return ops;
}

GStokesBasis eigenbasis(const WeightedGrid& grid, int m) {
  const int n = grid.n();
  const int N = n * n;
  const int K = N - 4;
  if (m < 1 || m > K)
    throw std::invalid_argument("eigenbasis: m must lie in [1, n^2-4]");

  GStokesOperators ops = assemble_gstokes(grid);
  std::vector<int> kept;
  const SpMat C = curl_over_g_map(grid, kept);
  const SpMat Ct = SpMat(C.transpose());
  const SpMat KC = ops.Kg * C;
  const SpMat MC = ops.Mg * C;
  SpMat A = Ct * KC;
  SpMat B = Ct * MC;

  Eigen::MatrixXd Z;  // reduced eigenvectors, B-orthonormal columns
  if (K <= kDenseCutoff) {
    const Eigen::MatrixXd Ad(A), Bd(B);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ad, Bd);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("eigenbasis: dense generalized eigensolver failed");
    Z = es.eigenvectors().leftCols(m);
  } else {
    Eigen::SimplicialLLT<SpMat> llt(B);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("eigenbasis: Cholesky of the reduced mass form failed");
    const SpMat L = llt.matrixL();
    const auto& P = llt.permutationP();

    Eigen::MatrixXd At = Eigen::MatrixXd(A);
    At = P * At;
    At = At * P.transpose();
    L.triangularView<Eigen::Lower>().solveInPlace(At);
    At.transposeInPlace();
    L.triangularView<Eigen::Lower>().solveInPlace(At);  // At = L^-1 (PAP^T) L^-T

    Eigen::Tridiagonalization<Eigen::MatrixXd> tri(At);
    const Eigen::VectorXd d = tri.diagonal();
    const Eigen::VectorXd e = tri.subDiagonal();
    const Eigen::VectorXd lam = bisect_smallest(d, e, m);
    Eigen::MatrixXd Y = tridiag_eigenvectors(d, e, lam);
    Eigen::MatrixXd Q = tri.matrixQ() * Y;
    L.adjoint().triangularView<Eigen::Upper>().solveInPlace(Q);
    Z = P.transpose() * Q;

    // residual self-check against the sparse pencil
    for (int k = 0; k < m; ++k) {
      const Eigen::VectorXd Az = A * Z.col(k);
      const Eigen::VectorXd Bz = B * Z.col(k);
      const double res = (Az - lam[k] * Bz).norm();
      if (!(res <= 1e-6 * (Az.norm() + std::abs(lam[k]) * Bz.norm()) + 1e-12))
        throw std::runtime_error("eigenbasis: partial eigensolve residual check failed");
    }
  }

  GStokesBasis basis{grid, Eigen::VectorXd(m), {}};
  basis.modes.reserve(m);
  for (int k = 0; k < m; ++k) {
    const Eigen::VectorXd uvec = C * Z.col(k);
    basis.modes.push_back(vec_to_field(uvec, n));
  }
  // g-orthonormalize in eigensolver output order (ties inside clusters are
  // broken here), then report Rayleigh quotients as the eigenvalues.
  for (int k = 0; k < m; ++k) {
    VelocityField& phi = basis.modes[k];
    for (int l = 0; l < k; ++l) {
      const double c = weighted_inner(phi, basis.modes[l], grid);
      phi.u1 -= c * basis.modes[l].u1;
      phi.u2 -= c * basis.modes[l].u2;
    }
    const double nrm = weighted_norm(phi, grid);
    if (!(nrm > 0.0)) throw std::runtime_error("eigenbasis: degenerate mode after projection");
    phi.u1 /= nrm;
    phi.u2 /= nrm;
    basis.lambdas[k] = weighted_h1_inner(phi, phi, grid);
  }
  return basis;
}

double trilinear_bg(const VelocityField& u, const VelocityField& v, const VelocityField& w,
                    const WeightedGrid& grid) {
  if (u.n() != grid.n() || v.n() != grid.n() || w.n() != grid.n())
    throw std::invalid_argument("trilinear_bg: size mismatch");
  const double h = grid.h();
  const double h2 = h * h;
  auto q = [&](const VelocityField& a, const VelocityField& b, const VelocityField& c) {
    return h2 * (((a.u1 * dxc(b.u1, h) + a.u2 * dyc(b.u1, h)) * c.u1 +
                  (a.u1 * dxc(b.u2, h) + a.u2 * dyc(b.u2, h)) * c.u2) *
                 grid.g())
                    .sum();
  };
  return 0.5 * (q(u, v, w) - q(u, w, v));
}

namespace {

// Stacked per-mode matrices used by the batched convection assembly.
struct ModeMatrices {
  Eigen::MatrixXd Phi, DxPhi, DyPhi, GPhi;  // all 2N x m
};

ModeMatrices stack_modes(const GStokesBasis& basis) {
  const int n = basis.grid.n();
  const int N = n * n;
  const int m = basis.m();
  const double h = basis.grid.h();
  const double h2 = h * h;
  ModeMatrices M;
  M.Phi.resize(2 * N, m);
  M.DxPhi.resize(2 * N, m);
  M.DyPhi.resize(2 * N, m);
  M.GPhi.resize(2 * N, m);
  for (int k = 0; k < m; ++k) {
    const VelocityField& phi = basis.modes[k];
    M.Phi.col(k) = field_to_vec(phi);
    M.DxPhi.col(k) = field_to_vec(VelocityField(dxc(phi.u1, h), dxc(phi.u2, h)));
    M.DyPhi.col(k) = field_to_vec(VelocityField(dyc(phi.u1, h), dyc(phi.u2, h)));
    const VelocityField gphi(h2 * basis.grid.g() * phi.u1, h2 * basis.grid.g() * phi.u2);
    M.GPhi.col(k) = field_to_vec(gphi);
  }
  return M;
}

// q(a, phi_l, phi_k) for all (l, k) with a fixed advecting field a.
Eigen::MatrixXd advect_gram(const VelocityField& a, const ModeMatrices& M, int n) {
  const int N = n * n;
  Eigen::VectorXd a1(2 * N), a2(2 * N);
  const Eigen::VectorXd av = field_to_vec(a);
  a1 << av.head(N), av.head(N);
  a2 << av.tail(N), av.tail(N);
  const Eigen::MatrixXd Psi =
      M.DxPhi.array().colwise() * a1.array() + M.DyPhi.array().colwise() * a2.array();
  return Psi.transpose() * M.GPhi;  // (l', k) entries
}

}  // namespace

Eigen::MatrixXd cg_matrix(const GStokesBasis& basis) {
  const int m = basis.m();
  const ModeMatrices M = stack_modes(basis);
  const Eigen::MatrixXd Q = advect_gram(basis.grid.grad_g_over_g(), M, basis.grid.n());
  Eigen::MatrixXd Cmat(m, m);
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l) Cmat(k, l) = 0.5 * (Q(l, k) - Q(k, l));
  return Cmat;
}

ConvectionTensor convection_tensor(const GStokesBasis& basis) {
  const int m = basis.m();
  if (m > 64) throw std::length_error("convection_tensor: m > 64 exceeds the tensor budget");
  const ModeMatrices M = stack_modes(basis);
  std::vector<Eigen::MatrixXd> Q(m);
  for (int l = 0; l < m; ++l) Q[l] = advect_gram(basis.modes[l], M, basis.grid.n());
  ConvectionTensor T;
  T.Tk.assign(m, Eigen::MatrixXd(m, m));
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l)
      for (int lp = 0; lp < m; ++lp) T.Tk[k](l, lp) = 0.5 * (Q[l](lp, k) - Q[l](k, lp));
  return T;
}

Eigen::VectorXd ConvectionTensor::apply(const Eigen::Ref<const Eigen::VectorXd>& xi) const {
  Eigen::VectorXd out(m());
  for (int k = 0; k < m(); ++k) out[k] = xi.dot(Tk[k] * xi);
  return out;
}

GalerkinSystem build_galerkin_system(GStokesBasis basis, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("build_galerkin_system: nu must be positive");
  GalerkinSystem sys;
  sys.Lambda = basis.lambdas;
  sys.Cmat = cg_matrix(basis);
  sys.T = convection_tensor(basis);
  sys.nu = nu;
  sys.basis = std::move(basis);
  return sys;
}

GalerkinSystem truncate_system(const GalerkinSystem& sys, int m) {
  if (m < 1 || m > sys.m()) throw std::invalid_argument("truncate_system: bad mode count");
  GalerkinSystem out;
  out.basis.grid = sys.basis.grid;
  out.basis.lambdas = sys.basis.lambdas.head(m);
  out.basis.modes.assign(sys.basis.modes.begin(), sys.basis.modes.begin() + m);
  out.Lambda = sys.Lambda.head(m);
  out.Cmat = sys.Cmat.topLeftCorner(m, m);
  out.T.Tk.assign(m, Eigen::MatrixXd());
  for (int k = 0; k < m; ++k) out.T.Tk[k] = sys.T.Tk[k].topLeftCorner(m, m);
  out.nu = sys.nu;
  return out;
}

double measure_ladyzhenskaya(const WeightedGrid& grid, int samples, unsigned seed) {
  const int n = grid.n();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  using std::numbers::pi;
  auto random_smooth = [&]() {
    Eigen::ArrayXXd c1 = Eigen::ArrayXXd::Zero(n, n), c2 = c1;
    for (int k1 = 0; k1 <= 3; ++k1)
      for (int k2 = 0; k2 <= 3; ++k2) {
        const double a1 = unif(rng), b1 = unif(rng), a2 = unif(rng), b2 = unif(rng);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const double px = 2.0 * pi * k1 * i / n, py = 2.0 * pi * k2 * j / n;
            c1(i, j) += a1 * std::cos(px + py) + b1 * std::sin(px - py);
            c2(i, j) += a2 * std::cos(px - py) + b2 * std::sin(px + py);
          }
      }
    return VelocityField(std::move(c1), std::move(c2));
  };
  double cmax = 0.0;
  for (int s = 0; s < samples; ++s) {
    const VelocityField u = random_smooth(), v = random_smooth(), w = random_smooth();
    const double bn = std::abs(trilinear_bg(u, v, w, grid));
    const double den = std::sqrt(weighted_norm(u, grid)) *
                       std::sqrt(std::sqrt(weighted_h1_inner(u, u, grid))) *
                       std::sqrt(weighted_h1_inner(v, v, grid)) *
                       std::sqrt(weighted_norm(w, grid)) *
                       std::sqrt(std::sqrt(weighted_h1_inner(w, w, grid)));
    if (den > 1e-12) cmax = std::max(cmax, bn / den);
  }
  return cmax;
}

}  // namespace gnse
