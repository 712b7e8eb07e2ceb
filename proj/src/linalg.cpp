#include "ptk/linalg.hpp"

#include <lapacke.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace ptk {

void require_finite(const Matrix& M, const char* what) {
  if (!M.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
  }
}

bool is_symmetric(const Matrix& M, double tol) {
  if (M.rows() != M.cols()) return false;
  return (M - M.transpose()).norm() <= tol * (1.0 + M.norm());
}

Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

SymmetricEig symmetric_eig(const Matrix& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("symmetric_eig: non-square input");
  require_finite(M, "symmetric_eig");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(M));
  if (es.info() != Eigen::Success) throw std::runtime_error("symmetric_eig: factorization failed");
  const int n = static_cast<int>(M.rows());
  SymmetricEig out;
  out.eigenvalues = es.eigenvalues().reverse();
  out.eigenvectors.resize(n, n);
  for (int i = 0; i < n; ++i) out.eigenvectors.col(i) = es.eigenvectors().col(n - 1 - i);
  return out;
}

namespace {

// Eigenvalues of a real quasi-triangular matrix, walking 1x1/2x2 blocks.
std::vector<Complex> quasi_triangular_eigs(const Matrix& T) {
  const int n = static_cast<int>(T.rows());
  std::vector<Complex> ev(n);
  int i = 0;
  while (i < n) {
    if (i + 1 < n && T(i + 1, i) != 0.0) {
      const double a = T(i, i), b = T(i, i + 1), c = T(i + 1, i), d = T(i + 1, i + 1);
      const double tr = a + d, det = a * d - b * c;
      const double disc = tr * tr / 4.0 - det;
      if (disc < 0.0) {
        const double re = tr / 2.0, im = std::sqrt(-disc);
        ev[i] = Complex(re, im);
        ev[i + 1] = Complex(re, -im);
      } else {
        const double s = std::sqrt(disc);
        ev[i] = Complex(tr / 2.0 + s, 0.0);
        ev[i + 1] = Complex(tr / 2.0 - s, 0.0);
      }
      i += 2;
    } else {
      ev[i] = Complex(T(i, i), 0.0);
      i += 1;
    }
  }
  return ev;
}

// Moves the eigenvalues satisfying `pred` to the leading block of (T, Q),
// preserving the relative order of selected eigenvalues. Returns the number
// selected.
template <typename Pred>
int reorder_schur(Matrix& T, Matrix& Q, const Pred& pred) {
  const int n = static_cast<int>(T.rows());
  if (n == 0) return 0;
  auto ev = quasi_triangular_eigs(T);
  std::vector<lapack_logical> select(n);
  int count = 0;
  for (int i = 0; i < n; ++i) {
    select[i] = pred(ev[i]) ? 1 : 0;
    if (select[i]) ++count;
  }
  if (count == 0 || count == n) return count;
  std::vector<double> wr(n), wi(n), work(std::max(1, n * n));
  std::vector<lapack_int> iwork(std::max(1, n * n));
  lapack_int mdim = 0;
  double s = 0.0, sep = 0.0;
  lapack_int info = LAPACKE_dtrsen_work(
      LAPACK_COL_MAJOR, 'N', 'V', select.data(), n, T.data(), n, Q.data(), n, wr.data(),
      wi.data(), &mdim, &s, &sep, work.data(), static_cast<lapack_int>(work.size()),
      iwork.data(), static_cast<lapack_int>(iwork.size()));
  if (info < 0) throw std::runtime_error("ordered_schur: dtrsen invalid argument");
  // info == 1 means some swap was too ill-conditioned; the factorization is
  // still valid, so callers rely on residual checks downstream.
  return static_cast<int>(mdim);
}

}  // namespace

OrderedSchur ordered_schur(const Matrix& M, const SpectralRegion& region) {
  if (M.rows() != M.cols()) throw std::invalid_argument("ordered_schur: non-square input");
  require_finite(M, "ordered_schur");
  const int n = static_cast<int>(M.rows());
  OrderedSchur out;
  if (n == 0) {
    out.basis = Matrix(0, 0);
    out.quasi_triangular = Matrix(0, 0);
    return out;
  }
  Eigen::RealSchur<Matrix> schur(M);
  if (schur.info() != Eigen::Success) throw std::runtime_error("ordered_schur: Schur failed");
  Matrix T = schur.matrixT();
  Matrix Q = schur.matrixU();

  const int strict_count =
      reorder_schur(T, Q, [&](Complex z) { return region.contains_strict(z); });
  int count = strict_count;
  if (region.closed()) {
    // Second pass keeps the strict block leading (dtrsen preserves relative
    // order of selected eigenvalues) and appends the boundary ones.
    count = reorder_schur(T, Q, [&](Complex z) { return region.contains(z); });
  }
  out.basis = Q;
  out.quasi_triangular = T;
  out.in_region_count = count;
  out.eigenvalues = quasi_triangular_eigs(T);
  for (const auto& z : out.eigenvalues) {
    if (region.on_boundary(z)) out.boundary_flag = true;
  }
  return out;
}

namespace {

void check_resonance(const std::vector<Complex>& ea, const std::vector<Complex>& eb,
                     double scale, const char* what) {
  for (const auto& a : ea) {
    for (const auto& b : eb) {
      if (std::abs(a + b) <= 1e-10 * (1.0 + scale)) {
        throw SingularEquationError(std::string(what) + ": resonant spectra (lambda_i + lambda_j ~ 0)");
      }
    }
  }
}

}  // namespace

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
  if (A.rows() != A.cols() || Q.rows() != Q.cols() || A.rows() != Q.rows()) {
    throw std::invalid_argument("solve_lyapunov: dimension mismatch");
  }
  require_finite(A, "solve_lyapunov");
  require_finite(Q, "solve_lyapunov");
  const int d = static_cast<int>(A.rows());
  if (d == 0) return Matrix(0, 0);
  auto ev = eigenvalues_of(A);
  check_resonance(ev, ev, A.norm(), "solve_lyapunov");

  // vec(A^T Z + Z A) = (I (x) A^T + A^T (x) I) vec(Z) = -vec(Q)
  Matrix K = Matrix::Zero(d * d, d * d);
  for (int j = 0; j < d; ++j) {
    K.block(j * d, j * d, d, d) += A.transpose();
    for (int i = 0; i < d; ++i) {
      for (int k = 0; k < d; ++k) K(j * d + k, i * d + k) += A(i, j);
    }
  }
  Vector rhs(d * d);
  for (int j = 0; j < d; ++j) rhs.segment(j * d, d) = -Q.col(j);
  Vector z = K.colPivHouseholderQr().solve(rhs);
  Matrix Z(d, d);
  for (int j = 0; j < d; ++j) Z.col(j) = z.segment(j * d, d);
  Z = symmetrize(Z);
  const double residual = (A.transpose() * Z + Z * A + Q).norm();
  if (residual > 1e-9 * (1.0 + Q.norm())) {
    throw SingularEquationError("solve_lyapunov: residual check failed");
  }
  return Z;
}

Matrix solve_sylvester(const Matrix& A, const Matrix& B, const Matrix& C) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || C.rows() != A.rows() ||
      C.cols() != B.rows()) {
    throw std::invalid_argument("solve_sylvester: dimension mismatch");
  }
  require_finite(A, "solve_sylvester");
  require_finite(B, "solve_sylvester");
  require_finite(C, "solve_sylvester");
  const int p = static_cast<int>(A.rows());
  const int q = static_cast<int>(B.rows());
  if (p == 0 || q == 0) return Matrix::Zero(p, q);
  check_resonance(eigenvalues_of(A), eigenvalues_of(B), A.norm() + B.norm(), "solve_sylvester");

  // vec(AX + XB) = (I (x) A + B^T (x) I) vec(X) = vec(C)
  Matrix K = Matrix::Zero(p * q, p * q);
  for (int j = 0; j < q; ++j) {
    K.block(j * p, j * p, p, p) += A;
    for (int i = 0; i < q; ++i) {
      for (int k = 0; k < p; ++k) K(j * p + k, i * p + k) += B(i, j);
    }
  }
  Vector rhs(p * q);
  for (int j = 0; j < q; ++j) rhs.segment(j * p, p) = C.col(j);
  Vector x = K.colPivHouseholderQr().solve(rhs);
  Matrix X(p, q);
  for (int j = 0; j < q; ++j) X.col(j) = x.segment(j * p, p);
  const double residual = (A * X + X * B - C).norm();
  if (residual > 1e-9 * (1.0 + C.norm())) {
    throw SingularEquationError("solve_sylvester: residual check failed");
  }
  return X;
}

RankInfo rank_tol(const Matrix& M, double tol) {
  require_finite(M, "rank_tol");
  RankInfo out;
  if (M.size() == 0) {
    out.nullspace = Matrix::Identity(M.cols(), M.cols());
    out.singular_values = Vector(0);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  const double normM = out.singular_values.size() > 0 ? out.singular_values(0) : 0.0;
  if (tol < 0.0) tol = 1e-9 * static_cast<double>(std::max(M.rows(), M.cols())) * normM;
  out.tol_used = tol;
  int r = 0;
  for (int i = 0; i < out.singular_values.size(); ++i) {
    if (out.singular_values(i) > tol) ++r;
  }
  out.rank = r;
  out.nullspace = svd.matrixV().rightCols(M.cols() - r);
  return out;
}

Trajectory integrate_linear_ode(const Matrix& A, const Vector& x0, double horizon,
                                double step) {
  if (A.rows() != A.cols() || A.rows() != x0.size()) {
    throw std::invalid_argument("integrate_linear_ode: dimension mismatch");
  }
  if (step <= 0.0 || horizon < 0.0) {
    throw std::invalid_argument("integrate_linear_ode: need step > 0, horizon >= 0");
  }
  require_finite(A, "integrate_linear_ode");
  Trajectory traj;
  if (horizon == 0.0) {
    traj.times = {0.0};
    traj.states = {x0};
    traj.step = step;
    return traj;
  }
  long long N = std::llround(horizon / step);
  if (N < 2) N = 2;
  if (N % 2 != 0) ++N;
  const double h = horizon / static_cast<double>(N);
  traj.step = h;
  traj.times.reserve(N + 1);
  traj.states.reserve(N + 1);
  Vector x = x0;
  traj.times.push_back(0.0);
  traj.states.push_back(x);
  for (long long k = 0; k < N; ++k) {
    const Vector k1 = A * x;
    const Vector k2 = A * (x + 0.5 * h * k1);
    const Vector k3 = A * (x + 0.5 * h * k2);
    const Vector k4 = A * (x + h * k3);
    x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) throw std::runtime_error("integrate_linear_ode: divergence");
    traj.times.push_back(static_cast<double>(k + 1) * h);
    traj.states.push_back(x);
  }
  return traj;
}

std::vector<Complex> eigenvalues_of(const Matrix& A) {
  std::vector<Complex> out;
  if (A.rows() == 0) return out;
  Eigen::EigenSolver<Matrix> es(A, false);
  for (int i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

Matrix symmetric_sqrt(const Matrix& M, double clip) {
  auto eig = symmetric_eig(M);
  Vector d = eig.eigenvalues;
  for (int i = 0; i < d.size(); ++i) d(i) = std::sqrt(std::max(d(i), clip));
  return eig.eigenvectors * d.asDiagonal() * eig.eigenvectors.transpose();
}

Matrix symmetric_pinv(const Matrix& M, double threshold) {
  auto eig = symmetric_eig(M);
  Vector d = eig.eigenvalues;
  for (int i = 0; i < d.size(); ++i) d(i) = std::abs(d(i)) > threshold ? 1.0 / d(i) : 0.0;
  return eig.eigenvectors * d.asDiagonal() * eig.eigenvectors.transpose();
}

}  // namespace ptk
