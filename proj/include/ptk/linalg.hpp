#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <vector>

namespace ptk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Thrown when a Lyapunov/Sylvester equation is singular (resonant spectra).
class SingularEquationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Half-plane selector used to classify eigenvalues and order invariant
/// subspaces. `boundary_tol` is the width of the band around the imaginary
/// axis that counts as "on the boundary".
struct SpectralRegion {
  enum class Tag { ClosedLeft, OpenLeft, ClosedRight, OpenRight };
  Tag tag = Tag::ClosedLeft;
  double boundary_tol = 1e-8;

  static SpectralRegion closed_left(double tol = 1e-8) { return {Tag::ClosedLeft, tol}; }
  static SpectralRegion open_left(double tol = 1e-8) { return {Tag::OpenLeft, tol}; }
  static SpectralRegion closed_right(double tol = 1e-8) { return {Tag::ClosedRight, tol}; }
  static SpectralRegion open_right(double tol = 1e-8) { return {Tag::OpenRight, tol}; }

  bool left() const { return tag == Tag::ClosedLeft || tag == Tag::OpenLeft; }
  bool closed() const { return tag == Tag::ClosedLeft || tag == Tag::ClosedRight; }

  // Strict interior (boundary band excluded).
  bool contains_strict(Complex z) const {
    return left() ? z.real() < -boundary_tol : z.real() > boundary_tol;
  }
  bool on_boundary(Complex z) const { return std::abs(z.real()) <= boundary_tol; }
  // Membership per tag: closed regions include the boundary band.
  bool contains(Complex z) const {
    return contains_strict(z) || (closed() && on_boundary(z));
  }
};

void require_finite(const Matrix& M, const char* what);
bool is_symmetric(const Matrix& M, double tol = 1e-9);
Matrix symmetrize(const Matrix& M);

struct SymmetricEig {
  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // orthonormal columns, matching order
};

/// Eigendecomposition of a symmetric matrix; input is symmetrized as
/// (M + M^T)/2 before factoring.
SymmetricEig symmetric_eig(const Matrix& M);

struct OrderedSchur {
  Matrix basis;             // orthogonal; leading columns span the region subspace
  Matrix quasi_triangular;  // reordered real Schur factor
  int in_region_count = 0;
  bool boundary_flag = false;        // some eigenvalue within boundary_tol of the axis
  std::vector<Complex> eigenvalues;  // in reordered (selected-first) order
};

/// Real Schur form of M reordered so the eigenvalues inside `region` occupy
/// the leading block. Within the selected block, eigenvalues strictly inside
/// the region come before boundary ones.
OrderedSchur ordered_schur(const Matrix& M, const SpectralRegion& region);

/// Solves A^T Z + Z A = -Q for symmetric Q. Result is symmetrized and the
/// residual is verified against 1e-9 * (1 + |Q|).
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q);

/// Solves A X + X B = C.
Matrix solve_sylvester(const Matrix& A, const Matrix& B, const Matrix& C);

struct RankInfo {
  int rank = 0;
  Matrix nullspace;  // orthonormal columns spanning ker(M)
  Vector singular_values;
  double tol_used = 0.0;
};

/// Rank and nullspace with tolerance; tol < 0 selects the scaled default
/// 1e-9 * max(rows, cols) * |M|_2.
RankInfo rank_tol(const Matrix& M, double tol = -1.0);

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  double step = 0.0;
};

/// Fixed-step classical 4th-order integration of dx/dt = A x. The actual
/// step is horizon/N with N even and N ~= horizon/step, so the horizon is
/// hit exactly and composite Simpson applies downstream.
Trajectory integrate_linear_ode(const Matrix& A, const Vector& x0, double horizon, double step);

/// Eigenvalues of a general square matrix (helper shared by several modules).
std::vector<Complex> eigenvalues_of(const Matrix& A);

/// Symmetric PSD square root via eigendecomposition, eigenvalues clipped at
/// `clip` before the square root.
Matrix symmetric_sqrt(const Matrix& M, double clip = 1e-12);

/// Pseudo-inverse of a symmetric PSD matrix with eigenvalue threshold.
Matrix symmetric_pinv(const Matrix& M, double threshold = 1e-10);

}  // namespace ptk
