#include "ptk/state_space.hpp"

#include <Eigen/Eigenvalues>

namespace ptk {

StateSpaceSystem::StateSpaceSystem(Matrix A_, Matrix B_, Matrix C_, Matrix D_,
                                   std::string label_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(std::move(D_)),
      label(std::move(label_)) {
  const int d = static_cast<int>(A.rows());
  if (A.cols() != d || B.rows() != d || C.cols() != d || D.rows() != C.rows() ||
      D.cols() != B.cols()) {
    throw std::invalid_argument("StateSpaceSystem: inconsistent dimensions");
  }
  require_finite(A, "StateSpaceSystem.A");
  require_finite(B, "StateSpaceSystem.B");
  require_finite(C, "StateSpaceSystem.C");
  require_finite(D, "StateSpaceSystem.D");
}

Matrix observability_matrix(const StateSpaceSystem& sys) {
  const int d = sys.states();
  const int m = sys.outputs();
  Matrix V(m * d, d);
  Matrix block = sys.C;
  for (int k = 0; k < d; ++k) {
    V.middleRows(k * m, m) = block;
    if (k + 1 < d) block = block * sys.A;
  }
  if (d == 0) V.resize(0, 0);
  return V;
}

StateSpaceSystem StaircaseDecomposition::retained(const StateSpaceSystem& sys) const {
  return StateSpaceSystem(A11, B1, C1, sys.D, sys.label + (kind == StaircaseKind::Observer
                                                               ? ":observable"
                                                               : ":controllable"));
}

namespace {

StaircaseDecomposition staircase_from_basis(const StateSpaceSystem& sys,
                                            const Matrix& retained_basis,
                                            const Matrix& discarded_basis,
                                            StaircaseKind kind) {
  const int d = sys.states();
  const int r = static_cast<int>(retained_basis.cols());
  StaircaseDecomposition out;
  out.kind = kind;
  out.retained_dim = r;
  Matrix S(d, d);
  S.leftCols(r) = retained_basis;
  S.rightCols(d - r) = discarded_basis;
  out.T = S.transpose();  // orthogonal completion => T = S^{-1} = S^T
  out.T_inv = S;
  const Matrix At = out.T * sys.A * out.T_inv;
  const Matrix Bt = out.T * sys.B;
  const Matrix Ct = sys.C * out.T_inv;
  out.A11 = At.topLeftCorner(r, r);
  out.A12 = At.topRightCorner(r, d - r);
  out.A21 = At.bottomLeftCorner(d - r, r);
  out.A22 = At.bottomRightCorner(d - r, d - r);
  out.B1 = Bt.topRows(r);
  out.B2 = Bt.bottomRows(d - r);
  out.C1 = Ct.leftCols(r);
  out.C2 = Ct.rightCols(d - r);
  return out;
}

}  // namespace

StaircaseDecomposition observer_staircase(const StateSpaceSystem& sys) {
  const Matrix Vo = observability_matrix(sys);
  auto info = rank_tol(Vo);
  const int d = sys.states();
  // Row space of Vo (orthonormal) spans the retained states; its orthogonal
  // complement is ker(Vo), which is A-invariant and inside ker(C).
  Matrix discarded = info.nullspace;
  Matrix retained(d, info.rank);
  {
    Eigen::JacobiSVD<Matrix> svd(Vo, Eigen::ComputeFullV);
    retained = svd.matrixV().leftCols(info.rank);
  }
  if (d == 0) {
    retained = Matrix(0, 0);
    discarded = Matrix(0, 0);
  }
  auto out = staircase_from_basis(sys, retained, discarded, StaircaseKind::Observer);
  return out;
}

StaircaseDecomposition controller_staircase(const StateSpaceSystem& sys) {
  const int d = sys.states();
  const int n = sys.inputs();
  Matrix R(d, d * std::max(n, 1));
  if (n == 0) {
    R = Matrix::Zero(d, std::max(d, 1));
  } else {
    Matrix block = sys.B;
    for (int k = 0; k < d; ++k) {
      R.middleCols(k * n, n) = block;
      if (k + 1 < d) block = sys.A * block;
    }
  }
  Eigen::JacobiSVD<Matrix> svd(R, Eigen::ComputeFullU);
  auto info = rank_tol(R);
  Matrix retained = svd.matrixU().leftCols(info.rank);
  Matrix discarded = svd.matrixU().rightCols(d - info.rank);
  if (d == 0) {
    retained = Matrix(0, 0);
    discarded = Matrix(0, 0);
  }
  return staircase_from_basis(sys, retained, discarded, StaircaseKind::Controller);
}

StateSpaceSystem apply_similarity(const StateSpaceSystem& sys, const Matrix& T) {
  const Matrix Ti = T.partialPivLu().inverse();
  return StateSpaceSystem(T * sys.A * Ti, T * sys.B, sys.C * Ti, sys.D, sys.label);
}

Matrix realization_similarity(const StateSpaceSystem& sys1, const StateSpaceSystem& sys2) {
  if (sys1.inputs() != sys2.inputs() || sys1.outputs() != sys2.outputs()) {
    throw std::invalid_argument("realization_similarity: input/output dimensions differ");
  }
  const Matrix Vo = observability_matrix(sys1);
  const Matrix Vo2 = observability_matrix(sys2);
  if (rank_tol(Vo).rank != sys1.states() || rank_tol(Vo2).rank != sys2.states()) {
    throw std::invalid_argument("realization_similarity: realizations must be observable");
  }
  if (sys1.states() != sys2.states()) {
    throw std::runtime_error("realization_similarity: state dimensions differ");
  }
  const int d = sys1.states();
  if (d == 0) {
    if ((sys1.D - sys2.D).norm() > 1e-8 * (1.0 + sys1.D.norm())) {
      throw std::runtime_error("realization_similarity: not equivalent realizations");
    }
    return Matrix::Identity(0, 0);
  }
  // Observability matrices of sys2 have full column rank, so T solves
  // Vo2 * T = Vo in the least-squares sense and exactly when equivalent.
  const Matrix T = (Vo2.transpose() * Vo2).ldlt().solve(Vo2.transpose() * Vo);
  const Matrix Ti = T.partialPivLu().inverse();
  const double scale = 1.0 + sys1.A.norm() + sys1.B.norm() + sys1.C.norm() + sys1.D.norm();
  const double e1 = (T * sys1.A * Ti - sys2.A).norm();
  const double e2 = (T * sys1.B - sys2.B).norm();
  const double e3 = (sys1.C * Ti - sys2.C).norm();
  const double e4 = (sys1.D - sys2.D).norm();
  if (e1 + e2 + e3 + e4 > 1e-8 * scale) {
    throw std::runtime_error("realization_similarity: not equivalent realizations");
  }
  return T;
}

ComplexMatrix transfer_eval(const StateSpaceSystem& sys, Complex s) {
  const int d = sys.states();
  if (d == 0) return sys.D.cast<Complex>();
  ComplexMatrix R = s * ComplexMatrix::Identity(d, d) - sys.A.cast<Complex>();
  Eigen::JacobiSVD<ComplexMatrix> svd(R);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (smin < 1e-10 * (1.0 + std::abs(s) + sys.A.norm())) {
    throw std::runtime_error("transfer_eval: evaluation point too close to a pole");
  }
  return sys.D.cast<Complex>() +
         sys.C.cast<Complex>() * R.partialPivLu().solve(sys.B.cast<Complex>());
}

std::vector<UncontrollableMode> uncontrollable_modes(const StateSpaceSystem& sys) {
  std::vector<UncontrollableMode> out;
  auto sc = controller_staircase(sys);
  const int q = sys.states() - sc.retained_dim;
  if (q == 0) return out;
  Eigen::ComplexEigenSolver<Matrix> es(sc.A22.transpose());
  const Matrix Tt = sc.T.transpose();
  for (int i = 0; i < q; ++i) {
    UncontrollableMode mode;
    mode.lambda = es.eigenvalues()(i);
    ComplexVector w = es.eigenvectors().col(i);
    ComplexVector z = ComplexVector::Zero(sys.states());
    z.tail(q) = w;
    mode.left_null = Tt.cast<Complex>() * z;
    mode.left_null.normalize();
    out.push_back(mode);
  }
  return out;
}

}  // namespace ptk
