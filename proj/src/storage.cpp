#include "ptk/storage.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace ptk {

namespace {

Matrix regular_r(const StateSpaceSystem& sys, Supply supply) {
  if (supply == Supply::Passive) {
    if (sys.inputs() != sys.outputs()) {
      throw std::invalid_argument("passive supply requires m = n");
    }
    return sys.D + sys.D.transpose();
  }
  return Matrix::Identity(sys.inputs(), sys.inputs()) - sys.D.transpose() * sys.D;
}

double min_eig_sym(const Matrix& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(M));
  return es.eigenvalues()(0);
}

}  // namespace

Matrix omega(const StateSpaceSystem& sys, const Matrix& X) {
  if (sys.inputs() != sys.outputs()) throw std::invalid_argument("omega: requires m = n");
  if (X.rows() != sys.states() || X.cols() != sys.states()) {
    throw std::invalid_argument("omega: X dimension mismatch");
  }
  const int d = sys.states();
  const int n = sys.inputs();
  Matrix out(d + n, d + n);
  out.topLeftCorner(d, d) = -sys.A.transpose() * X - X * sys.A;
  out.topRightCorner(d, n) = sys.C.transpose() - X * sys.B;
  out.bottomLeftCorner(n, d) = sys.C - sys.B.transpose() * X;
  out.bottomRightCorner(n, n) = sys.D + sys.D.transpose();
  return out;
}

Matrix lambda_lmi(const StateSpaceSystem& sys, const Matrix& X) {
  if (X.rows() != sys.states() || X.cols() != sys.states()) {
    throw std::invalid_argument("lambda_lmi: X dimension mismatch");
  }
  const int d = sys.states();
  const int n = sys.inputs();
  Matrix out(d + n, d + n);
  out.topLeftCorner(d, d) =
      -sys.A.transpose() * X - X * sys.A - sys.C.transpose() * sys.C;
  out.topRightCorner(d, n) = -sys.C.transpose() * sys.D - X * sys.B;
  out.bottomLeftCorner(n, d) = -sys.D.transpose() * sys.C - sys.B.transpose() * X;
  out.bottomRightCorner(n, n) =
      Matrix::Identity(n, n) - sys.D.transpose() * sys.D;
  return out;
}

Matrix gamma_are(const StateSpaceSystem& sys, const Matrix& X) {
  const Matrix R = regular_r(sys, Supply::Passive);
  if (min_eig_sym(R) <= 1e-10) throw std::invalid_argument("gamma_are: D + D^T singular");
  const Matrix Rinv = R.inverse();
  const Matrix S = sys.C - sys.B.transpose() * X;
  return -sys.A.transpose() * X - X * sys.A - S.transpose() * Rinv * S;
}

Matrix a_gamma(const StateSpaceSystem& sys, const Matrix& X) {
  const Matrix R = regular_r(sys, Supply::Passive);
  if (min_eig_sym(R) <= 1e-10) throw std::invalid_argument("a_gamma: D + D^T singular");
  return sys.A - sys.B * R.inverse() * (sys.C - sys.B.transpose() * X);
}

Matrix pi_are(const StateSpaceSystem& sys, const Matrix& X) {
  const Matrix R = regular_r(sys, Supply::Gain);
  if (min_eig_sym(R) <= 1e-10) throw std::invalid_argument("pi_are: I - D^T D singular");
  const Matrix S = sys.D.transpose() * sys.C + sys.B.transpose() * X;
  return -sys.A.transpose() * X - X * sys.A - sys.C.transpose() * sys.C -
         S.transpose() * R.inverse() * S;
}

Matrix a_pi(const StateSpaceSystem& sys, const Matrix& X) {
  const Matrix R = regular_r(sys, Supply::Gain);
  if (min_eig_sym(R) <= 1e-10) throw std::invalid_argument("a_pi: I - D^T D singular");
  return sys.A + sys.B * R.inverse() * (sys.D.transpose() * sys.C + sys.B.transpose() * X);
}

namespace {

struct HamiltonianData {
  Matrix Abar, G, Qt;
};

HamiltonianData hamiltonian_blocks(const Matrix& A, const Matrix& B, const Matrix& C,
                                   const Matrix& D, Supply supply) {
  HamiltonianData h;
  if (supply == Supply::Passive) {
    const Matrix R = D + D.transpose();
    const Matrix Rinv = R.inverse();
    h.Abar = A - B * Rinv * C;
    h.G = B * Rinv * B.transpose();
    h.Qt = C.transpose() * Rinv * C;
  } else {
    const int n = static_cast<int>(B.cols());
    const Matrix R = Matrix::Identity(n, n) - D.transpose() * D;
    const Matrix Rinv = R.inverse();
    h.Abar = A + B * Rinv * D.transpose() * C;
    h.G = B * Rinv * B.transpose();
    h.Qt = C.transpose() * (Matrix::Identity(C.rows(), C.rows()) + D * Rinv * D.transpose()) * C;
  }
  return h;
}

}  // namespace

MinAreResult solve_min_are(const StateSpaceSystem& sys, Supply supply) {
  MinAreResult res;
  const int d = sys.states();
  const Matrix R = regular_r(sys, supply);
  if (min_eig_sym(R) <= 1e-10) {
    res.failure = "not regular: feedthrough block is singular";
    return res;
  }
  const Matrix Rinv = R.inverse();

  auto sc = controller_staircase(sys);
  const int c = sc.retained_dim;
  const int q = d - c;
  const Matrix& A11 = sc.A11;
  const Matrix& A12 = sc.A12;
  const Matrix& A22 = sc.A22;
  const Matrix& B1 = sc.B1;
  const Matrix& C1 = sc.C1;
  const Matrix& C2 = sc.C2;
  const Matrix& D = sys.D;

  // Stabilizing solution on the controllable part via the Hamiltonian.
  Matrix X11(c, c);
  if (c > 0) {
    auto h = hamiltonian_blocks(A11, B1, C1, D, supply);
    Matrix H(2 * c, 2 * c);
    H.topLeftCorner(c, c) = h.Abar;
    H.topRightCorner(c, c) = h.G;
    H.bottomLeftCorner(c, c) = -h.Qt;
    H.bottomRightCorner(c, c) = -h.Abar.transpose();
    auto os = ordered_schur(H, SpectralRegion::closed_left(1e-8));
    res.boundary_flag = os.boundary_flag;
    if (os.in_region_count < c) {
      res.failure = "Hamiltonian has too few closed-left eigenvalues (LMI infeasible)";
      return res;
    }
    const Matrix U1 = os.basis.topLeftCorner(c, c);
    const Matrix U2 = os.basis.bottomLeftCorner(c, c);
    Eigen::FullPivLU<Matrix> lu(U1.transpose());
    if (lu.rank() < c) {
      res.failure = "Hamiltonian invariant subspace is not a graph (LMI infeasible)";
      return res;
    }
    X11 = symmetrize(lu.solve(U2.transpose()));
  }

  Matrix X12(c, q), X22(q, q);
  try {
    if (q > 0) {
      if (supply == Supply::Passive) {
        Matrix Acl11(c, c);
        if (c > 0) {
          StateSpaceSystem part(A11, B1, C1, D);
          Acl11 = a_gamma(part, X11);
          const Matrix rhs = -(A12.transpose() * X11 +
                               C2.transpose() * Rinv * (C1 - B1.transpose() * X11));
          const Matrix Y = solve_sylvester(A22.transpose(), Acl11, rhs);  // Y = X12^T
          X12 = Y.transpose();
        } else {
          X12 = Matrix::Zero(0, q);
        }
        const Matrix X11pinv = symmetric_pinv(X11, 1e-10);
        const Matrix Wc = C2.transpose() - X12.transpose() * X11pinv * C1.transpose();
        const Matrix Qz = Wc * Rinv * Wc.transpose();
        const Matrix Z = solve_lyapunov(A22, symmetrize(Qz));
        X22 = Z + X12.transpose() * X11pinv * X12;
      } else {
        Matrix Acl11(c, c);
        if (c > 0) {
          StateSpaceSystem part(A11, B1, C1, D);
          Acl11 = a_pi(part, X11);
          const Matrix S1 = C1.transpose() * D + X11 * B1;
          const Matrix rhs = -(X11 * A12 + C1.transpose() * C2 + S1 * Rinv * D.transpose() * C2);
          X12 = solve_sylvester(Acl11.transpose(), A22, rhs);
        } else {
          X12 = Matrix::Zero(0, q);
        }
        const Matrix S2 = C2.transpose() * D + X12.transpose() * B1;
        const Matrix Qg = A12.transpose() * X12 + X12.transpose() * A12 +
                          C2.transpose() * C2 + S2 * Rinv * S2.transpose();
        X22 = solve_lyapunov(A22, symmetrize(Qg));
      }
    } else {
      X12 = Matrix::Zero(c, 0);
      X22 = Matrix::Zero(0, 0);
    }
  } catch (const SingularEquationError& err) {
    res.failure = std::string("completion equations singular: ") + err.what();
    res.boundary_flag = true;
    return res;
  }

  Matrix Xblk(d, d);
  Xblk.topLeftCorner(c, c) = X11;
  Xblk.topRightCorner(c, q) = X12;
  Xblk.bottomLeftCorner(q, c) = X12.transpose();
  Xblk.bottomRightCorner(q, q) = X22;
  res.X = symmetrize(sc.T.transpose() * Xblk * sc.T);

  const Matrix residual_mat =
      supply == Supply::Passive ? gamma_are(sys, res.X) : pi_are(sys, res.X);
  res.residual = residual_mat.norm();
  const Matrix Acl = supply == Supply::Passive ? a_gamma(sys, res.X) : a_pi(sys, res.X);
  res.closed_loop_spectrum = eigenvalues_of(Acl);
  const double scale = 1.0 + res.X.norm() + sys.C.norm() * sys.C.norm();
  if (res.residual > 1e-7 * scale) {
    res.failure = "Riccati residual too large";
    return res;
  }
  if (min_eig_sym(res.X) < -1e-8 * (1.0 + res.X.norm())) {
    res.failure = "candidate X_ not positive semidefinite (LMI infeasible)";
    return res;
  }
  for (const auto& z : res.closed_loop_spectrum) {
    if (z.real() > 1e-6 * (1.0 + Acl.norm())) {
      res.failure = "closed-loop spectrum escapes the closed left half-plane";
      return res;
    }
  }
  res.ok = true;
  return res;
}

AvailableEnergy available_energy(const StateSpaceSystem& sys, Supply supply) {
  AvailableEnergy out;
  auto obs = observer_staircase(sys);
  StateSpaceSystem part = obs.retained(sys);
  auto res = solve_min_are(part, supply);
  out.report.boundary_flag = res.boundary_flag;
  out.report.residual = res.residual;
  out.report.closed_loop_spectrum = res.closed_loop_spectrum;
  if (!res.ok) {
    out.report.feasible = false;
    out.report.failure = res.failure;
    return out;
  }
  out.report.feasible = true;

  const int d = sys.states();
  const int r = obs.retained_dim;
  Matrix Xfull = Matrix::Zero(d, d);
  Xfull.topLeftCorner(r, r) = res.X;
  out.storage.X = symmetrize(obs.T.transpose() * Xfull * obs.T);
  out.storage.supply = supply;

  // Theorem condition (iii): ker X_ = ker V_o (mutual containment).
  const Matrix Vo = observability_matrix(sys);
  auto kerV = rank_tol(Vo);
  auto kerX = rank_tol(out.storage.X);
  double margin = 0.0;
  if (kerV.nullspace.cols() > 0) margin = (out.storage.X * kerV.nullspace).norm();
  if (kerX.nullspace.cols() > 0 && Vo.rows() > 0) {
    margin = std::max(margin, (Vo * kerX.nullspace).norm());
  }
  out.report.kernel_margin = margin;

  // Bounded-above diagnostic: unbounded iff some uncontrollable eigenvalue
  // lies in the closed left half-plane.
  out.report.bounded_above = true;
  for (const auto& mode : uncontrollable_modes(sys)) {
    if (mode.lambda.real() <= 1e-8 * (1.0 + sys.A.norm())) {
      out.report.bounded_above = false;
      out.report.unbounded_witness = UnboundedWitness{mode.lambda, mode.left_null};
      break;
    }
  }
  out.ok = true;
  return out;
}

FeasibilityCheck lmi_feasibility_check(const StateSpaceSystem& sys, const Matrix& X,
                                       Supply supply) {
  FeasibilityCheck out;
  const Matrix lmi = supply == Supply::Passive ? omega(sys, X) : lambda_lmi(sys, X);
  out.min_eig_X = min_eig_sym(X);
  out.min_eig_lmi = min_eig_sym(lmi);
  out.pass = out.min_eig_X >= -1e-9 * (1.0 + X.norm()) &&
             out.min_eig_lmi >= -1e-9 * (1.0 + lmi.norm());
  return out;
}

}  // namespace ptk
