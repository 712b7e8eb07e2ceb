#include "ptk/behavior.hpp"

#include <stdexcept>

namespace ptk {

RatSystem::RatSystem(RatMatrix A_, RatMatrix B_, RatMatrix C_, RatMatrix D_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(std::move(D_)) {
  const int d = A.rows();
  if (A.cols() != d || B.rows() != d || C.cols() != d || D.rows() != C.rows() ||
      D.cols() != B.cols()) {
    throw std::invalid_argument("RatSystem: inconsistent dimensions");
  }
}

RatSystem RatSystem::from_double(const StateSpaceSystem& sys, long max_den, bool* exact) {
  bool ea = true, eb = true, ec = true, ed = true;
  RatSystem out(RatMatrix::from_double(sys.A, max_den, &ea),
                RatMatrix::from_double(sys.B, max_den, &eb),
                RatMatrix::from_double(sys.C, max_den, &ec),
                RatMatrix::from_double(sys.D, max_den, &ed));
  if (exact) *exact = ea && eb && ec && ed;
  return out;
}

StateSpaceSystem RatSystem::to_double(const std::string& label) const {
  return StateSpaceSystem(A.to_double(), B.to_double(), C.to_double(), D.to_double(), label);
}

RatMatrix RatSystem::transfer_at(const Rat& x) const {
  const int d = states();
  if (d == 0) return D;
  RatMatrix R = RatMatrix::identity(d) * x - A;
  return D + C * R.solve(B);
}

RatStaircase rat_observer_staircase(const RatSystem& sys) {
  const int d = sys.states();
  const int m = sys.outputs();
  // Exact observability matrix.
  RatMatrix Vo(m * d, d);
  RatMatrix block = sys.C;
  for (int k = 0; k < d; ++k) {
    Vo.set_block(k * m, 0, block);
    if (k + 1 < d) block = block * sys.A;
  }
  RatMatrix K = d == 0 ? RatMatrix(0, 0) : Vo.kernel();
  const int r = d - K.cols();
  RatStaircase out;
  out.retained_dim = r;
  // Complete the kernel basis with standard basis vectors to a nonsingular S.
  RatMatrix S(d, d);
  S.set_block(0, r, K);
  {
    RatMatrix probe(d, 0);
    int placed = 0;
    // Greedy: keep columns of I that increase the rank of [chosen | K].
    RatMatrix acc(d, K.cols() + r);
    acc.set_block(0, 0, K);
    int acc_cols = K.cols();
    for (int e = 0; e < d && placed < r; ++e) {
      RatMatrix trial(d, acc_cols + 1);
      trial.set_block(0, 0, acc.block(0, 0, d, acc_cols));
      trial(e, acc_cols) = 1;
      if (trial.rank() == acc_cols + 1) {
        S(e, placed) = 1;
        acc = trial;
        ++acc_cols;
        ++placed;
      }
    }
    if (placed != r) throw std::runtime_error("rat_observer_staircase: completion failed");
  }
  out.T_inv = S;
  out.T = S.inverse();
  RatMatrix At = out.T * sys.A * S;
  RatMatrix Bt = out.T * sys.B;
  RatMatrix Ct = sys.C * S;
  // Structural zeros must hold exactly.
  if (!At.block(0, r, r, d - r).is_zero() || !Ct.block(0, r, m, d - r).is_zero()) {
    throw std::runtime_error("rat_observer_staircase: block structure violated");
  }
  out.observable =
      RatSystem(At.block(0, 0, r, r), Bt.block(0, 0, r, sys.inputs()), Ct.block(0, 0, m, r), sys.D);
  return out;
}

namespace {

// Unimodular W (size m+d) with W * col(-C, xi I - A) = col(0, I), valid
// exactly when (C, A) is observable.
PolyMatrix observability_completion(const RatSystem& sys) {
  const int d = sys.states();
  const int m = sys.outputs();
  PolyMatrix Z(m + d, d);
  Z.set_block(0, 0, PolyMatrix::constant(-sys.C));
  PolyMatrix Axi(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      std::vector<Rat> c{-sys.A(i, j), Rat(i == j ? 1 : 0)};
      Axi(i, j) = Poly(std::move(c));
    }
  }
  Z.set_block(m, 0, Axi);
  auto tri = row_triangularize(Z);
  if (static_cast<int>(tri.pivot_cols.size()) != d) {
    throw std::runtime_error("behavior_from_realization: (C,A) not observable");
  }
  PolyMatrix R = tri.R.block(0, 0, d, d);
  if (!R.is_unimodular()) {
    throw std::runtime_error("behavior_from_realization: observability reduction not unimodular");
  }
  const PolyMatrix Rinv = R.inverse_unimodular();
  // rows d..d+m-1 of tri.Y go on top, R^{-1} * (rows 0..d-1) at the bottom.
  PolyMatrix W(m + d, m + d);
  W.set_block(0, 0, tri.Y.block(d, 0, m, m + d));
  W.set_block(m, 0, Rinv * tri.Y.block(0, 0, d, m + d));
  return W;
}

}  // namespace

BehaviorRealization behavior_from_realization(const RatSystem& sys_in) {
  BehaviorRealization out;
  RatSystem sys = sys_in;
  {
    RatStaircase sc = rat_observer_staircase(sys_in);
    if (sc.retained_dim < sys_in.states()) {
      out.staircase = sc;
      sys = sc.observable;
    }
  }
  out.observable = sys;
  const int d = sys.states();
  const int m = sys.outputs();
  const int n = sys.inputs();
  if (d == 0) {
    out.pair = PolyPair(PolyMatrix::constant(sys.D), PolyMatrix::identity(m));
    out.M = PolyMatrix::identity(m);
    out.N = PolyMatrix(m, 0);
    out.U = PolyMatrix(0, m);
    out.V = PolyMatrix(0, 0);
    out.E = PolyMatrix(0, n);
    out.F = PolyMatrix(0, m);
    return out;
  }
  const PolyMatrix W = observability_completion(sys);
  out.M = W.block(0, 0, m, m);
  out.N = W.block(0, m, m, d);
  out.U = W.block(m, 0, d, m);
  out.V = W.block(m, m, d, d);
  const PolyMatrix Dp = PolyMatrix::constant(sys.D);
  const PolyMatrix Bp = PolyMatrix::constant(sys.B);
  PolyMatrix P = out.M * Dp + out.N * Bp;
  PolyMatrix Q = out.M;
  out.E = out.U * Dp + out.V * Bp;
  out.F = -out.U;
  out.pair = PolyPair(P, Q);

  // Verify the defining identity exactly on all three block columns.
  {
    PolyMatrix Axi(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        std::vector<Rat> c{-sys.A(i, j), Rat(i == j ? 1 : 0)};
        Axi(i, j) = Poly(std::move(c));
      }
    PolyMatrix mid(m + d, n + m + d);
    mid.set_block(0, 0, -Dp);
    mid.set_block(0, n, PolyMatrix::identity(m));
    mid.set_block(0, n + m, PolyMatrix::constant(-sys.C));
    mid.set_block(m, 0, -Bp);
    mid.set_block(m, n + m, Axi);
    PolyMatrix lhs = W * mid;
    PolyMatrix rhs(m + d, n + m + d);
    rhs.set_block(0, 0, -P);
    rhs.set_block(0, n, Q);
    rhs.set_block(m, 0, -out.E);
    rhs.set_block(m, n, -out.F);
    rhs.set_block(m, n + m, PolyMatrix::identity(d));
    if (!(lhs == rhs)) throw std::runtime_error("behavior_from_realization: identity check failed");
    if (!W.is_unimodular()) {
      throw std::runtime_error("behavior_from_realization: completion not unimodular");
    }
    if (Q.determinant().is_zero()) {
      throw std::runtime_error("behavior_from_realization: Q singular");
    }
    // Q^{-1} P = H at exact sample points.
    int checked = 0;
    for (long s = 2; s < 30 && checked < 3; ++s) {
      Rat x = rat_of(s);
      RatMatrix Qx = Q.eval_rat(x);
      if (Qx.determinant() == 0) continue;
      RatMatrix Ix = RatMatrix::identity(d) * x - sys.A;
      if (Ix.determinant() == 0) continue;
      if (!(Qx.solve(P.eval_rat(x)) == sys.transfer_at(x))) {
        throw std::runtime_error("behavior_from_realization: transfer mismatch");
      }
      ++checked;
    }
  }
  return out;
}

RatSystem realize_observable(const PolyPair& pair) {
  const int m = pair.io_rows();
  const int n = pair.u_dim();
  if (pair.Q.determinant().is_zero()) {
    throw std::invalid_argument("realize_observable: Q singular");
  }
  // Row-reduce Q and carry P along (same unimodular left factor).
  auto rr = row_reduce(pair.Q);
  const PolyMatrix Qr = rr.R;
  const PolyMatrix Pr = rr.Y * pair.P;
  for (int i = 0; i < m; ++i) {
    int dp = -1;
    for (int j = 0; j < n; ++j) dp = std::max(dp, Pr(i, j).degree());
    if (dp > rr.row_degrees[i]) {
      throw std::invalid_argument("realize_observable: Q^{-1}P not proper");
    }
  }
  // Transpose to a right fraction G = N D^{-1} with D column-reduced.
  const PolyMatrix Dm = Qr.transpose();
  const PolyMatrix Nm = Pr.transpose();
  std::vector<int> kdeg = rr.row_degrees;  // column degrees of Dm
  int dtot = 0;
  for (int j = 0; j < m; ++j) dtot += std::max(kdeg[j], 0);
  RatMatrix Dh(m, m), Nh(n, m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) Dh(i, j) = Dm(i, j).coeff(kdeg[j]);
    for (int i = 0; i < n; ++i) Nh(i, j) = Nm(i, j).coeff(kdeg[j]);
  }
  const RatMatrix Dc = Nh * Dh.inverse();  // G(inf)
  const PolyMatrix Nsp = Nm - PolyMatrix::constant(Dc) * Dm;

  // State indexing: for each column j with k_j >= 1, chain of k_j states
  // ordered as (zeta_j^{(k_j-1)}, ..., zeta_j', zeta_j).
  std::vector<std::vector<int>> idx(m);
  int pos = 0;
  for (int j = 0; j < m; ++j) {
    idx[j].resize(std::max(kdeg[j], 0));
    for (int l = 0; l < kdeg[j]; ++l) idx[j][l] = pos++;
  }
  RatMatrix Dlow(m, dtot), Nlow(n, dtot);
  for (int j = 0; j < m; ++j) {
    for (int l = 0; l < kdeg[j]; ++l) {
      // zeta_j^{(l)} is state (j, k_j - l), stored at idx[j][k_j - l - 1].
      const int s = idx[j][kdeg[j] - l - 1];
      for (int i = 0; i < m; ++i) Dlow(i, s) = Dm(i, j).coeff(l);
      for (int i = 0; i < n; ++i) Nlow(i, s) = Nsp(i, j).coeff(l);
    }
  }
  const RatMatrix DhInv = Dh.inverse();
  const RatMatrix Top = -(DhInv * Dlow);   // d(zeta^(k_j))/dt rows
  const RatMatrix Bin = DhInv;
  RatMatrix Ac(dtot, dtot), Bc(dtot, m);
  for (int j = 0; j < m; ++j) {
    if (kdeg[j] <= 0) continue;
    const int head = idx[j][0];
    for (int c = 0; c < dtot; ++c) Ac(head, c) = Top(j, c);
    for (int c = 0; c < m; ++c) Bc(head, c) = Bin(j, c);
    for (int l = 1; l < kdeg[j]; ++l) Ac(idx[j][l], idx[j][l - 1]) = 1;
  }
  // Transpose back: observable realization of H = Q^{-1} P.
  RatSystem sys(Ac.transpose(), Nlow.transpose(), Bc.transpose(), Dc.transpose());

  // A posteriori verification: observability and behavior round-trip.
  {
    RatMatrix Vo(m * dtot, dtot);
    RatMatrix blockM = sys.C;
    for (int k = 0; k < dtot; ++k) {
      Vo.set_block(k * m, 0, blockM);
      if (k + 1 < dtot) blockM = blockM * sys.A;
    }
    if (dtot > 0 && Vo.rank() != dtot) {
      throw std::runtime_error("realize_observable: realization not observable");
    }
    auto rt = behavior_from_realization(sys);
    if (!unimodular_left_factor(pair, rt.pair).has_value()) {
      throw std::runtime_error("realize_observable: behavior round-trip failed");
    }
  }
  return sys;
}

}  // namespace ptk
