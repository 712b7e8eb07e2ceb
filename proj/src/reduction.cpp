#include "ptk/reduction.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

namespace ptk {

namespace {

RatMatrix rat_hcat(const RatMatrix& L, const RatMatrix& R) {
  RatMatrix out(L.rows(), L.cols() + R.cols());
  out.set_block(0, 0, L);
  out.set_block(0, L.cols(), R);
  return out;
}

RatMatrix rat_vcat(const RatMatrix& T, const RatMatrix& B) {
  RatMatrix out(T.rows() + B.rows(), T.cols());
  out.set_block(0, 0, T);
  out.set_block(T.rows(), 0, B);
  return out;
}

RatMatrix rat_diag(const RatMatrix& A, const RatMatrix& B) {
  RatMatrix out(A.rows() + B.rows(), A.cols() + B.cols());
  out.set_block(0, 0, A);
  out.set_block(A.rows(), A.cols(), B);
  return out;
}

bool rat_is_symmetric(const RatMatrix& M) { return M == M.transpose(); }

bool is_diag_identity_shape(const RatMatrix& D, int r, bool degraded) {
  for (int i = 0; i < D.rows(); ++i) {
    for (int j = 0; j < D.cols(); ++j) {
      const Rat want = (i == j && i < r) ? Rat(1) : Rat(0);
      if (degraded) {
        if (std::abs(rat_to_double(D(i, j) - want)) > 1e-9) return false;
      } else if (D(i, j) != want) {
        return false;
      }
    }
  }
  return true;
}

// sqrt of a positive rational; exact when numerator and denominator are
// perfect squares, otherwise a ~1e-24 rational approximation (flagged).
Rat rat_sqrt(const Rat& p, bool* exact) {
  mpz_class num = p.get_num(), den = p.get_den();
  if (mpz_perfect_square_p(num.get_mpz_t()) && mpz_perfect_square_p(den.get_mpz_t())) {
    mpz_class sn, sd;
    mpz_sqrt(sn.get_mpz_t(), num.get_mpz_t());
    mpz_sqrt(sd.get_mpz_t(), den.get_mpz_t());
    if (exact) *exact = true;
    Rat r(sn, sd);
    r.canonicalize();
    return r;
  }
  if (exact) *exact = false;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, 48);
  mpz_class val = num * den * scale;  // sqrt(n/d) = sqrt(n*d)/d
  mpz_class root;
  mpz_sqrt(root.get_mpz_t(), val.get_mpz_t());
  mpz_class half;
  mpz_ui_pow_ui(half.get_mpz_t(), 10, 24);
  Rat r(root, den * half);
  r.canonicalize();
  return r;
}

struct FeedthroughData {
  RatMatrix D;
  PolyMatrix Qr, Pr;  // row-reduced pair
  std::vector<int> row_degs;
};

FeedthroughData feedthrough_data(const PolyPair& pair) {
  FeedthroughData out;
  auto rr = row_reduce(pair.Q);
  out.Qr = rr.R;
  out.Pr = rr.Y * pair.P;
  out.row_degs = rr.row_degrees;
  const int m = pair.io_rows();
  const int n = pair.u_dim();
  RatMatrix Qh(m, m), Ph(m, n);
  for (int i = 0; i < m; ++i) {
    const int nu = out.row_degs[i];
    if (nu < 0) throw std::runtime_error("exact_feedthrough: Q singular");
    int dp = -1;
    for (int j = 0; j < n; ++j) dp = std::max(dp, out.Pr(i, j).degree());
    if (dp > nu) throw std::runtime_error("exact_feedthrough: Q^{-1}P improper");
    for (int j = 0; j < m; ++j) Qh(i, j) = out.Qr(i, j).coeff(nu);
    for (int j = 0; j < n; ++j) Ph(i, j) = out.Pr(i, j).coeff(nu);
  }
  out.D = Qh.inverse() * Ph;
  return out;
}

StateSpaceSystem rat_to_ss(const RatSystem& r, const std::string& label = "") {
  return r.to_double(label);
}

}  // namespace

RatMatrix exact_feedthrough(const PolyPair& pair) { return feedthrough_data(pair).D; }

ComplexMatrix SpectralFactor::eval(Complex s) const {
  const int d = base.states();
  ComplexMatrix Z = W.cast<Complex>();
  if (d > 0 && L.rows() > 0) {
    ComplexMatrix R = s * ComplexMatrix::Identity(d, d) - base.A.cast<Complex>();
    Z += L.cast<Complex>() * R.partialPivLu().solve(base.B.cast<Complex>());
  }
  return Z;
}

ReductionStep symmetrize_step(const PolyPair& pair, const RatSystem& sys) {
  ReductionStep st;
  st.kind = ReductionStep::Kind::Symmetrize;
  st.pair_before = pair;
  RatMatrix D = exact_feedthrough(pair);
  if (rat_is_symmetric(D)) {
    throw std::invalid_argument("symmetrize_step: feedthrough already symmetric");
  }
  st.skew_offset = (D - D.transpose()) * Rat(1, 2);
  // P_k = P - (1/2) Q (D - D^T), Q_k = Q.
  PolyMatrix offset = PolyMatrix::constant(st.skew_offset);
  st.pair_after = PolyPair(pair.P - pair.Q * offset, pair.Q);
  st.realization_before = rat_to_ss(sys);
  RatSystem after(sys.A, sys.B, sys.C, (D + D.transpose()) * Rat(1, 2));
  st.realization_after = rat_to_ss(after);
  return st;
}

ReductionStep compress_step(const PolyPair& pair, const RatSystem& sys) {
  ReductionStep st;
  st.kind = ReductionStep::Kind::Compress;
  st.pair_before = pair;
  st.realization_before = rat_to_ss(sys);
  const int n = pair.u_dim();
  RatMatrix D = exact_feedthrough(pair);
  if (!rat_is_symmetric(D)) throw std::invalid_argument("compress_step: D not symmetric");
  const bool p_singular = pair.P.determinant().is_zero();
  auto cong = symmetric_congruence_psd(D);
  if (cong.indefinite) {
    throw std::runtime_error("compress_step: D indefinite (not a positive-real pair)");
  }
  const int r = static_cast<int>(cong.pivots.size());
  if (!p_singular && is_diag_identity_shape(D, r, false)) {
    throw std::invalid_argument("compress_step: nothing to compress (no-op guard)");
  }
  // T2: exact constant kernel of H = Q^{-1}P, i.e. of P.
  RatMatrix T2 = constant_kernel(pair.P);
  const int mk = n - pair.P.normalrank();
  if (T2.cols() != mk) {
    throw std::runtime_error(
        "compress_step: transfer-function kernel not constant (not a positive-real pair)");
  }
  if (!(D * T2).is_zero()) {
    throw std::runtime_error("compress_step: ker H not inside ker D (not a positive-real pair)");
  }
  // T1a: congruence columns scaled so T1a^T D T1a = I_r.
  RatMatrix T1a = cong.basis;
  bool all_exact = true;
  for (int k = 0; k < r; ++k) {
    bool exact = true;
    Rat s = rat_sqrt(cong.pivots[k], &exact);
    all_exact = all_exact && exact;
    for (int i = 0; i < T1a.rows(); ++i) T1a(i, k) /= s;
  }
  st.exactness_degraded = !all_exact;
  // T1b: completion of T2 to a basis of ker D, drawn from the congruence
  // kernel columns.
  RatMatrix acc = T2;
  RatMatrix T1b(n, (n - r) - mk);
  {
    int placed = 0;
    for (int c = 0; c < cong.kernel_basis.cols() && placed < T1b.cols(); ++c) {
      RatMatrix cand(n, 1);
      for (int i = 0; i < n; ++i) cand(i, 0) = cong.kernel_basis(i, c);
      RatMatrix trial = rat_hcat(acc, cand);
      if (trial.rank() == acc.cols() + 1) {
        T1b.set_block(0, placed, cand);
        acc = trial;
        ++placed;
      }
    }
    if (placed != T1b.cols()) {
      throw std::runtime_error("compress_step: kernel completion failed");
    }
  }
  RatMatrix T = rat_hcat(rat_hcat(T1a, T1b), T2);
  if (T.determinant() == 0) throw std::runtime_error("compress_step: T singular");
  st.T = T;
  st.rank_r = r;
  st.n_after = n - mk;
  const RatMatrix Tinv = T.inverse();

  // Y upper-triangularizes Q (T^{-1})^T.
  PolyMatrix QT = pair.Q * PolyMatrix::constant(Tinv.transpose());
  auto tri = row_triangularize(QT);
  if (static_cast<int>(tri.pivot_cols.size()) != n) {
    throw std::runtime_error("compress_step: Q transform lost rank");
  }
  st.Y = tri.Y;
  const int nk = st.n_after;
  PolyMatrix Qt = tri.R;
  PolyMatrix Pt = tri.Y * pair.P * PolyMatrix::constant(T);
  // Structure: Pt = [P_k 0; 0 0]; right blocks vanish because P T2 = 0.
  if (!Pt.block(0, nk, n, mk).is_zero()) {
    throw std::runtime_error("compress_step: P T2 != 0");
  }
  if (!Pt.block(nk, 0, mk, nk).is_zero()) {
    throw std::runtime_error("compress_step: lower block of Y P T nonzero (not a PR pair)");
  }
  st.Q12t = Qt.block(0, nk, nk, mk);
  st.Q22t = Qt.block(nk, nk, mk, mk);
  if (!st.Q22t.is_unimodular()) {
    throw std::runtime_error("compress_step: Q22 not unimodular (not a positive-real pair)");
  }
  st.pair_after = PolyPair(Pt.block(0, 0, nk, nk), Qt.block(0, 0, nk, nk));
  // Forward realization map (Lemma D.3.2 inverted): B_k = B T1, C_k = T1^T C,
  // D_k = T1^T D T1 with T1 = [T1a T1b].
  RatMatrix T1 = T.block(0, 0, n, nk);
  RatSystem after(sys.A, sys.B * T1, T1.transpose() * sys.C, T1.transpose() * sys.D * T1);
  st.realization_after = rat_to_ss(after);
  return st;
}

ReductionStep degree_reduce_step(const PolyPair& pair, const RatSystem& sys) {
  ReductionStep st;
  st.kind = ReductionStep::Kind::DegreeReduce;
  st.pair_before = pair;
  st.realization_before = rat_to_ss(sys);
  const int n = pair.u_dim();
  RatMatrix D = exact_feedthrough(pair);
  auto cong = symmetric_congruence_psd(D);
  const int r = cong.indefinite ? -1 : static_cast<int>(cong.pivots.size());
  if (pair.P.determinant().is_zero()) {
    throw std::invalid_argument("degree_reduce_step: P singular");
  }
  const int mk = n - r;
  if (r < 0 || mk <= 0) {
    throw std::invalid_argument("degree_reduce_step: D has no zero block");
  }
  st.r_prev = r;
  // K = bottom-right block of lim (1/xi) P^{-1} Q; top blocks must vanish.
  {
    const Poly detP = pair.P.determinant();
    const PolyMatrix Npq = pair.P.adjugate() * pair.Q;
    const int dd = detP.degree();
    RatMatrix K(mk, mk);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const int dn = Npq(i, j).degree();
        if (dn > dd + 1) {
          throw std::runtime_error("degree_reduce_step: pole at infinity not simple (not PR)");
        }
        const bool top = i < r || j < r;
        if (dn == dd + 1) {
          if (top) {
            throw std::runtime_error("degree_reduce_step: residue at infinity not diag(0,K)");
          }
          K(i - r, j - r) = Npq(i, j).lead() / detP.lead();
        }
      }
    }
    if (!rat_is_symmetric(K)) throw std::runtime_error("degree_reduce_step: K not symmetric");
    auto kc = symmetric_congruence_psd(K);
    if (kc.indefinite || static_cast<int>(kc.pivots.size()) != mk) {
      throw std::runtime_error("degree_reduce_step: K not positive definite (not PR)");
    }
    st.K = K;
  }
  // P_k = Q - P diag(0, K xi), Q_k = P.
  PolyMatrix Ek(n, n);
  for (int i = 0; i < mk; ++i)
    for (int j = 0; j < mk; ++j)
      if (st.K(i, j) != 0) Ek(r + i, r + j) = Poly::xpow(1, st.K(i, j));
  st.pair_after = PolyPair(pair.Q - pair.P * Ek, pair.P);
  const int deg_before = pair.Q.determinant().degree();
  const int deg_after = st.pair_after.Q.determinant().degree();
  if (deg_after >= deg_before) {
    throw std::runtime_error("degree_reduce_step: deg det Q did not decrease");
  }
  // Blocks of D_k = [I_r D12; D21 D22].
  RatMatrix Dk = exact_feedthrough(st.pair_after);
  st.D12h = Dk.block(0, r, r, mk);
  st.D21h = Dk.block(r, 0, mk, r);
  st.D22h = Dk.block(r, r, mk, mk);
  st.realization_after = rat_to_ss(realize_observable(st.pair_after));
  return st;
}

namespace {

struct CoreResult {
  bool ok = false;
  std::string failure;
  Matrix X, L, W;  // in the coordinates of the supplied top realization
  ReductionTrace trace;
  bool boundary_flag = false;
  double bottom_residual = 0.0;
  std::vector<Complex> closed_spec;
};

// Structured realization of pair_{k-1} from a realization of pair_k plus the
// back-substituted (X, L, W), per Lemmas D.2-D.4.
struct UpState {
  RatSystem real;
  Matrix X, L, W;
};

UpState up_symmetrize(const ReductionStep& st, const UpState& cur) {
  UpState prev = cur;
  prev.real = RatSystem(cur.real.A, cur.real.B, cur.real.C, cur.real.D + st.skew_offset);
  return prev;
}

UpState up_compress(const ReductionStep& st, const UpState& cur) {
  UpState prev;
  const RatMatrix Tinv = st.T.inverse();
  const int n_prev = st.T.rows();
  const int nk = st.n_after;
  const int mk = n_prev - nk;
  const int dk = cur.real.states();
  RatMatrix Bz = rat_hcat(cur.real.B, RatMatrix::zero(dk, mk)) * Tinv;
  RatMatrix Cz = Tinv.transpose() * rat_vcat(cur.real.C, RatMatrix::zero(mk, dk));
  RatMatrix Dz = Tinv.transpose() * rat_diag(cur.real.D, RatMatrix::zero(mk, mk)) * Tinv;
  prev.real = RatSystem(cur.real.A, Bz, Cz, Dz);
  prev.X = cur.X;
  prev.L = cur.L;
  Matrix Wz(cur.W.rows(), n_prev);
  Wz.leftCols(nk) = cur.W;
  Wz.rightCols(mk).setZero();
  prev.W = Wz * Tinv.to_double();
  return prev;
}

UpState up_degree_reduce(const ReductionStep& st, const UpState& cur) {
  UpState prev;
  const int r = st.r_prev;
  const int mk = st.K.rows();
  const int dk = cur.real.states();
  const int n = r + mk;
  const RatMatrix Kinv = st.K.inverse();
  const RatMatrix B1 = cur.real.B.block(0, 0, dk, r);
  const RatMatrix B2 = cur.real.B.block(0, r, dk, mk);
  const RatMatrix C1 = cur.real.C.block(0, 0, r, dk);
  const RatMatrix C2 = cur.real.C.block(r, 0, mk, dk);
  RatMatrix Ap(dk + mk, dk + mk);
  Ap.set_block(0, 0, cur.real.A - B1 * C1);
  Ap.set_block(0, dk, (B2 - B1 * st.D12h) * Kinv);
  Ap.set_block(dk, 0, st.D21h * C1 - C2);
  Ap.set_block(dk, dk, (st.D21h * st.D12h - st.D22h) * Kinv);
  RatMatrix Bp(dk + mk, n);
  Bp.set_block(0, 0, B1);
  Bp.set_block(dk, 0, -st.D21h);
  Bp.set_block(dk, r, RatMatrix::identity(mk));
  RatMatrix Cp(n, dk + mk);
  Cp.set_block(0, 0, -C1);
  Cp.set_block(0, dk, -(st.D12h * Kinv));
  Cp.set_block(r, dk, Kinv);
  RatMatrix Dp(n, n);
  for (int i = 0; i < r; ++i) Dp(i, i) = 1;
  prev.real = RatSystem(Ap, Bp, Cp, Dp);

  const Matrix Kinvd = Kinv.to_double();
  const Matrix C1d = C1.to_double();
  const Matrix D12d = st.D12h.to_double();
  const int rw = static_cast<int>(cur.W.rows());
  const Matrix W1 = cur.W.leftCols(r);
  const Matrix W2 = cur.W.rightCols(mk);
  prev.X = Matrix::Zero(dk + mk, dk + mk);
  prev.X.topLeftCorner(dk, dk) = cur.X;
  prev.X.bottomRightCorner(mk, mk) = Kinvd;
  prev.L = Matrix(rw, dk + mk);
  prev.L.leftCols(dk) = cur.L - W1 * C1d;
  prev.L.rightCols(mk) = (W2 - W1 * D12d) * Kinvd;
  prev.W = Matrix::Zero(rw, n);
  prev.W.leftCols(r) = W1;
  return prev;
}

double omega_factor_residual(const StateSpaceSystem& sys, const Matrix& X, const Matrix& L,
                             const Matrix& W) {
  const Matrix Om = omega(sys, X);
  Matrix LW(L.rows(), L.cols() + W.cols());
  LW.leftCols(L.cols()) = L;
  LW.rightCols(W.cols()) = W;
  return (Om - LW.transpose() * LW).norm();
}

CoreResult run_passive_core(const PolyPair& top_pair, const RatSystem& top_real) {
  CoreResult out;
  std::vector<PolyPair> pairs{top_pair};
  std::vector<RatSystem> reals{top_real};
  const int n1 = top_pair.u_dim();
  const int guard = std::max(0, top_pair.Q.determinant().degree()) + 2 * n1 + 1;
  bool degraded = false;

  try {
    for (;;) {
      const PolyPair& cur = pairs.back();
      const int ni = cur.u_dim();
      if (ni == 0) break;
      RatMatrix D = exact_feedthrough(cur);
      ReductionStep st;
      if (!rat_is_symmetric(D)) {
        st = symmetrize_step(cur, reals.back());
      } else {
        auto cong = symmetric_congruence_psd(D);
        if (cong.indefinite) {
          out.failure = "feedthrough indefinite (not a positive-real pair)";
          return out;
        }
        const int r = static_cast<int>(cong.pivots.size());
        const bool p_nonsingular = !cur.P.determinant().is_zero();
        const bool diag_ok = is_diag_identity_shape(D, r, degraded);
        if (!p_nonsingular || !diag_ok) {
          st = compress_step(cur, reals.back());
        } else if (r == ni) {
          break;  // R4: D = I
        } else {
          st = degree_reduce_step(cur, reals.back());
        }
      }
      degraded = degraded || st.exactness_degraded;
      pairs.push_back(st.pair_after);
      if (st.kind == ReductionStep::Kind::DegreeReduce) {
        reals.push_back(realize_observable(st.pair_after));
      } else {
        // Forward map; fall back to a fresh realization if it lost
        // observability (possible for compressions of non-minimal inputs).
        RatSystem fwd(RatMatrix::from_double(st.realization_after.A),
                      RatMatrix::from_double(st.realization_after.B),
                      RatMatrix::from_double(st.realization_after.C),
                      RatMatrix::from_double(st.realization_after.D));
        if (st.kind == ReductionStep::Kind::Symmetrize) {
          const RatSystem& prev = reals.back();
          fwd = RatSystem(prev.A, prev.B, prev.C,
                          (exact_feedthrough(st.pair_after)));
        } else {
          const RatSystem& prev = reals.back();
          const int nprev = st.T.rows();
          RatMatrix T1 = st.T.block(0, 0, nprev, st.n_after);
          fwd = RatSystem(prev.A, prev.B * T1, T1.transpose() * prev.C,
                          T1.transpose() * prev.D * T1);
        }
        bool fwd_ok = true;
        try {
          auto rt = behavior_from_realization(fwd);
          fwd_ok = !rt.staircase.has_value() &&
                   unimodular_left_factor(st.pair_after, rt.pair).has_value();
        } catch (const std::exception&) {
          fwd_ok = false;
        }
        reals.push_back(fwd_ok ? fwd : realize_observable(st.pair_after));
      }
      out.trace.steps.push_back(std::move(st));
      if (static_cast<int>(out.trace.steps.size()) > guard) {
        out.failure = "reduction chain exceeded its termination bound";
        return out;
      }
    }
  } catch (const std::exception& e) {
    out.failure = e.what();
    return out;
  }
  out.trace.exactness_degraded = degraded;
  if (degraded) {
    out.trace.log.push_back(
        "congruence required irrational scaling; pivots rationalized to ~1e-24");
  }

  // Bottom of the chain: D = I (regular ARE) or an empty pair.
  UpState state;
  state.real = reals.back();
  const int nb = pairs.back().u_dim();
  if (nb == 0) {
    state.X = Matrix(0, 0);
    state.L = Matrix(0, 0);
    state.W = Matrix(0, 0);
  } else {
    StateSpaceSystem bot = state.real.to_double("chain-bottom");
    auto mres = solve_min_are(bot, Supply::Passive);
    out.boundary_flag = mres.boundary_flag;
    out.bottom_residual = mres.residual;
    out.closed_spec = mres.closed_loop_spectrum;
    if (!mres.ok) {
      out.failure = "bottom Riccati solve failed: " + mres.failure;
      return out;
    }
    state.X = mres.X;
    const Matrix R = bot.D + bot.D.transpose();
    state.W = symmetric_sqrt(R);
    state.L = state.W.partialPivLu().solve(bot.C - bot.B.transpose() * state.X);
  }

  // Climb back, building the structured realizations of the lemmas.
  try {
    for (int k = static_cast<int>(out.trace.steps.size()) - 1; k >= 0; --k) {
      ReductionStep& st = out.trace.steps[k];
      UpState prev;
      switch (st.kind) {
        case ReductionStep::Kind::Symmetrize:
          prev = up_symmetrize(st, state);
          break;
        case ReductionStep::Kind::Compress:
          prev = up_compress(st, state);
          break;
        case ReductionStep::Kind::DegreeReduce:
          prev = up_degree_reduce(st, state);
          break;
      }
      // The structured realization must realize pair_before (exact check).
      auto rt = behavior_from_realization(prev.real);
      if (rt.staircase.has_value() ||
          !unimodular_left_factor(st.pair_before, rt.pair).has_value()) {
        out.failure = "structured realization does not match the level pair";
        return out;
      }
      StateSpaceSystem prev_dbl = prev.real.to_double();
      const double res = omega_factor_residual(prev_dbl, prev.X, prev.L, prev.W);
      const double scale = 1.0 + prev.X.norm() + prev.L.squaredNorm() + prev.W.squaredNorm();
      if (res > 1e-6 * scale) {
        out.failure = "back-substitution residual too large";
        return out;
      }
      st.similarity_patch = realization_similarity(prev_dbl, st.realization_before);
      state = std::move(prev);
    }
  } catch (const std::exception& e) {
    out.failure = std::string("back-substitution failed: ") + e.what();
    return out;
  }

  // Align the climbed realization with the supplied one.
  try {
    const Matrix T = realization_similarity(state.real.to_double(), top_real.to_double());
    const Matrix Ti = T.partialPivLu().inverse();
    out.X = symmetrize(Ti.transpose() * state.X * Ti);
    out.L = state.L * Ti;
    out.W = state.W;
  } catch (const std::exception& e) {
    out.failure = std::string("top alignment failed: ") + e.what();
    return out;
  }
  out.ok = true;
  return out;
}

void fill_diagnostics(const StateSpaceSystem& sys, const Matrix& X, ChainResult& out) {
  out.report.feasible = true;
  const Matrix Vo = observability_matrix(sys);
  auto kerV = rank_tol(Vo);
  auto kerX = rank_tol(X);
  double margin = 0.0;
  if (kerV.nullspace.cols() > 0) margin = (X * kerV.nullspace).norm();
  if (kerX.nullspace.cols() > 0 && Vo.rows() > 0) {
    margin = std::max(margin, (Vo * kerX.nullspace).norm());
  }
  out.report.kernel_margin = margin;
  out.report.bounded_above = true;
  for (const auto& mode : uncontrollable_modes(sys)) {
    if (mode.lambda.real() <= 1e-8 * (1.0 + sys.A.norm())) {
      out.report.bounded_above = false;
      out.report.unbounded_witness = UnboundedWitness{mode.lambda, mode.left_null};
      break;
    }
  }
}

struct Embedded {
  Matrix X, L;
};

Embedded embed_unobservable(const std::optional<RatStaircase>& sc, int d_full, const Matrix& X,
                            const Matrix& L) {
  Embedded out;
  if (!sc.has_value()) {
    out.X = X;
    out.L = L;
    return out;
  }
  const Matrix T = sc->T.to_double();
  const int r = sc->retained_dim;
  Matrix Xe = Matrix::Zero(d_full, d_full);
  Xe.topLeftCorner(r, r) = X;
  out.X = symmetrize(T.transpose() * Xe * T);
  Matrix Le = Matrix::Zero(L.rows(), d_full);
  Le.leftCols(r) = L;
  out.L = Le * T;
  return out;
}

}  // namespace

ChainResult run_chain_passive(const StateSpaceSystem& sys) {
  ChainResult out;
  if (sys.inputs() != sys.outputs()) {
    throw std::invalid_argument("run_chain_passive: requires m = n");
  }
  bool exact = true;
  RatSystem rsys = RatSystem::from_double(sys, 1000000, &exact);
  if (!exact) {
    out.trace.log.push_back("input rationalized with denominator bound 1e6");
  }
  BehaviorRealization beh = behavior_from_realization(rsys);
  out.pair_verdict = is_positive_real_pair(beh.pair);
  if (out.pair_verdict.fail()) {
    out.verdict = "not passive";
    out.failure = "positive-real pair test failed: " + out.pair_verdict.detail;
    return out;
  }
  auto core = run_passive_core(beh.pair, beh.observable);
  out.trace.steps = std::move(core.trace.steps);
  out.trace.exactness_degraded = core.trace.exactness_degraded;
  for (auto& msg : core.trace.log) out.trace.log.push_back(msg);
  out.report.boundary_flag = core.boundary_flag;
  out.report.residual = core.bottom_residual;
  out.report.closed_loop_spectrum = core.closed_spec;
  if (!core.ok) {
    out.verdict = "not passive";
    out.failure = core.failure;
    return out;
  }
  auto emb = embed_unobservable(beh.staircase, sys.states(), core.X, core.L);
  out.storage = QuadraticStorage{emb.X, Supply::Passive};
  out.factor = SpectralFactor{emb.L, core.W, Supply::Passive, sys};

  // Theorem conditions (iiia) on the user's realization.
  const Matrix& X = emb.X;
  const Matrix& L = emb.L;
  const Matrix& W = core.W;
  const double scale = 1.0 + X.norm() + sys.C.norm() + sys.D.norm() + L.squaredNorm();
  const double e1 = (-sys.A.transpose() * X - X * sys.A - L.transpose() * L).norm();
  const double e2 = (sys.C - sys.B.transpose() * X - W.transpose() * L).norm();
  const double e3 = (sys.D + sys.D.transpose() - W.transpose() * W).norm();
  if (e1 + e2 + e3 > 1e-7 * scale) {
    out.verdict = "inconclusive";
    out.failure = "spectral-factor identities failed on the input realization";
    return out;
  }
  fill_diagnostics(sys, X, out);
  out.ok = true;
  out.verdict = "passive";
  return out;
}

ChainResult run_chain_gain(const StateSpaceSystem& sys) {
  ChainResult out;
  bool exact = true;
  RatSystem rsys = RatSystem::from_double(sys, 1000000, &exact);
  if (!exact) out.trace.log.push_back("input rationalized with denominator bound 1e6");
  BehaviorRealization beh = behavior_from_realization(rsys);
  out.pair_verdict = is_bounded_real_pair(beh.pair);
  if (out.pair_verdict.fail()) {
    out.verdict = "not non-expansive";
    out.failure = "bounded-real pair test failed: " + out.pair_verdict.detail;
    return out;
  }
  // Square the pair and realization by zero padding (Theorem 9 cases ii/iii).
  const int m0 = beh.observable.outputs();
  const int n0 = beh.observable.inputs();
  PolyPair sq = beh.pair;
  RatSystem sqr = beh.observable;
  if (m0 > n0) {
    sq = PolyPair(PolyMatrix::hcat(sq.P, PolyMatrix::zero(m0, m0 - n0)), sq.Q);
    sqr = RatSystem(sqr.A, rat_hcat(sqr.B, RatMatrix::zero(sqr.states(), m0 - n0)), sqr.C,
                    rat_hcat(sqr.D, RatMatrix::zero(m0, m0 - n0)));
  } else if (m0 < n0) {
    PolyMatrix Qbig(n0, n0);
    Qbig.set_block(0, 0, sq.Q);
    for (int i = m0; i < n0; ++i) Qbig(i, i) = Poly::one();
    sq = PolyPair(PolyMatrix::vcat(sq.P, PolyMatrix::zero(n0 - m0, n0)), Qbig);
    sqr = RatSystem(sqr.A, sqr.B, rat_vcat(sqr.C, RatMatrix::zero(n0 - m0, sqr.states())),
                    rat_vcat(sqr.D, RatMatrix::zero(n0 - m0, n0)));
  }
  const int ns = sq.u_dim();
  const RatMatrix sigma = select_signature(sq);
  const RatMatrix IDS = RatMatrix::identity(ns) - sqr.D * sigma;
  if (IDS.determinant() == 0) {
    out.verdict = "not non-expansive";
    out.failure = "I - D Sigma singular (signature selection contradiction)";
    return out;
  }
  const RatMatrix Minv = IDS.inverse();
  PolyPair hat = br_to_pr(sq, sigma);
  // Rational realization of the hat pair: the paper's (A^, B^, C^, D^) has
  // sqrt(2) factors; the similarity sqrt(2) I removes them. B~ = B Sigma M,
  // C~ = 2 M C, and the chain result maps back via X^ = X~/2, L^ = L~/sqrt2.
  RatMatrix Ah = sqr.A + sqr.B * sigma * Minv * sqr.C;
  RatMatrix Bt = sqr.B * sigma * Minv;
  RatMatrix Ct = (Minv * sqr.C) * Rat(2);
  RatMatrix Dh = Minv * (RatMatrix::identity(ns) + sqr.D * sigma);
  RatSystem tilde(Ah, Bt, Ct, Dh);
  {
    auto rt = behavior_from_realization(tilde);
    if (rt.staircase.has_value() || !unimodular_left_factor(hat, rt.pair).has_value()) {
      out.verdict = "not non-expansive";
      out.failure = "hat realization does not realize the transformed pair";
      return out;
    }
  }
  auto core = run_passive_core(hat, tilde);
  out.trace.steps = std::move(core.trace.steps);
  out.trace.exactness_degraded = core.trace.exactness_degraded;
  for (auto& msg : core.trace.log) out.trace.log.push_back(msg);
  out.report.boundary_flag = core.boundary_flag;
  out.report.residual = core.bottom_residual;
  out.report.closed_loop_spectrum = core.closed_spec;
  if (!core.ok) {
    out.verdict = "not non-expansive";
    out.failure = core.failure;
    return out;
  }
  const double sqrt2 = std::sqrt(2.0);
  const Matrix Xhat = core.X / 2.0;
  const Matrix Lhat = core.L / sqrt2;
  const Matrix What = core.W;
  // Theorem 11 back-map on the squared observable realization.
  const Matrix Csq = sqr.C.to_double();
  const Matrix Dsq = sqr.D.to_double();
  const Matrix Sig = sigma.to_double();
  Matrix L = Lhat - (1.0 / sqrt2) * What * Csq;
  Matrix W = (1.0 / sqrt2) * What * (Matrix::Identity(ns, ns) - Dsq * Sig) * Sig;
  Matrix X = Xhat;
  {
    StateSpaceSystem sq_dbl = sqr.to_double("squared");
    const Matrix Lam = lambda_lmi(sq_dbl, X);
    Matrix LW(L.rows(), L.cols() + W.cols());
    LW.leftCols(L.cols()) = L;
    LW.rightCols(W.cols()) = W;
    const double res = (Lam - LW.transpose() * LW).norm();
    if (res > 1e-6 * (1.0 + Lam.norm() + LW.squaredNorm())) {
      out.verdict = "inconclusive";
      out.failure = "gain-side identities failed after the signature back-map";
      return out;
    }
  }
  if (m0 > n0) {
    // Drop padded input columns of W after checking the pad blocks.
    const Matrix Wpad = W.rightCols(m0 - n0);
    const Matrix Worig = W.leftCols(n0);
    const double pad_err =
        (Wpad.transpose() * Wpad - Matrix::Identity(m0 - n0, m0 - n0)).norm() +
        (Worig.transpose() * Wpad).norm() + (L.transpose() * Wpad).norm();
    if (pad_err > 1e-6 * (1.0 + W.squaredNorm() + L.squaredNorm())) {
      out.verdict = "inconclusive";
      out.failure = "padding blocks of the factor did not separate";
      return out;
    }
    W = Worig;
  }
  auto emb = embed_unobservable(beh.staircase, sys.states(), X, L);
  out.storage = QuadraticStorage{emb.X, Supply::Gain};
  out.factor = SpectralFactor{emb.L, W, Supply::Gain, sys};
  // Theorem 11 (iiia) on the user's realization.
  const double scale =
      1.0 + emb.X.norm() + sys.C.norm() + sys.D.norm() + emb.L.squaredNorm() + W.squaredNorm();
  const double e1 = (-sys.A.transpose() * emb.X - emb.X * sys.A -
                     sys.C.transpose() * sys.C - emb.L.transpose() * emb.L)
                        .norm();
  const double e2 = (-sys.D.transpose() * sys.C - sys.B.transpose() * emb.X -
                     W.transpose() * emb.L)
                        .norm();
  const double e3 =
      (Matrix::Identity(sys.inputs(), sys.inputs()) - sys.D.transpose() * sys.D -
       W.transpose() * W)
          .norm();
  if (e1 + e2 + e3 > 1e-7 * scale) {
    out.verdict = "inconclusive";
    out.failure = "bounded-real factor identities failed on the input realization";
    return out;
  }
  fill_diagnostics(sys, emb.X, out);
  out.ok = true;
  out.verdict = "non-expansive";
  return out;
}

FactorCheck verify_spectral_factor(const StateSpaceSystem& sys, const SpectralFactor& factor) {
  FactorCheck out;
  const double atol = 1e-8;
  for (const auto& z : eigenvalues_of(sys.A)) {
    if (z.real() > 1e-8 * (1.0 + sys.A.norm())) out.hypotheses_met = false;
  }
  std::vector<double> freqs{0.0};
  for (int i = 0; i < 32; ++i) freqs.push_back(std::pow(10.0, -2.0 + 4.0 * i / 31.0));
  for (double w : freqs) {
    Complex s(0.0, w);
    ComplexMatrix H;
    bool ok = false;
    for (int attempt = 0; attempt < 4 && !ok; ++attempt) {
      try {
        H = transfer_eval(sys, s);
        ok = true;
      } catch (const std::exception&) {
        s = Complex(0.0, (std::abs(s.imag()) + 0.05) * 1.013);  // nudge off a pole
      }
    }
    if (!ok) continue;
    const ComplexMatrix Z = factor.eval(s);
    ComplexMatrix rhs;
    if (factor.supply == Supply::Passive) {
      rhs = H + H.adjoint();
    } else {
      rhs = ComplexMatrix::Identity(H.cols(), H.cols()) - H.adjoint() * H;
    }
    const double err = (Z.adjoint() * Z - rhs).norm();
    out.max_freq_error = std::max(out.max_freq_error, err);
    if (err > atol * (1.0 + rhs.norm())) {
      out.pass = false;
      out.detail = "factor identity failed on the axis";
    }
  }
  // Rank condition of Lemma D.1 at right-half-plane samples.
  const int d = sys.states();
  const int r = static_cast<int>(factor.L.rows());
  std::mt19937 rng(20240517u);
  std::uniform_real_distribution<double> ur(0.05, 2.0), ui(-3.0, 3.0);
  out.min_rank_sv = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 16; ++k) {
    const Complex lam(std::pow(10.0, ur(rng)) / 10.0, ui(rng));
    ComplexMatrix Y(d + r, d + sys.inputs());
    Y.topLeftCorner(d, d) = lam * ComplexMatrix::Identity(d, d) - sys.A.cast<Complex>();
    Y.topRightCorner(d, sys.inputs()) = -sys.B.cast<Complex>();
    Y.bottomLeftCorner(r, d) = factor.L.cast<Complex>();
    Y.bottomRightCorner(r, sys.inputs()) = factor.W.cast<Complex>();
    if (Y.rows() == 0) continue;
    Eigen::JacobiSVD<ComplexMatrix> svd(Y);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    out.min_rank_sv = std::min(out.min_rank_sv, smin);
    if (Y.rows() > Y.cols() || smin < 1e-8 * (1.0 + Y.norm())) {
      out.rank_ok = false;
      out.detail = "Y(lambda) loses row rank in the right half-plane";
    }
  }
  // With invertible W, the rank condition reduces to the closed-loop spectrum.
  if (factor.W.rows() == factor.W.cols() && factor.W.rows() > 0) {
    Eigen::JacobiSVD<Matrix> svd(factor.W);
    if (svd.singularValues()(svd.singularValues().size() - 1) >
        1e-10 * (1.0 + factor.W.norm())) {
      const Matrix Acl = sys.A - sys.B * factor.W.partialPivLu().solve(factor.L);
      for (const auto& z : eigenvalues_of(Acl)) {
        if (z.real() > 1e-7 * (1.0 + Acl.norm())) {
          out.rank_ok = false;
          out.detail = "closed-loop factor spectrum escapes the left half-plane";
        }
      }
    }
  }
  out.pass = out.hypotheses_met && out.rank_ok && out.detail.empty();
  return out;
}

}  // namespace ptk
