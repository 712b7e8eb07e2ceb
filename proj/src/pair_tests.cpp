#include "ptk/pair_tests.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace ptk {

bool is_unimodular(const PolyMatrix& V) { return V.is_unimodular(); }

bool is_signature(const RatMatrix& sigma) {
  if (sigma.rows() != sigma.cols()) return false;
  for (int i = 0; i < sigma.rows(); ++i) {
    for (int j = 0; j < sigma.cols(); ++j) {
      if (i == j) {
        if (sigma(i, j) != 1 && sigma(i, j) != -1) return false;
      } else if (sigma(i, j) != 0) {
        return false;
      }
    }
  }
  return true;
}

namespace {

constexpr double kAxisTol = 1e-9;
constexpr double kBoundaryTol = 1e-8;

// Substitutes xi = j*omega into an even polynomial (exact): p(j w) has real
// coefficients c_{2l} (-1)^l.
Poly even_substitute_jw(const Poly& p) {
  std::vector<Rat> c(p.degree() + 1, Rat(0));
  for (int k = 0; k <= p.degree(); ++k) {
    if (k % 2 == 1) {
      if (p.coeff(k) != 0) throw std::runtime_error("even_substitute_jw: odd coefficient");
      continue;
    }
    c[k] = ((k / 2) % 2 == 0) ? p.coeff(k) : -p.coeff(k);
  }
  return Poly(std::move(c));
}

// Sum of all r x r principal minors.
Poly principal_minor_sum(const PolyMatrix& G, int r) {
  const int m = G.rows();
  Poly sum;
  std::vector<int> s(r);
  for (int i = 0; i < r; ++i) s[i] = i;
  auto next_subset = [&](std::vector<int>& v) {
    int i = r - 1;
    while (i >= 0 && v[i] == m - r + i) --i;
    if (i < 0) return false;
    ++v[i];
    for (int j = i + 1; j < r; ++j) v[j] = v[j - 1] + 1;
    return true;
  };
  do {
    PolyMatrix sub(r, r);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) sub(a, b) = G(s[a], s[b]);
    sum = sum + sub.determinant();
  } while (next_subset(s));
  return sum;
}

struct HermitianSample {
  double omega;
  double min_eig;
  ComplexVector vec;
};

HermitianSample min_eig_at(const PolyMatrix& G, double omega) {
  ComplexMatrix M = G.eval(Complex(0.0, omega));
  M = 0.5 * (M + M.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(M);
  HermitianSample s;
  s.omega = omega;
  s.min_eig = es.eigenvalues()(0);
  s.vec = es.eigenvectors().col(0);
  return s;
}

struct AxisResult {
  bool pass = true;
  bool inconclusive = false;
  HermitianSample worst;
  std::vector<double> grid;
  double scale = 1.0;
};

// Axis semi-decision for G(j w) >= 0: log grid + exact isolation of the real
// roots of the top nonvanishing principal-minor sum, sampling once between
// consecutive roots (eigenvalue branches keep their sign there).
AxisResult axis_psd_test(const PolyMatrix& G) {
  AxisResult out;
  out.worst.min_eig = 0.0;
  if (G.is_zero()) return out;
  const int m = G.rows();
  int r = 0;
  Poly er;
  for (int k = m; k >= 1; --k) {
    Poly cand = principal_minor_sum(G, k);
    if (!cand.is_zero()) {
      r = k;
      er = cand;
      break;
    }
  }
  std::vector<double> samples;
  samples.push_back(0.0);
  for (int i = 0; i < 256; ++i) {
    samples.push_back(std::pow(10.0, -3.0 + 6.0 * i / 255.0));
  }
  bool high_degree = false;
  if (r > 0) {
    Poly er_w = even_substitute_jw(er);
    high_degree = er_w.degree() > 64;
    auto roots = er_w.real_roots();
    std::vector<double> pos;
    for (double x : roots) {
      if (x >= 0.0) pos.push_back(x);
    }
    std::sort(pos.begin(), pos.end());
    for (size_t i = 0; i < pos.size(); ++i) {
      samples.push_back(pos[i]);
      samples.push_back(pos[i] + (i + 1 < pos.size() ? (pos[i + 1] - pos[i]) / 2.0 : 1.0));
      if (i == 0 && pos[i] > 0.0) samples.push_back(pos[i] / 2.0);
    }
  }
  std::sort(samples.begin(), samples.end());
  double scale = 1.0;
  for (double w : samples) {
    auto s = min_eig_at(G, w);
    const double local_scale = 1.0 + G.eval(Complex(0.0, w)).norm();
    scale = std::max(scale, local_scale);
    if (s.min_eig < out.worst.min_eig) out.worst = s;
    if (s.min_eig < -kAxisTol * local_scale) {
      out.pass = false;
      out.worst = s;
      out.grid = samples;
      return out;
    }
    if (high_degree && s.min_eig < 0.0 && s.min_eig >= -kAxisTol * local_scale) {
      out.inconclusive = true;
    }
  }
  out.grid = samples;
  out.scale = scale;
  return out;
}

// Reduced denominators of H = Q^{-1} P and the pole-at-infinity order. Each
// entry (adj(Q) P)_{ij} / det Q is reduced exactly.
struct TransferPoles {
  Poly den_union;      // squarefree lcm-like union of reduced denominators
  Poly den_repeated;   // nontrivial gcd(den, den') factors (multiple poles)
  int infinity_order = 0;
  PolyMatrix num_red;  // reduced numerators (paired with den_red)
  std::vector<Poly> den_red;  // per entry, reduced denominators (row-major)
  bool q_singular = false;
};

TransferPoles transfer_pole_data(const PolyPair& pair) {
  TransferPoles out;
  Poly det = pair.Q.determinant();
  if (det.is_zero()) {
    out.q_singular = true;
    return out;
  }
  PolyMatrix num = pair.Q.adjugate() * pair.P;
  out.num_red = PolyMatrix(num.rows(), num.cols());
  out.den_union = Poly::one();
  out.den_repeated = Poly::one();
  for (int i = 0; i < num.rows(); ++i) {
    for (int j = 0; j < num.cols(); ++j) {
      Poly g = Poly::gcd(num(i, j), det);
      Poly dr = Poly::divmod(det, g).first.monic();
      Poly nr = Poly::divmod(num(i, j), g).first;
      out.num_red(i, j) = nr;
      out.den_red.push_back(dr);
      out.infinity_order = std::max(out.infinity_order, nr.degree() - dr.degree());
      Poly sf = dr.squarefree();
      // union of roots (squarefree product of new factors)
      Poly extra = Poly::divmod(sf, Poly::gcd(sf, out.den_union)).first;
      out.den_union = out.den_union * extra;
      Poly rep = Poly::gcd(dr, dr.derivative());
      if (rep.degree() > 0) {
        Poly extra2 = Poly::divmod(rep.squarefree(), Poly::gcd(rep.squarefree(), out.den_repeated)).first;
        out.den_repeated = out.den_repeated * extra2;
      }
    }
  }
  return out;
}

// Residue matrix of H at a simple pole lambda0 (numeric).
ComplexMatrix residue_at(const TransferPoles& tp, Complex lambda0) {
  const int rows = tp.num_red.rows();
  const int cols = tp.num_red.cols();
  ComplexMatrix R = ComplexMatrix::Zero(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const Poly& dr = tp.den_red[i * cols + j];
      if (dr.degree() == 0) continue;
      Complex dval = dr.eval(lambda0);
      Complex dpr = dr.derivative().eval(lambda0);
      // Only entries whose reduced denominator vanishes at lambda0 carry a
      // residue; others contribute zero.
      double scale = 0.0;
      for (int k = 0; k <= dr.degree(); ++k)
        scale += std::abs(rat_to_double(dr.coeff(k))) * std::pow(std::abs(lambda0) + 1.0, k);
      if (std::abs(dval) < 1e-7 * (1.0 + scale) && std::abs(dpr) > 1e-12) {
        R(i, j) = tp.num_red(i, j).eval(lambda0) / dpr;
      }
    }
  }
  return R;
}

struct ConditionAOptions {
  bool closed_right_halfplane = false;  // BR: poles on the axis also fail
  bool positive_real_form = true;       // PR: G = PQ*+QP*; BR: G = QQ*-PP*
};

PairVerdict condition_a(const PolyPair& pair, const ConditionAOptions& opt) {
  PairVerdict v;
  const PolyMatrix G = opt.positive_real_form
                           ? pair.P * pair.Q.star() + pair.Q * pair.P.star()
                           : pair.Q * pair.Q.star() - pair.P * pair.P.star();
  // Pole analysis of H = Q^{-1}P (analyticity part of the condition).
  TransferPoles tp = transfer_pole_data(pair);
  if (!tp.q_singular) {
    if (opt.positive_real_form) {
      if (tp.infinity_order >= 2) {
        v.outcome = PairVerdict::Outcome::Fail;
        v.failed_condition = PairVerdict::Condition::A;
        v.detail = "pole at infinity of order >= 2";
        v.witness_lambda = Complex(1e6, 0.0);
        return v;
      }
      if (tp.infinity_order == 1) {
        // Residue at infinity must be symmetric PSD (exact test).
        const int rows = tp.num_red.rows(), cols = tp.num_red.cols();
        RatMatrix J(rows, cols);
        for (int i = 0; i < rows; ++i)
          for (int j = 0; j < cols; ++j) {
            const Poly& nr = tp.num_red(i, j);
            const Poly& dr = tp.den_red[i * cols + j];
            if (nr.degree() == dr.degree() + 1) J(i, j) = nr.lead() / dr.lead();
          }
        auto cong = symmetric_congruence_psd(J + J.transpose());
        if (!(J == J.transpose()) || cong.indefinite) {
          v.outcome = PairVerdict::Outcome::Fail;
          v.failed_condition = PairVerdict::Condition::A;
          v.detail = "pole at infinity with non-PSD residue";
          v.witness_lambda = Complex(1e6, 0.0);
          return v;
        }
      }
    } else if (tp.infinity_order >= 1) {
      v.outcome = PairVerdict::Outcome::Fail;
      v.failed_condition = PairVerdict::Condition::A;
      v.detail = "transfer function unbounded at infinity";
      v.witness_lambda = Complex(1e6, 0.0);
      return v;
    }
    for (Complex pole : tp.den_union.roots()) {
      const bool in_open_right = pole.real() > kBoundaryTol;
      const bool on_axis = std::abs(pole.real()) <= kBoundaryTol;
      if (in_open_right || (on_axis && opt.closed_right_halfplane)) {
        v.outcome = PairVerdict::Outcome::Fail;
        v.failed_condition = PairVerdict::Condition::A;
        v.detail = opt.closed_right_halfplane ? "pole of Q^{-1}P in closed right half-plane"
                                              : "pole of Q^{-1}P in open right half-plane";
        v.witness_lambda = pole;
        return v;
      }
      if (on_axis && opt.positive_real_form) {
        // Axis poles must be simple with Hermitian PSD residue.
        bool repeated = false;
        if (tp.den_repeated.degree() > 0) {
          Complex val = tp.den_repeated.eval(pole);
          if (std::abs(val) < 1e-6 * (1.0 + std::abs(pole))) repeated = true;
        }
        if (repeated) {
          v.outcome = PairVerdict::Outcome::Fail;
          v.failed_condition = PairVerdict::Condition::A;
          v.detail = "repeated pole of Q^{-1}P on the imaginary axis";
          v.witness_lambda = pole;
          return v;
        }
        ComplexMatrix R = residue_at(tp, pole);
        ComplexMatrix Rh = 0.5 * (R + R.adjoint());
        const double herm_err = (R - R.adjoint()).norm();
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(Rh);
        const double scale = 1.0 + R.norm();
        if (herm_err > 1e-7 * scale || es.eigenvalues()(0) < -1e-7 * scale) {
          v.outcome = PairVerdict::Outcome::Fail;
          v.failed_condition = PairVerdict::Condition::A;
          v.detail = "imaginary-axis pole with non-PSD residue";
          v.witness_lambda = pole;
          v.witness_vector = es.eigenvectors().col(0);
          return v;
        }
      }
    }
  }
  // Axis grid test.
  AxisResult axis = axis_psd_test(G);
  v.sample_frequencies = axis.grid;
  v.min_eig_seen = axis.worst.min_eig;
  if (!axis.pass) {
    v.outcome = PairVerdict::Outcome::Fail;
    v.failed_condition = PairVerdict::Condition::A;
    v.detail = "negative eigenvalue on the imaginary axis";
    v.witness_lambda = Complex(0.0, axis.worst.omega);
    v.witness_vector = axis.worst.vec;
    return v;
  }
  // Interior real-axis samples: F(sigma) uses the plain transpose.
  const PolyMatrix Greal = opt.positive_real_form
                               ? pair.P * pair.Q.transpose() + pair.Q * pair.P.transpose()
                               : pair.Q * pair.Q.transpose() - pair.P * pair.P.transpose();
  for (int i = 0; i < 65; ++i) {
    const double sigma = std::pow(10.0, -3.0 + 6.0 * i / 64.0);
    Matrix Fs = Greal.eval(Complex(sigma, 0.0)).real();
    Fs = 0.5 * (Fs + Fs.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(Fs);
    if (es.eigenvalues()(0) < -kAxisTol * (1.0 + Fs.norm())) {
      v.outcome = PairVerdict::Outcome::Fail;
      v.failed_condition = PairVerdict::Condition::A;
      v.detail = "negative direction at real sigma > 0";
      v.witness_lambda = Complex(sigma, 0.0);
      v.witness_vector = es.eigenvectors().col(0).cast<Complex>();
      return v;
    }
  }
  if (axis.inconclusive) {
    v.outcome = PairVerdict::Outcome::BoundaryInconclusive;
    v.detail = "axis sign change unresolved at degree > 64";
  }
  return v;
}

// Rank of [P -Q] over the closed right half-plane: Smith zeros via the exact
// gcd of maximal minors.
std::optional<PairVerdict> condition_b(const PolyPair& pair) {
  const int m = pair.io_rows();
  PolyMatrix PQ = PolyMatrix::hcat(pair.P, -pair.Q);
  if (PQ.normalrank() < m) {
    PairVerdict v;
    v.outcome = PairVerdict::Outcome::Fail;
    v.failed_condition = PairVerdict::Condition::B;
    v.detail = "[P -Q] rank-deficient everywhere";
    v.witness_lambda = Complex(0.0, 0.0);
    ComplexMatrix M = PQ.eval(v.witness_lambda);
    Eigen::JacobiSVD<ComplexMatrix> svd(M.transpose(), Eigen::ComputeFullV);
    v.witness_vector = svd.matrixV().col(M.rows() - 1);
    return v;
  }
  Poly g = minor_gcd(PQ, m);
  if (g.degree() <= 0) return std::nullopt;
  for (Complex z : g.roots()) {
    if (z.real() >= -kBoundaryTol) {
      PairVerdict v;
      v.outcome = PairVerdict::Outcome::Fail;
      v.failed_condition = PairVerdict::Condition::B;
      v.detail = "rank of [P -Q] drops in the closed right half-plane";
      v.witness_lambda = z;
      ComplexMatrix M = PQ.eval(z);
      Eigen::JacobiSVD<ComplexMatrix> svd(M.transpose(), Eigen::ComputeFullV);
      v.witness_vector = svd.matrixV().col(M.rows() - 1).conjugate();
      return v;
    }
  }
  return std::nullopt;
}

// Kernel-direction condition via the minimal left-annihilator basis of G.
std::optional<PairVerdict> condition_c(const PolyPair& pair, const PolyMatrix& G) {
  PolyMatrix bann = minimal_left_kernel(G);
  const int k = bann.rows();
  if (k == 0) return std::nullopt;
  PolyMatrix PQ = PolyMatrix::hcat(pair.P, -pair.Q);
  PolyMatrix Xi = bann * PQ;
  auto make_fail = [&](Complex lambda, const ComplexVector& vdir) {
    PairVerdict v;
    v.outcome = PairVerdict::Outcome::Fail;
    v.failed_condition = PairVerdict::Condition::C;
    v.witness_lambda = lambda;
    v.witness_vector = vdir;
    // p^T = v^T * bann as a (possibly complex-rounded) polynomial row: store
    // the real part of the combination for reporting.
    PolyMatrix prow(1, bann.cols());
    for (int j = 0; j < bann.cols(); ++j) {
      Poly acc;
      for (int i = 0; i < k; ++i) {
        Rat w = rat_from_double(vdir(i).real(), 1000000);
        acc = acc + bann(i, j) * w;
      }
      prow(0, j) = acc;
    }
    v.witness_poly_row = prow;
    v.detail = "annihilator direction vanishes in [P -Q] but not in basis";
    return v;
  };
  if (Xi.normalrank() < k) {
    // A polynomial row annihilates [P -Q] entirely.
    PolyMatrix vker = minimal_left_kernel(Xi);
    ComplexVector vdir = ComplexVector::Zero(k);
    for (int i = 0; i < k; ++i) vdir(i) = vker(0, i).eval(Complex(0.0, 0.0));
    return make_fail(Complex(0.0, 0.0), vdir);
  }
  Poly g = minor_gcd(Xi, k);
  if (g.degree() <= 0) return std::nullopt;
  for (Complex z : g.roots()) {
    ComplexMatrix Xiz = Xi.eval(z);
    // Left kernel of Xi(z): kernel of Xi(z)^T.
    Eigen::JacobiSVD<ComplexMatrix> svd(Xiz.transpose(), Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double tol = 1e-8 * (1.0 + (sv.size() > 0 ? sv(0) : 0.0));
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > tol) ++rank;
    if (rank == k) continue;
    ComplexMatrix kernel = svd.matrixV().rightCols(k - rank);
    ComplexMatrix Bz = bann.eval(z);
    for (int c = 0; c < kernel.cols(); ++c) {
      ComplexVector vdir = kernel.col(c).conjugate();  // v with v^T Xi(z) = 0
      const double viol = (vdir.transpose() * Bz).norm();
      if (viol > 1e-8 * (1.0 + Bz.norm())) return make_fail(z, vdir);
    }
  }
  return std::nullopt;
}

PairVerdict pair_test(const PolyPair& pair, bool bounded_real) {
  ConditionAOptions opt;
  opt.closed_right_halfplane = bounded_real;
  opt.positive_real_form = !bounded_real;
  PairVerdict va = condition_a(pair, opt);
  if (va.fail()) return va;
  if (auto vb = condition_b(pair)) return *vb;
  const PolyMatrix G = bounded_real ? pair.Q * pair.Q.star() - pair.P * pair.P.star()
                                    : pair.P * pair.Q.star() + pair.Q * pair.P.star();
  if (auto vc = condition_c(pair, G)) return *vc;
  return va;  // pass or boundary-inconclusive from (a)
}

}  // namespace

PairVerdict is_positive_real_pair(const PolyPair& pair) {
  if (pair.P.rows() != pair.P.cols()) {
    throw std::invalid_argument("is_positive_real_pair: P must be square");
  }
  return pair_test(pair, false);
}

PairVerdict is_bounded_real_pair(const PolyPair& pair) { return pair_test(pair, true); }

RatMatrix select_signature(const PolyPair& pair) {
  const int n = pair.io_rows();
  if (pair.P.cols() != n) throw std::invalid_argument("select_signature: P must be square");
  const PolyMatrix Pt = (pair.P + pair.Q) * Rat(1, 2);
  const PolyMatrix Qt = (pair.Q - pair.P) * Rat(1, 2);
  int best_deg = -2;
  unsigned best_mask = 0;
  // mask bit j set => column j taken from Pt (S1 indicator); enumerate in
  // lexicographic order of the indicator so the first maximizer wins.
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    PolyMatrix Qhat(n, n);
    for (int j = 0; j < n; ++j) {
      const bool from_p = (mask >> (n - 1 - j)) & 1u;  // bit order: column 0 is most significant
      for (int i = 0; i < n; ++i) Qhat(i, j) = from_p ? Pt(i, j) : Qt(i, j);
    }
    const int deg = Qhat.determinant().degree();
    if (deg > best_deg) {
      best_deg = deg;
      best_mask = mask;
    }
  }
  if (best_deg < 0) throw std::runtime_error("select_signature: no nonsingular selection");
  RatMatrix sigma(n, n);
  for (int j = 0; j < n; ++j) {
    const bool from_p = (best_mask >> (n - 1 - j)) & 1u;
    sigma(j, j) = from_p ? Rat(-1) : Rat(1);  // Sigma = S2 - S1
  }
  return sigma;
}

PolyPair br_to_pr(const PolyPair& pair, const RatMatrix& sigma) {
  if (!is_signature(sigma) || sigma.rows() != pair.P.cols()) {
    throw std::invalid_argument("br_to_pr: invalid signature");
  }
  const PolyMatrix PS = pair.P * PolyMatrix::constant(sigma);
  return PolyPair((PS + pair.Q) * Rat(1, 2), (pair.Q - PS) * Rat(1, 2));
}

PolyPair pr_to_br(const PolyPair& pair, const RatMatrix& sigma) {
  if (!is_signature(sigma) || sigma.rows() != pair.P.cols()) {
    throw std::invalid_argument("pr_to_br: invalid signature");
  }
  // P = (P^ - Q^) Sigma, Q = P^ + Q^.
  const PolyMatrix S = PolyMatrix::constant(sigma);
  return PolyPair((pair.P - pair.Q) * S, pair.P + pair.Q);
}

}  // namespace ptk
