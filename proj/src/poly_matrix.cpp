#include "ptk/poly_matrix.hpp"

#include <algorithm>
#include <stdexcept>

namespace ptk {

PolyMatrix PolyMatrix::identity(int n) {
  PolyMatrix M(n, n);
  for (int i = 0; i < n; ++i) M(i, i) = Poly::one();
  return M;
}

PolyMatrix PolyMatrix::constant(const RatMatrix& M) {
  PolyMatrix out(M.rows(), M.cols());
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j)
      if (M(i, j) != 0) out(i, j) = Poly(M(i, j));
  return out;
}

PolyMatrix PolyMatrix::from_coeffs(const std::vector<RatMatrix>& coeffs) {
  if (coeffs.empty()) return PolyMatrix(0, 0);
  PolyMatrix out(coeffs[0].rows(), coeffs[0].cols());
  for (int i = 0; i < out.rows(); ++i) {
    for (int j = 0; j < out.cols(); ++j) {
      std::vector<Rat> c(coeffs.size());
      for (size_t k = 0; k < coeffs.size(); ++k) c[k] = coeffs[k](i, j);
      out(i, j) = Poly(std::move(c));
    }
  }
  return out;
}

PolyMatrix PolyMatrix::operator+(const PolyMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("PolyMatrix+: shape");
  PolyMatrix out(rows_, cols_);
  for (size_t k = 0; k < p_.size(); ++k) out.p_[k] = p_[k] + o.p_[k];
  return out;
}

PolyMatrix PolyMatrix::operator-(const PolyMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("PolyMatrix-: shape");
  PolyMatrix out(rows_, cols_);
  for (size_t k = 0; k < p_.size(); ++k) out.p_[k] = p_[k] - o.p_[k];
  return out;
}

PolyMatrix PolyMatrix::operator*(const PolyMatrix& o) const {
  if (cols_ != o.rows_) throw std::invalid_argument("PolyMatrix*: shape");
  PolyMatrix out(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int k = 0; k < cols_; ++k) {
      const Poly& v = (*this)(i, k);
      if (v.is_zero()) continue;
      for (int j = 0; j < o.cols_; ++j) {
        if (o(k, j).is_zero()) continue;
        out(i, j) = out(i, j) + v * o(k, j);
      }
    }
  }
  return out;
}

PolyMatrix PolyMatrix::operator*(const Poly& s) const {
  PolyMatrix out(rows_, cols_);
  for (size_t k = 0; k < p_.size(); ++k) out.p_[k] = p_[k] * s;
  return out;
}

PolyMatrix PolyMatrix::operator*(const Rat& s) const {
  PolyMatrix out(rows_, cols_);
  for (size_t k = 0; k < p_.size(); ++k) out.p_[k] = p_[k] * s;
  return out;
}

PolyMatrix PolyMatrix::operator-() const { return (*this) * Rat(-1); }

bool PolyMatrix::operator==(const PolyMatrix& o) const {
  return rows_ == o.rows_ && cols_ == o.cols_ && p_ == o.p_;
}

PolyMatrix PolyMatrix::transpose() const {
  PolyMatrix out(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

PolyMatrix PolyMatrix::star() const {
  PolyMatrix out(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j).star();
  return out;
}

PolyMatrix PolyMatrix::block(int i, int j, int r, int c) const {
  PolyMatrix out(r, c);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < c; ++b) out(a, b) = (*this)(i + a, j + b);
  return out;
}

void PolyMatrix::set_block(int i, int j, const PolyMatrix& M) {
  for (int a = 0; a < M.rows(); ++a)
    for (int b = 0; b < M.cols(); ++b) (*this)(i + a, j + b) = M(a, b);
}

PolyMatrix PolyMatrix::hcat(const PolyMatrix& L, const PolyMatrix& R) {
  if (L.rows() != R.rows()) throw std::invalid_argument("PolyMatrix::hcat: shape");
  PolyMatrix out(L.rows(), L.cols() + R.cols());
  out.set_block(0, 0, L);
  out.set_block(0, L.cols(), R);
  return out;
}

PolyMatrix PolyMatrix::vcat(const PolyMatrix& T, const PolyMatrix& B) {
  if (T.cols() != B.cols()) throw std::invalid_argument("PolyMatrix::vcat: shape");
  PolyMatrix out(T.rows() + B.rows(), T.cols());
  out.set_block(0, 0, T);
  out.set_block(T.rows(), 0, B);
  return out;
}

bool PolyMatrix::is_zero() const {
  for (const auto& p : p_)
    if (!p.is_zero()) return false;
  return true;
}

int PolyMatrix::degree() const {
  int d = -1;
  for (const auto& p : p_) d = std::max(d, p.degree());
  return d;
}

RatMatrix PolyMatrix::coeff(int k) const {
  RatMatrix out(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(i, j) = (*this)(i, j).coeff(k);
  return out;
}

ComplexMatrix PolyMatrix::eval(Complex x) const {
  ComplexMatrix M(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) M(i, j) = (*this)(i, j).eval(x);
  return M;
}

RatMatrix PolyMatrix::eval_rat(const Rat& x) const {
  RatMatrix M(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) M(i, j) = (*this)(i, j).eval(x);
  return M;
}

Poly PolyMatrix::determinant() const {
  if (rows_ != cols_) throw std::invalid_argument("PolyMatrix::determinant: non-square");
  if (rows_ == 0) return Poly::one();
  if (rows_ == 1) return (*this)(0, 0);
  if (rows_ == 2) return (*this)(0, 0) * (*this)(1, 1) - (*this)(0, 1) * (*this)(1, 0);
  Poly det;
  int sign = 1;
  for (int j = 0; j < cols_; ++j) {
    if (!(*this)(0, j).is_zero()) {
      PolyMatrix minor(rows_ - 1, cols_ - 1);
      for (int r = 1; r < rows_; ++r) {
        int cc = 0;
        for (int c = 0; c < cols_; ++c) {
          if (c == j) continue;
          minor(r - 1, cc++) = (*this)(r, c);
        }
      }
      Poly term = (*this)(0, j) * minor.determinant();
      det = (sign > 0) ? det + term : det - term;
    }
    sign = -sign;
  }
  return det;
}

PolyMatrix PolyMatrix::adjugate() const {
  if (rows_ != cols_) throw std::invalid_argument("PolyMatrix::adjugate: non-square");
  const int n = rows_;
  PolyMatrix adj(n, n);
  if (n == 0) return adj;
  if (n == 1) {
    adj(0, 0) = Poly::one();
    return adj;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      PolyMatrix minor(n - 1, n - 1);
      for (int r = 0, rr = 0; r < n; ++r) {
        if (r == i) continue;
        for (int c = 0, cc = 0; c < n; ++c) {
          if (c == j) continue;
          minor(rr, cc++) = (*this)(r, c);
        }
        ++rr;
      }
      Poly cof = minor.determinant();
      adj(j, i) = ((i + j) % 2 == 0) ? cof : -cof;
    }
  }
  return adj;
}

bool PolyMatrix::is_unimodular() const {
  if (rows_ != cols_) return false;
  Poly det = determinant();
  return det.degree() == 0;
}

PolyMatrix PolyMatrix::inverse_unimodular() const {
  Poly det = determinant();
  if (det.degree() != 0) throw std::invalid_argument("inverse_unimodular: not unimodular");
  return adjugate() * (Rat(1) / det.coeff(0));
}

int PolyMatrix::normalrank() const {
  if (empty()) return 0;
  int best = 0;
  // Exact evaluation at a handful of rational points; rank at any point is a
  // lower bound for the normal rank and generically attains it.
  const long pts[] = {2, -3, 5, -7, 11};
  for (long p : pts) {
    best = std::max(best, eval_rat(rat_of(p, 13)).rank());
    if (best == std::min(rows_, cols_)) break;
  }
  return best;
}

std::string PolyMatrix::str() const {
  std::string s;
  for (int i = 0; i < rows_; ++i) {
    s += "[ ";
    for (int j = 0; j < cols_; ++j) {
      s += (*this)(i, j).str();
      if (j + 1 < cols_) s += " , ";
    }
    s += " ]\n";
  }
  return s;
}

PolyPair::PolyPair(PolyMatrix P_, PolyMatrix Q_) : P(std::move(P_)), Q(std::move(Q_)) {
  if (P.rows() != Q.rows() || Q.rows() != Q.cols()) {
    throw std::invalid_argument("PolyPair: P and Q must have equal rows and Q square");
  }
}

namespace {

void add_row_multiple(PolyMatrix& M, int dst, int src, const Poly& f) {
  for (int j = 0; j < M.cols(); ++j) M(dst, j) = M(dst, j) + f * M(src, j);
}

void swap_rows(PolyMatrix& M, int a, int b) {
  if (a == b) return;
  for (int j = 0; j < M.cols(); ++j) std::swap(M(a, j), M(b, j));
}

}  // namespace

RowTriangularization row_triangularize(const PolyMatrix& M) {
  RowTriangularization out;
  out.R = M;
  out.Y = PolyMatrix::identity(M.rows());
  int row = 0;
  for (int col = 0; col < M.cols() && row < M.rows(); ++col) {
    // Euclidean degree reduction among rows >= row in this column.
    for (;;) {
      int pivot = -1;
      for (int i = row; i < M.rows(); ++i) {
        if (out.R(i, col).is_zero()) continue;
        if (pivot < 0 || out.R(i, col).degree() < out.R(pivot, col).degree()) pivot = i;
      }
      if (pivot < 0) break;
      bool reduced_any = false;
      for (int i = row; i < M.rows(); ++i) {
        if (i == pivot || out.R(i, col).is_zero()) continue;
        const Poly& pi = out.R(i, col);
        const Poly& pp = out.R(pivot, col);
        const Poly f = Poly::xpow(pi.degree() - pp.degree(), -pi.lead() / pp.lead());
        add_row_multiple(out.R, i, pivot, f);
        add_row_multiple(out.Y, i, pivot, f);
        reduced_any = true;
      }
      if (!reduced_any) {
        swap_rows(out.R, row, pivot);
        swap_rows(out.Y, row, pivot);
        break;
      }
    }
    if (!out.R(row, col).is_zero()) {
      out.pivot_cols.push_back(col);
      ++row;
    }
  }
  return out;
}

RowReduction row_reduce(const PolyMatrix& M) {
  RowReduction out;
  out.R = M;
  out.Y = PolyMatrix::identity(M.rows());
  const int rows = M.rows();
  for (;;) {
    std::vector<int> nz;
    for (int i = 0; i < rows; ++i) {
      bool zero = true;
      for (int j = 0; j < M.cols(); ++j) zero = zero && out.R(i, j).is_zero();
      if (!zero) nz.push_back(i);
    }
    if (nz.empty()) break;
    // Highest-row-degree coefficient matrix of the nonzero rows.
    RatMatrix L(static_cast<int>(nz.size()), M.cols());
    std::vector<int> deg(nz.size());
    for (size_t k = 0; k < nz.size(); ++k) {
      int d = -1;
      for (int j = 0; j < M.cols(); ++j) d = std::max(d, out.R(nz[k], j).degree());
      deg[k] = d;
      for (int j = 0; j < M.cols(); ++j) L(static_cast<int>(k), j) = out.R(nz[k], j).coeff(d);
    }
    RatMatrix ker = L.transpose().kernel();  // left kernel of L
    if (ker.cols() == 0) break;
    // Use the first kernel direction; act on the row of maximal degree.
    int target = -1;
    for (int k = 0; k < static_cast<int>(nz.size()); ++k) {
      if (ker(k, 0) == 0) continue;
      if (target < 0 || deg[k] > deg[target]) target = k;
    }
    const Rat ct = ker(target, 0);
    for (int k = 0; k < static_cast<int>(nz.size()); ++k) {
      if (k == target || ker(k, 0) == 0) continue;
      const Poly f = Poly::xpow(deg[target] - deg[k], ker(k, 0) / ct);
      add_row_multiple(out.R, nz[target], nz[k], f);
      add_row_multiple(out.Y, nz[target], nz[k], f);
    }
  }
  // Push zero rows to the bottom.
  int write = 0;
  for (int i = 0; i < rows; ++i) {
    bool zero = true;
    for (int j = 0; j < M.cols(); ++j) zero = zero && out.R(i, j).is_zero();
    if (!zero) {
      swap_rows(out.R, write, i);
      swap_rows(out.Y, write, i);
      ++write;
    }
  }
  out.row_degrees.resize(rows);
  for (int i = 0; i < rows; ++i) {
    int d = -1;
    for (int j = 0; j < M.cols(); ++j) d = std::max(d, out.R(i, j).degree());
    out.row_degrees[i] = d;
  }
  return out;
}

Poly minor_gcd(const PolyMatrix& M, int k) {
  if (k <= 0) return Poly::one();
  if (k > std::min(M.rows(), M.cols())) return Poly();
  std::vector<int> rows_sel(k), cols_sel(k);
  Poly g;
  // Iterate over all k-subsets of rows and columns.
  std::vector<int> rc(k);
  for (int i = 0; i < k; ++i) rc[i] = i;
  auto next_subset = [](std::vector<int>& s, int n) {
    int k = static_cast<int>(s.size());
    int i = k - 1;
    while (i >= 0 && s[i] == n - k + i) --i;
    if (i < 0) return false;
    ++s[i];
    for (int j = i + 1; j < k; ++j) s[j] = s[j - 1] + 1;
    return true;
  };
  std::vector<int> rs(k);
  for (int i = 0; i < k; ++i) rs[i] = i;
  do {
    std::vector<int> cs(k);
    for (int i = 0; i < k; ++i) cs[i] = i;
    do {
      PolyMatrix sub(k, k);
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) sub(a, b) = M(rs[a], cs[b]);
      Poly det = sub.determinant();
      if (!det.is_zero()) {
        g = g.is_zero() ? det.monic() : Poly::gcd(g, det);
        if (g.degree() == 0) return Poly::one();
      }
    } while (next_subset(cs, M.cols()));
  } while (next_subset(rs, M.rows()));
  return g;  // zero when every k-minor vanishes
}

RatMatrix constant_kernel(const PolyMatrix& M) {
  const int dmax = std::max(M.degree(), 0);
  RatMatrix stacked(M.rows() * (dmax + 1), M.cols());
  for (int k = 0; k <= dmax; ++k) stacked.set_block(k * M.rows(), 0, M.coeff(k));
  return stacked.kernel();
}

PolyMatrix minimal_left_kernel(const PolyMatrix& M) {
  const int m = M.rows();
  const int expected = m - M.normalrank();
  PolyMatrix basis(0, m);
  if (expected == 0 || m == 0) return basis;
  const int degM = std::max(M.degree(), 0);
  std::vector<std::vector<Poly>> rows;   // basis rows
  std::vector<int> row_deg;
  const int delta_max = degM * m + m + 1;
  for (int delta = 0; delta <= delta_max && static_cast<int>(rows.size()) < expected; ++delta) {
    // Solve sum_{k} p_k^T M_l = 0 (all output coefficients) for polynomial
    // rows p of degree <= delta: right kernel of the transposed convolution.
    const int out_deg = delta + degM;
    RatMatrix sys((out_deg + 1) * M.cols(), (delta + 1) * m);
    for (int k = 0; k <= delta; ++k) {
      for (int l = 0; l <= degM; ++l) {
        RatMatrix Ml = M.coeff(l);
        // contribution p_k^T M_l to output coeff k + l: sys rows are output
        // coefficient equations (transposed), columns are unknowns p_k.
        for (int c = 0; c < M.cols(); ++c)
          for (int r = 0; r < m; ++r)
            sys((k + l) * M.cols() + c, k * m + r) = sys((k + l) * M.cols() + c, k * m + r) + Ml(r, c);
      }
    }
    RatMatrix ker = sys.kernel();
    if (ker.cols() == 0) continue;
    // Module span of existing basis rows up to degree delta, as coefficient
    // vectors of length (delta+1)*m.
    std::vector<std::vector<Rat>> span;
    for (size_t b = 0; b < rows.size(); ++b) {
      for (int shift = 0; shift + row_deg[b] <= delta; ++shift) {
        std::vector<Rat> vec((delta + 1) * m, Rat(0));
        for (int k = 0; k <= row_deg[b]; ++k)
          for (int r = 0; r < m; ++r) vec[(k + shift) * m + r] = rows[b][r].coeff(k);
        span.push_back(std::move(vec));
      }
    }
    for (int col = 0; col < ker.cols() && static_cast<int>(rows.size()) < expected; ++col) {
      std::vector<Rat> cand((delta + 1) * m);
      for (int i = 0; i < ker.rows(); ++i) cand[i] = ker(i, col);
      // Reject if in the span (exact Gaussian test).
      RatMatrix test(static_cast<int>(span.size()) + 1, (delta + 1) * m);
      for (size_t s = 0; s < span.size(); ++s)
        for (int j = 0; j < test.cols(); ++j) test(static_cast<int>(s), j) = span[s][j];
      for (int j = 0; j < test.cols(); ++j) test(static_cast<int>(span.size()), j) = cand[j];
      RatMatrix base(static_cast<int>(span.size()), (delta + 1) * m);
      for (size_t s = 0; s < span.size(); ++s)
        for (int j = 0; j < base.cols(); ++j) base(static_cast<int>(s), j) = span[s][j];
      if (test.rank() == base.rank()) continue;
      std::vector<Poly> row(m);
      for (int r = 0; r < m; ++r) {
        std::vector<Rat> c(delta + 1);
        for (int k = 0; k <= delta; ++k) c[k] = cand[k * m + r];
        row[r] = Poly(std::move(c));
      }
      int d = -1;
      for (const auto& p : row) d = std::max(d, p.degree());
      rows.push_back(row);
      row_deg.push_back(std::max(d, 0));
      span.push_back(cand);
    }
  }
  if (static_cast<int>(rows.size()) != expected) {
    throw std::runtime_error("minimal_left_kernel: basis search failed");
  }
  basis = PolyMatrix(expected, m);
  for (int i = 0; i < expected; ++i)
    for (int j = 0; j < m; ++j) basis(i, j) = rows[i][j];
  return basis;
}

std::optional<PolyMatrix> unimodular_left_factor(const PolyPair& pair1, const PolyPair& pair2) {
  if (pair1.io_rows() != pair2.io_rows() || pair1.u_dim() != pair2.u_dim()) return std::nullopt;
  // U = Q2 * Q1^{-1} must be polynomial and unimodular, with U P1 = P2.
  Poly det1 = pair1.Q.determinant();
  if (det1.is_zero()) return std::nullopt;
  PolyMatrix num = pair2.Q * pair1.Q.adjugate();
  PolyMatrix U(num.rows(), num.cols());
  for (int i = 0; i < num.rows(); ++i) {
    for (int j = 0; j < num.cols(); ++j) {
      Poly q;
      if (!Poly::divides(num(i, j), det1, &q)) return std::nullopt;
      U(i, j) = q;
    }
  }
  if (!U.is_unimodular()) return std::nullopt;
  if (!((U * pair1.P) == pair2.P)) return std::nullopt;
  if (!((U * pair1.Q) == pair2.Q)) return std::nullopt;
  return U;
}

}  // namespace ptk
