#include "ptk/rat_matrix.hpp"

#include <stdexcept>

namespace ptk {

RatMatrix RatMatrix::identity(int n) {
  RatMatrix M(n, n);
  for (int i = 0; i < n; ++i) M(i, i) = 1;
  return M;
}

RatMatrix RatMatrix::from_double(const Matrix& M, long max_den, bool* exact) {
  RatMatrix out(static_cast<int>(M.rows()), static_cast<int>(M.cols()));
  bool all_exact = true;
  for (int i = 0; i < out.rows(); ++i) {
    for (int j = 0; j < out.cols(); ++j) {
      bool e = true;
      out(i, j) = rat_from_double(M(i, j), max_den, &e);
      all_exact = all_exact && e;
    }
  }
  if (exact) *exact = all_exact;
  return out;
}

RatMatrix RatMatrix::transpose() const {
  RatMatrix out(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

RatMatrix RatMatrix::block(int i, int j, int r, int c) const {
  RatMatrix out(r, c);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < c; ++b) out(a, b) = (*this)(i + a, j + b);
  return out;
}

void RatMatrix::set_block(int i, int j, const RatMatrix& M) {
  for (int a = 0; a < M.rows(); ++a)
    for (int b = 0; b < M.cols(); ++b) (*this)(i + a, j + b) = M(a, b);
}

RatMatrix RatMatrix::operator+(const RatMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("RatMatrix+: shape");
  RatMatrix out(rows_, cols_);
  for (size_t k = 0; k < a_.size(); ++k) out.a_[k] = a_[k] + o.a_[k];
  return out;
}

RatMatrix RatMatrix::operator-(const RatMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("RatMatrix-: shape");
  RatMatrix out(rows_, cols_);
  for (size_t k = 0; k < a_.size(); ++k) out.a_[k] = a_[k] - o.a_[k];
  return out;
}

RatMatrix RatMatrix::operator*(const RatMatrix& o) const {
  if (cols_ != o.rows_) throw std::invalid_argument("RatMatrix*: shape");
  RatMatrix out(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int k = 0; k < cols_; ++k) {
      const Rat& v = (*this)(i, k);
      if (v == 0) continue;
      for (int j = 0; j < o.cols_; ++j) out(i, j) += v * o(k, j);
    }
  }
  return out;
}

RatMatrix RatMatrix::operator*(const Rat& s) const {
  RatMatrix out(rows_, cols_);
  for (size_t k = 0; k < a_.size(); ++k) out.a_[k] = a_[k] * s;
  return out;
}

RatMatrix RatMatrix::operator-() const { return (*this) * Rat(-1); }

bool RatMatrix::operator==(const RatMatrix& o) const {
  return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
}

bool RatMatrix::is_zero() const {
  for (const auto& v : a_)
    if (v != 0) return false;
  return true;
}

Matrix RatMatrix::to_double() const {
  Matrix M(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) M(i, j) = rat_to_double((*this)(i, j));
  return M;
}

namespace {

// Gauss-Jordan elimination; returns pivot columns. If `inv` is non-null it
// must start as the identity and receives the row operations.
struct Echelon {
  RatMatrix R;
  std::vector<int> pivot_cols;
};

Echelon rref(const RatMatrix& M, RatMatrix* inv = nullptr) {
  Echelon out{M, {}};
  RatMatrix& R = out.R;
  int row = 0;
  for (int col = 0; col < R.cols() && row < R.rows(); ++col) {
    int piv = -1;
    for (int i = row; i < R.rows(); ++i) {
      if (R(i, col) != 0) {
        piv = i;
        break;
      }
    }
    if (piv < 0) continue;
    if (piv != row) {
      for (int j = 0; j < R.cols(); ++j) std::swap(R(row, j), R(piv, j));
      if (inv)
        for (int j = 0; j < inv->cols(); ++j) std::swap((*inv)(row, j), (*inv)(piv, j));
    }
    const Rat p = R(row, col);
    for (int j = 0; j < R.cols(); ++j) R(row, j) /= p;
    if (inv)
      for (int j = 0; j < inv->cols(); ++j) (*inv)(row, j) /= p;
    for (int i = 0; i < R.rows(); ++i) {
      if (i == row || R(i, col) == 0) continue;
      const Rat f = R(i, col);
      for (int j = 0; j < R.cols(); ++j) R(i, j) -= f * R(row, j);
      if (inv)
        for (int j = 0; j < inv->cols(); ++j) (*inv)(i, j) -= f * (*inv)(row, j);
    }
    out.pivot_cols.push_back(col);
    ++row;
  }
  return out;
}

}  // namespace

int RatMatrix::rank() const { return static_cast<int>(rref(*this).pivot_cols.size()); }

Rat RatMatrix::determinant() const {
  if (rows_ != cols_) throw std::invalid_argument("RatMatrix::determinant: non-square");
  RatMatrix R = *this;
  Rat det = 1;
  for (int col = 0; col < cols_; ++col) {
    int piv = -1;
    for (int i = col; i < rows_; ++i) {
      if (R(i, col) != 0) {
        piv = i;
        break;
      }
    }
    if (piv < 0) return Rat(0);
    if (piv != col) {
      for (int j = 0; j < cols_; ++j) std::swap(R(col, j), R(piv, j));
      det = -det;
    }
    det *= R(col, col);
    const Rat p = R(col, col);
    for (int i = col + 1; i < rows_; ++i) {
      if (R(i, col) == 0) continue;
      const Rat f = R(i, col) / p;
      for (int j = col; j < cols_; ++j) R(i, j) -= f * R(col, j);
    }
  }
  return det;
}

RatMatrix RatMatrix::inverse() const {
  if (rows_ != cols_) throw std::invalid_argument("RatMatrix::inverse: non-square");
  RatMatrix inv = identity(rows_);
  auto e = rref(*this, &inv);
  if (static_cast<int>(e.pivot_cols.size()) != rows_) {
    throw std::runtime_error("RatMatrix::inverse: singular matrix");
  }
  return inv;
}

RatMatrix RatMatrix::kernel() const {
  auto e = rref(*this);
  const int r = static_cast<int>(e.pivot_cols.size());
  std::vector<bool> is_pivot(cols_, false);
  for (int c : e.pivot_cols) is_pivot[c] = true;
  RatMatrix K(cols_, cols_ - r);
  int kcol = 0;
  for (int free = 0; free < cols_; ++free) {
    if (is_pivot[free]) continue;
    K(free, kcol) = 1;
    for (int i = 0; i < r; ++i) K(e.pivot_cols[i], kcol) = -e.R(i, free);
    ++kcol;
  }
  return K;
}

RatMatrix RatMatrix::solve(const RatMatrix& rhs) const {
  if (rows_ != cols_ || rhs.rows() != rows_) throw std::invalid_argument("RatMatrix::solve: shape");
  return inverse() * rhs;
}

SymmetricCongruence symmetric_congruence_psd(const RatMatrix& D) {
  const int n = D.rows();
  if (D.cols() != n) throw std::invalid_argument("symmetric_congruence_psd: non-square");
  SymmetricCongruence out;
  RatMatrix S = D;
  RatMatrix U = RatMatrix::identity(n);  // accumulated congruence, columns
  std::vector<int> pivot_idx;
  std::vector<bool> used(n, false);
  // Diagonal pivoting: for a PSD matrix, a zero diagonal forces a zero
  // row/column, so diagonal pivots suffice; a nonzero off-diagonal with zero
  // diagonal certifies indefiniteness.
  for (;;) {
    int piv = -1;
    for (int i = 0; i < n; ++i) {
      if (!used[i] && S(i, i) != 0) {
        piv = i;
        break;
      }
    }
    if (piv < 0) break;
    if (S(piv, piv) < 0) {
      out.indefinite = true;
      return out;
    }
    used[piv] = true;
    pivot_idx.push_back(piv);
    const Rat p = S(piv, piv);
    for (int j = 0; j < n; ++j) {
      if (j == piv || used[j] || S(piv, j) == 0) continue;
      const Rat f = S(piv, j) / p;
      // column op: col_j -= f col_piv, and symmetric row op
      for (int i = 0; i < n; ++i) S(i, j) -= f * S(i, piv);
      for (int i = 0; i < n; ++i) S(j, i) -= f * S(piv, i);
      for (int i = 0; i < n; ++i) U(i, j) -= f * U(i, piv);
    }
  }
  // Remaining unused indices must have identically zero rows/cols in S.
  for (int i = 0; i < n; ++i) {
    if (used[i]) continue;
    for (int j = 0; j < n; ++j) {
      if (S(i, j) != 0 || S(j, i) != 0) {
        out.indefinite = true;
        return out;
      }
    }
  }
  const int r = static_cast<int>(pivot_idx.size());
  out.basis = RatMatrix(n, r);
  out.pivots.resize(r);
  for (int k = 0; k < r; ++k) {
    out.pivots[k] = S(pivot_idx[k], pivot_idx[k]);
    for (int i = 0; i < n; ++i) out.basis(i, k) = U(i, pivot_idx[k]);
  }
  out.kernel_basis = RatMatrix(n, n - r);
  int kc = 0;
  for (int i = 0; i < n; ++i) {
    if (used[i]) continue;
    for (int row = 0; row < n; ++row) out.kernel_basis(row, kc) = U(row, i);
    ++kc;
  }
  return out;
}

}  // namespace ptk
