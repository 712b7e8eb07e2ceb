#pragma once

#include "ptk/linalg.hpp"
#include "ptk/rational.hpp"

#include <vector>

namespace ptk {

/// Dense matrix over exact rationals.
class RatMatrix {
 public:
  RatMatrix() = default;
  RatMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(rows * cols, Rat(0)) {}

  static RatMatrix identity(int n);
  static RatMatrix zero(int rows, int cols) { return RatMatrix(rows, cols); }
  static RatMatrix from_double(const Matrix& M, long max_den = 1000000, bool* exact = nullptr);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  Rat& operator()(int i, int j) { return a_[i * cols_ + j]; }
  const Rat& operator()(int i, int j) const { return a_[i * cols_ + j]; }

  RatMatrix transpose() const;
  RatMatrix block(int i, int j, int r, int c) const;
  void set_block(int i, int j, const RatMatrix& M);

  RatMatrix operator+(const RatMatrix& o) const;
  RatMatrix operator-(const RatMatrix& o) const;
  RatMatrix operator*(const RatMatrix& o) const;
  RatMatrix operator*(const Rat& s) const;
  RatMatrix operator-() const;
  bool operator==(const RatMatrix& o) const;

  bool is_zero() const;
  Matrix to_double() const;

  int rank() const;
  Rat determinant() const;
  RatMatrix inverse() const;  // throws on singular
  /// Orthogonal-free exact kernel: columns span {v : M v = 0}.
  RatMatrix kernel() const;
  /// Solves M X = RHS exactly (M square nonsingular).
  RatMatrix solve(const RatMatrix& rhs) const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Rat> a_;
};

/// Result of an exact symmetric congruence of a symmetric PSD matrix:
/// basis^T D basis = diag(pivots) with pivots > 0, and range(kernel_basis)
/// = ker(D). `indefinite` reports a negative direction (D not PSD).
struct SymmetricCongruence {
  RatMatrix basis;         // n x r
  std::vector<Rat> pivots; // r positive rationals
  RatMatrix kernel_basis;  // n x (n - r)
  bool indefinite = false;
};

SymmetricCongruence symmetric_congruence_psd(const RatMatrix& D);

}  // namespace ptk
