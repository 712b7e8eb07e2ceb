#pragma once

#include "ptk/poly.hpp"
#include "ptk/rat_matrix.hpp"

#include <optional>
#include <vector>

namespace ptk {

/// Matrix over exact-rational polynomials in xi.
class PolyMatrix {
 public:
  PolyMatrix() = default;
  PolyMatrix(int rows, int cols) : rows_(rows), cols_(cols), p_(rows * cols) {}

  static PolyMatrix identity(int n);
  static PolyMatrix zero(int rows, int cols) { return PolyMatrix(rows, cols); }
  static PolyMatrix constant(const RatMatrix& M);
  /// Builds sum_k coeffs[k] * xi^k from constant blocks (ascending degree).
  static PolyMatrix from_coeffs(const std::vector<RatMatrix>& coeffs);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  Poly& operator()(int i, int j) { return p_[i * cols_ + j]; }
  const Poly& operator()(int i, int j) const { return p_[i * cols_ + j]; }

  PolyMatrix operator+(const PolyMatrix& o) const;
  PolyMatrix operator-(const PolyMatrix& o) const;
  PolyMatrix operator*(const PolyMatrix& o) const;
  PolyMatrix operator*(const Poly& s) const;
  PolyMatrix operator*(const Rat& s) const;
  PolyMatrix operator-() const;
  bool operator==(const PolyMatrix& o) const;

  PolyMatrix transpose() const;
  /// Para-conjugate M*(xi) = M(-xi)^T.
  PolyMatrix star() const;
  PolyMatrix block(int i, int j, int r, int c) const;
  void set_block(int i, int j, const PolyMatrix& M);
  static PolyMatrix hcat(const PolyMatrix& L, const PolyMatrix& R);
  static PolyMatrix vcat(const PolyMatrix& T, const PolyMatrix& B);

  bool is_zero() const;
  int degree() const;  // max entry degree, -1 if zero matrix
  RatMatrix coeff(int k) const;
  ComplexMatrix eval(Complex x) const;
  RatMatrix eval_rat(const Rat& x) const;

  Poly determinant() const;  // cofactor expansion (small sizes)
  PolyMatrix adjugate() const;
  bool is_unimodular() const;
  /// Polynomial inverse of a unimodular matrix.
  PolyMatrix inverse_unimodular() const;

  /// Exact rank over the rational-function field (evaluation at random
  /// rational points).
  int normalrank() const;

  std::string str() const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Poly> p_;
};

/// Kernel-representation pair P(d/dt) u = Q(d/dt) y; P is m x n, Q is m x m.
struct PolyPair {
  PolyMatrix P, Q;

  PolyPair() = default;
  PolyPair(PolyMatrix P_, PolyMatrix Q_);
  int io_rows() const { return P.rows(); }
  int u_dim() const { return P.cols(); }
  int y_dim() const { return Q.cols(); }
};

struct RowTriangularization {
  PolyMatrix Y;  // unimodular
  PolyMatrix R;  // Y*M, upper echelon (pivot structure in `pivot_cols`)
  std::vector<int> pivot_cols;
};

/// Unimodular row reduction of M to upper-echelon form (Hermite-style,
/// without degree normalization of off-pivot entries).
RowTriangularization row_triangularize(const PolyMatrix& M);

struct RowReduction {
  PolyMatrix Y;  // unimodular
  PolyMatrix R;  // Y*M, row-reduced (row-proper); zero rows last
  std::vector<int> row_degrees;
};

/// Unimodular reduction to a row-reduced matrix: the highest-row-degree
/// coefficient matrix of the nonzero rows has full row rank.
RowReduction row_reduce(const PolyMatrix& M);

/// gcd of all k x k minors of M (monic); zero when all minors vanish.
Poly minor_gcd(const PolyMatrix& M, int k);

/// Exact constant right kernel {v : M(xi) v = 0 for all xi}.
RatMatrix constant_kernel(const PolyMatrix& M);

/// Minimal polynomial basis (rows) of the left kernel {p(xi)^T : p^T M = 0}.
PolyMatrix minimal_left_kernel(const PolyMatrix& M);

/// If pair2 = U * pair1 for a unimodular U, returns U.
std::optional<PolyMatrix> unimodular_left_factor(const PolyPair& pair1, const PolyPair& pair2);

}  // namespace ptk
