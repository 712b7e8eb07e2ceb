#pragma once

#include "ptk/linalg.hpp"
#include "ptk/rational.hpp"

#include <string>
#include <vector>

namespace ptk {

/// Univariate polynomial over exact rationals, coefficients ascending in xi.
class Poly {
 public:
  Poly() = default;
  explicit Poly(Rat constant) : c_{std::move(constant)} { trim(); }
  explicit Poly(std::vector<Rat> coeffs) : c_(std::move(coeffs)) { trim(); }

  static Poly zero() { return Poly(); }
  static Poly one() { return Poly(Rat(1)); }
  static Poly xpow(int k, Rat scale = Rat(1));

  int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for zero
  bool is_zero() const { return c_.empty(); }
  bool is_constant() const { return c_.size() <= 1; }
  const Rat& coeff(int k) const;
  Rat lead() const { return c_.empty() ? Rat(0) : c_.back(); }
  const std::vector<Rat>& coeffs() const { return c_; }

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator*(const Rat& s) const;
  Poly operator-() const;
  bool operator==(const Poly& o) const { return c_ == o.c_; }

  Poly star() const;  // p(-xi)
  Poly derivative() const;
  Rat eval(const Rat& x) const;
  Complex eval(Complex x) const;

  /// Exact Euclidean division: a = q*b + r with deg r < deg b.
  static std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b);
  /// True iff b divides a exactly; q receives the quotient.
  static bool divides(const Poly& a, const Poly& b, Poly* q = nullptr);
  static Poly gcd(const Poly& a, const Poly& b);  // monic

  Poly monic() const;
  Poly squarefree() const;

  /// All real roots, isolated by Sturm sequences and refined by bisection.
  std::vector<double> real_roots() const;
  /// All complex roots (double precision, companion matrix of the
  /// square-free part; multiplicities collapsed).
  std::vector<Complex> roots() const;
  /// Number of distinct real roots in (a, b] by Sturm count.
  int sturm_count(const Rat& a, const Rat& b) const;

  std::string str() const;

 private:
  void trim();
  std::vector<Rat> c_;
};

}  // namespace ptk
