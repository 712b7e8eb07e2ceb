#pragma once

#include "ptk/behavior.hpp"
#include "ptk/poly_matrix.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ptk {

/// Outcome of a positive-real / bounded-real pair test. A fail always
/// carries a witness; condition (a) is a documented semi-decision (frequency
/// grid + exact root isolation + pole analysis of Q^{-1}P).
struct PairVerdict {
  enum class Outcome { Pass, Fail, BoundaryInconclusive };
  enum class Condition { None, A, B, C };

  Outcome outcome = Outcome::Pass;
  Condition failed_condition = Condition::None;
  Complex witness_lambda{0.0, 0.0};
  ComplexVector witness_vector;   // direction violating the condition
  PolyMatrix witness_poly_row;    // condition (c): the polynomial row p^T
  std::string detail;
  std::vector<double> sample_frequencies;  // condition (a) grid (omega values)
  double min_eig_seen = 0.0;               // most negative axis eigenvalue

  bool pass() const { return outcome == Outcome::Pass; }
  bool fail() const { return outcome == Outcome::Fail; }
};

/// Definition-4 test: (a) P(l)Q(l~)^T + Q(l)P(l~)^T >= 0 on C+, (b) full rank
/// of [P -Q] on closed C+, (c) kernel-direction condition.
PairVerdict is_positive_real_pair(const PolyPair& pair);

/// Definition-8 test with Psi = QQ* - PP*, rank m on closed C+.
PairVerdict is_bounded_real_pair(const PolyPair& pair);

/// Signature matrix from the maximal-determinantal-degree column selection;
/// deterministic tie-break: lexicographically smallest S1 indicator.
RatMatrix select_signature(const PolyPair& pair);

/// (P^, Q^) = ((P Sigma + Q)/2, (Q - P Sigma)/2); bounded-real pairs map to
/// positive-real pairs and back.
PolyPair br_to_pr(const PolyPair& pair, const RatMatrix& sigma);

/// Inverse of br_to_pr for the same signature.
PolyPair pr_to_br(const PolyPair& pair, const RatMatrix& sigma);

/// True iff the diagonal matrix has all entries +-1.
bool is_signature(const RatMatrix& sigma);

bool is_unimodular(const PolyMatrix& V);

}  // namespace ptk
