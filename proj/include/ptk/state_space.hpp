#pragma once

#include "ptk/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ptk {

/// Continuous-time LTI system dx/dt = A x + B u, y = C x + D u.
struct StateSpaceSystem {
  Matrix A, B, C, D;
  std::string label;

  StateSpaceSystem() : A(0, 0), B(0, 0), C(0, 0), D(0, 0) {}
  StateSpaceSystem(Matrix A_, Matrix B_, Matrix C_, Matrix D_, std::string label_ = "");

  int states() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(B.cols()); }
  int outputs() const { return static_cast<int>(C.rows()); }
};

/// Stacked observability matrix col(C, CA, ..., CA^{d-1}).
Matrix observability_matrix(const StateSpaceSystem& sys);

enum class StaircaseKind { Observer, Controller };

struct StaircaseDecomposition {
  Matrix T, T_inv;  // x_new = T x
  int retained_dim = 0;
  StaircaseKind kind = StaircaseKind::Observer;
  // Blocks of T A T^{-1}; the structural zero block is A12 for the observer
  // form and A21 for the controller form.
  Matrix A11, A12, A21, A22;
  Matrix B1, B2, C1, C2;

  /// The retained (observable or controllable) subsystem.
  StateSpaceSystem retained(const StateSpaceSystem& sys) const;
};

/// Orthogonal similarity isolating the observable part: T A T^{-1} has zero
/// top-right block and C T^{-1} = [C1 0].
StaircaseDecomposition observer_staircase(const StateSpaceSystem& sys);

/// Orthogonal similarity isolating the controllable part: T A T^{-1} has zero
/// bottom-left block and T B = col(B1, 0).
StaircaseDecomposition controller_staircase(const StateSpaceSystem& sys);

/// State-space similarity x2 = T x1 between two observable realizations of
/// the same external behavior. Verifies all four identities to 1e-8.
Matrix realization_similarity(const StateSpaceSystem& sys1, const StateSpaceSystem& sys2);

/// H(s) = D + C (sI - A)^{-1} B.
ComplexMatrix transfer_eval(const StateSpaceSystem& sys, Complex s);

struct UncontrollableMode {
  Complex lambda;
  ComplexVector left_null;  // z with z^T [lambda I - A, B] = 0
};

/// Eigenvalues of the uncontrollable part, each with a left null vector of
/// [lambda I - A, B].
std::vector<UncontrollableMode> uncontrollable_modes(const StateSpaceSystem& sys);

/// Similarity transform of the whole system: (TAT^{-1}, TB, CT^{-1}, D).
StateSpaceSystem apply_similarity(const StateSpaceSystem& sys, const Matrix& T);

}  // namespace ptk
