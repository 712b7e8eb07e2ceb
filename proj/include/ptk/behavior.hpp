#pragma once

#include "ptk/poly_matrix.hpp"
#include "ptk/state_space.hpp"

#include <optional>

namespace ptk {

/// State-space system with exact rational entries.
struct RatSystem {
  RatMatrix A, B, C, D;

  RatSystem() = default;
  RatSystem(RatMatrix A_, RatMatrix B_, RatMatrix C_, RatMatrix D_);
  static RatSystem from_double(const StateSpaceSystem& sys, long max_den = 1000000,
                               bool* exact = nullptr);

  int states() const { return A.rows(); }
  int inputs() const { return B.cols(); }
  int outputs() const { return C.rows(); }
  StateSpaceSystem to_double(const std::string& label = "") const;
  /// H(x) = D + C (xI - A)^{-1} B at a rational point (throws at eigenvalues).
  RatMatrix transfer_at(const Rat& x) const;
};

/// Exact observer staircase: x_new = T x with T A T^{-1} = [A11 0; A21 A22],
/// C T^{-1} = [C1 0], and (C1, A11) observable.
struct RatStaircase {
  RatMatrix T, T_inv;
  int retained_dim = 0;
  RatSystem observable;  // (A11, B1, C1, D)
};

RatStaircase rat_observer_staircase(const RatSystem& sys);

/// Output of the kernel-representation extraction: the behavior pair plus
/// the unimodular completion certificate (G = I form).
struct BehaviorRealization {
  PolyPair pair;
  PolyMatrix M, N, U, V, E, F;  // certificate blocks
  std::optional<RatStaircase> staircase;  // set when the input was unobservable
  RatSystem observable;                   // the realization the pair was read from
};

/// Kernel representation P(d/dt) u = Q(d/dt) y of the external behavior.
/// Unobservable inputs are reduced by the exact observer staircase first.
BehaviorRealization behavior_from_realization(const RatSystem& sys);

/// Observable realization of a pair with Q nonsingular and Q^{-1}P proper.
/// Built from the shift realization of the row-reduced left fraction; the
/// result round-trips through behavior_from_realization up to a unimodular
/// left factor (verified exactly).
RatSystem realize_observable(const PolyPair& pair);

}  // namespace ptk
