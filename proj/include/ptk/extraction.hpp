#pragma once

#include "ptk/storage.hpp"

#include <optional>
#include <vector>

namespace ptk {

/// Static state feedback u = K x for energy extraction.
struct FeedbackLaw {
  enum class Kind { Exact, Epsilon };
  Matrix K;
  Kind kind = Kind::Exact;
  double epsilon = 0.0;
  Supply supply = Supply::Passive;
  std::vector<Complex> closed_loop_spectrum;
};

/// Optimal extraction feedback K = -(D+D^T)^{-1}(C - B^T X_) (passive) or
/// K = (I-D^TD)^{-1}(D^TC + B^T X_) (gain). Accepted when the closed loop is
/// strictly stable, or when every non-decaying closed-loop mode lies in
/// ker X_ (then the extracted energy still converges to the optimum);
/// otherwise throws and directs to epsilon_feedback.
FeedbackLaw exact_feedback(const StateSpaceSystem& sys, const Matrix& X_minus, Supply supply);

/// Remark-14 perturbed system. Passive: A_e = A - B(I+eD)^{-1} e C, etc.;
/// gain: (A, B, (1-e)C, (1-e)D).
StateSpaceSystem epsilon_transform(const StateSpaceSystem& sys, double eps, Supply supply);

struct EpsilonFeedbackResult {
  FeedbackLaw law;   // on the original coordinates
  Matrix X_eps;      // X_^eps embedded in the original coordinates
};

/// Solves the strict ARE on the eps-system (observable part) and maps the
/// feedback back to the original inputs.
EpsilonFeedbackResult epsilon_feedback(const StateSpaceSystem& sys, double eps, Supply supply);

struct ExtractionRun {
  Vector x0;
  double horizon = 0.0;
  double step = 0.0;
  std::vector<double> times;
  std::vector<Vector> states, inputs, outputs;
  std::vector<double> cumulative_energy;  // running quadrature of the supply integrand
  double extracted_energy = 0.0;
  double target = 0.0;  // S_a(x0)
};

/// Integrates the closed loop and accumulates -int u^T y (passive) or
/// int (y^T y - u^T u) (gain) by composite Simpson over the RK4 samples.
/// When `target` is absent it is computed from available_energy, falling
/// back to the reduction chain for the singular case.
ExtractionRun simulate_extraction(const StateSpaceSystem& sys, const FeedbackLaw& law,
                                  const Vector& x0, double horizon, double step,
                                  std::optional<double> target = std::nullopt);

/// Residual of the integrated storage identity
///   2 int u^T y - [x^T X x] = int [x;u]^T Omega(X) [x;u]   (passive), or the
/// Lambda form for the gain supply, evaluated on the recorded samples.
double energy_identity_check(const StateSpaceSystem& sys, const Matrix& X,
                             const ExtractionRun& run, Supply supply);

struct EpsilonSweep {
  std::vector<double> epsilons;
  std::vector<Matrix> X_eps;  // in original coordinates
  Matrix extrapolated;        // sqrt(eps)-polynomial extrapolation to eps -> 0
};

/// Geometric schedule eps_k = 0.2 * 2^-k, stopping at 1e-6 stagnation or
/// k = 12, with a three-point extrapolation in sqrt(eps).
EpsilonSweep epsilon_sweep(const StateSpaceSystem& sys, Supply supply);

}  // namespace ptk
