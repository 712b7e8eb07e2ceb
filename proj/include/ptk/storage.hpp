#pragma once

#include "ptk/state_space.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ptk {

/// Supply rate: passive sigma_p = u^T y, gain sigma_g = u^T u - y^T y.
enum class Supply { Passive, Gain };

inline const char* supply_name(Supply s) { return s == Supply::Passive ? "passive" : "gain"; }

/// Available energy/storage as a quadratic form. The stored value convention
/// is (1/2) x^T X x for the passive supply and x^T X x for the gain supply.
struct QuadraticStorage {
  Matrix X;
  Supply supply = Supply::Passive;

  double value(const Vector& x0) const {
    const double q = x0.dot(X * x0);
    return supply == Supply::Passive ? 0.5 * q : q;
  }
};

struct UnboundedWitness {
  Complex lambda;
  ComplexVector z;  // z^T [lambda I - A, B] = 0
};

struct LmiReport {
  bool feasible = false;
  bool boundary_flag = false;  // Hamiltonian eigenvalues on the axis
  double residual = 0.0;       // |Gamma(X)| or |Pi(X)|
  std::vector<Complex> closed_loop_spectrum;
  bool bounded_above = true;
  std::optional<UnboundedWitness> unbounded_witness;
  double kernel_margin = 0.0;  // max |X * ker(Vo)| and |Vo * ker(X)| residual
  std::string failure;
};

/// Omega(X) = [-A^T X - X A, C^T - X B; C - B^T X, D + D^T].
Matrix omega(const StateSpaceSystem& sys, const Matrix& X);

/// Lambda(X) = [-A^T X - X A - C^T C, -C^T D - X B; -D^T C - B^T X, I - D^T D].
Matrix lambda_lmi(const StateSpaceSystem& sys, const Matrix& X);

/// Gamma(X) Riccati residual for the passive supply (needs D + D^T > 0).
Matrix gamma_are(const StateSpaceSystem& sys, const Matrix& X);
Matrix a_gamma(const StateSpaceSystem& sys, const Matrix& X);

/// Pi(X) Riccati residual for the gain supply (needs I - D^T D > 0).
Matrix pi_are(const StateSpaceSystem& sys, const Matrix& X);
Matrix a_pi(const StateSpaceSystem& sys, const Matrix& X);

struct MinAreResult {
  bool ok = false;
  Matrix X;
  bool boundary_flag = false;
  double residual = 0.0;
  std::vector<Complex> closed_loop_spectrum;
  std::string failure;
};

/// Least solution of Gamma(X) = 0 (resp. Pi(X) = 0) with closed-loop
/// spectrum in the closed left half-plane. Controller staircase, the
/// stabilizing solution on the controllable part via the ordered Hamiltonian
/// Schur form, then the Sylvester and Lyapunov completions. Callers supply an
/// observable system (apply the observer staircase first).
MinAreResult solve_min_are(const StateSpaceSystem& sys, Supply supply);

struct AvailableEnergy {
  bool ok = false;
  QuadraticStorage storage;
  LmiReport report;
};

/// Available energy X_ for the regular case (D+D^T > 0 resp. I-D^TD > 0):
/// observer staircase, minimal ARE solution on the observable part, embedding
/// back, kernel checks, and the bounded-above diagnostic.
AvailableEnergy available_energy(const StateSpaceSystem& sys, Supply supply);

struct FeasibilityCheck {
  bool pass = false;
  double min_eig_X = 0.0;
  double min_eig_lmi = 0.0;
};

/// Reports the minimum eigenvalues of X and Omega(X)/Lambda(X); pass iff both
/// are >= -1e-9 (scaled by 1 + matrix norm).
FeasibilityCheck lmi_feasibility_check(const StateSpaceSystem& sys, const Matrix& X,
                                       Supply supply);

}  // namespace ptk
