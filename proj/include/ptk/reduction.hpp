#pragma once

#include "ptk/behavior.hpp"
#include "ptk/pair_tests.hpp"
#include "ptk/storage.hpp"

#include <string>
#include <vector>

namespace ptk {

/// Spectral factor Z(xi) = W + L (xi I - A)^{-1} B of H + H* (passive) or
/// I - H*H (gain) for the referenced base system.
struct SpectralFactor {
  Matrix L;  // r x d
  Matrix W;  // r x n
  Supply supply = Supply::Passive;
  StateSpaceSystem base;

  ComplexMatrix eval(Complex s) const;
};

/// One step of the reduction chain with its forward transform data and the
/// realizations involved (before/after plus the alignment patch between the
/// freshly realized pair and the structured realization).
struct ReductionStep {
  enum class Kind { Symmetrize, Compress, DegreeReduce };
  Kind kind = Kind::Symmetrize;

  PolyPair pair_before, pair_after;

  // Symmetrize: skew offset (D - D^T)/2.
  RatMatrix skew_offset;
  // Compress: T = [T1a T1b T2], the triangularizing Y, blocks, and rank of D.
  RatMatrix T;
  PolyMatrix Y, Q12t, Q22t;
  int rank_r = 0;
  int n_after = 0;
  // Degree-reduce: residue K at infinity and the blocks of D_k.
  RatMatrix K;
  RatMatrix D12h, D21h, D22h;
  int r_prev = 0;

  StateSpaceSystem realization_before, realization_after;
  Matrix similarity_patch;  // maps structured realization coords to the fresh one
  bool exactness_degraded = false;
};

struct ReductionTrace {
  std::vector<ReductionStep> steps;
  bool exactness_degraded = false;
  std::vector<std::string> log;
};

struct FactorCheck {
  bool pass = false;
  bool hypotheses_met = true;  // spec(A) within the closed left half-plane
  double max_freq_error = 0.0;
  bool rank_ok = true;
  double min_rank_sv = 0.0;
  std::string detail;
};

struct ChainResult {
  bool ok = false;
  std::string verdict;  // "passive", "not passive", "non-expansive", ...
  PairVerdict pair_verdict;
  QuadraticStorage storage;
  SpectralFactor factor;
  ReductionTrace trace;
  LmiReport report;
  std::string failure;
};

/// Exact feedthrough D = lim Q^{-1} P (xi -> inf); throws when improper.
RatMatrix exact_feedthrough(const PolyPair& pair);

/// Lemma D.2: replace D by its symmetric part.
ReductionStep symmetrize_step(const PolyPair& pair, const RatSystem& sys);
/// Lemma D.3: compress the constant kernel of the transfer function and
/// normalize D to diag(I_r, 0) by exact congruence.
ReductionStep compress_step(const PolyPair& pair, const RatSystem& sys);
/// Lemma D.4: strip the residue K at infinity of P^{-1}Q, strictly reducing
/// deg det Q.
ReductionStep degree_reduce_step(const PolyPair& pair, const RatSystem& sys);

/// Theorem-5 computation of (X_, L, W) for the passive supply; works for
/// singular D + D^T via the reduction chain.
ChainResult run_chain_passive(const StateSpaceSystem& sys);

/// Theorem-11 computation for the gain supply via the signature transform;
/// rectangular systems are squared by zero padding.
ChainResult run_chain_gain(const StateSpaceSystem& sys);

/// Lemma D.1 checks: Z*Z matches the spectral density on the axis and Y(l)
/// keeps full row rank in the open right half-plane.
FactorCheck verify_spectral_factor(const StateSpaceSystem& sys, const SpectralFactor& factor);

}  // namespace ptk
