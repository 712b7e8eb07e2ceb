#pragma once

#include "ptk/behavior.hpp"
#include "ptk/extraction.hpp"
#include "ptk/reduction.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace ptk {

/// Parsed system file: named state-space matrices and/or a polynomial pair,
/// with an optional supply tag. Numeric entries accept integers, decimals,
/// and rational strings "p/q"; exact values are kept alongside the doubles.
struct SystemFile {
  std::string name;
  std::optional<StateSpaceSystem> sys;
  std::optional<RatSystem> sys_exact;
  std::optional<PolyPair> pair;
  std::optional<Supply> supply;

  Supply effective_supply() const;
};

SystemFile parse_system_text(const std::string& text);
SystemFile load_system_file(const std::string& path);

nlohmann::json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json poly_matrix_to_json(const PolyMatrix& M);
PolyMatrix poly_matrix_from_json(const nlohmann::json& j);

/// Machine-readable result document; keys: verdict, X_minus, S_a, L, W,
/// bounded_above, witness, trace, elapsed_ms.
struct Report {
  std::string verdict;
  std::optional<Matrix> X_minus;
  std::optional<Matrix> S_a_coefficients;  // quadratic-form matrix
  std::string S_a_convention;              // "x0'Xx0/2" or "x0'Xx0"
  std::optional<Matrix> L, W;
  std::optional<bool> bounded_above;
  std::optional<Complex> witness_lambda;
  std::optional<ComplexVector> witness_vector;
  std::vector<std::string> trace;
  double elapsed_ms = 0.0;
  std::string detail;

  nlohmann::json to_json() const;
  static Report from_json(const nlohmann::json& j);
  bool same_as(const Report& other, double tol = 0.0) const;
};

Report report_from_chain(const ChainResult& chain, double elapsed_ms,
                         bool include_trace);
Report report_from_available(const AvailableEnergy& ae, Supply supply, double elapsed_ms);

/// Reduction trace rendered as one string per step (exact rational data).
std::vector<std::string> trace_strings(const ReductionTrace& trace);

/// Columnar text table (t, x..., u..., y..., cumulative energy).
std::string extraction_table(const ExtractionRun& run);

}  // namespace ptk
