#include "ptk/system_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace ptk {

using nlohmann::json;

Supply SystemFile::effective_supply() const {
  if (supply) return *supply;
  if (sys && sys->inputs() == sys->outputs()) return Supply::Passive;
  if (!sys && pair && pair->u_dim() == pair->io_rows()) return Supply::Passive;
  return Supply::Gain;
}

namespace {

Rat rat_entry(const json& j, const std::string& where) {
  if (j.is_string()) return rat_parse(j.get<std::string>());
  if (j.is_number_integer()) return rat_of(j.get<long>());
  if (j.is_number_float()) return rat_from_double(j.get<double>());
  throw std::invalid_argument("parse error at " + where + ": expected number or rational string");
}

RatMatrix rat_matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw std::invalid_argument("parse error at " + where + ": expected array");
  const int rows = static_cast<int>(j.size());
  int cols = 0;
  if (rows > 0) {
    if (!j[0].is_array()) {
      throw std::invalid_argument("parse error at " + where + ": expected nested arrays");
    }
    cols = static_cast<int>(j[0].size());
  }
  RatMatrix M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols) {
      throw std::invalid_argument("parse error at " + where + "[" + std::to_string(i) +
                                  "]: ragged rows");
    }
    for (int c = 0; c < cols; ++c) {
      M(i, c) = rat_entry(j[i][c], where + "[" + std::to_string(i) + "][" + std::to_string(c) + "]");
    }
  }
  return M;
}

}  // namespace

Matrix matrix_from_json(const json& j) { return rat_matrix_from_json(j, "matrix").to_double(); }

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (int c = 0; c < M.cols(); ++c) row.push_back(M(i, c));
    rows.push_back(row);
  }
  return rows;
}

json poly_matrix_to_json(const PolyMatrix& M) {
  json coeffs = json::array();
  const int deg = std::max(M.degree(), 0);
  for (int k = 0; k <= deg; ++k) {
    RatMatrix Mk = M.coeff(k);
    json rows = json::array();
    for (int i = 0; i < Mk.rows(); ++i) {
      json row = json::array();
      for (int c = 0; c < Mk.cols(); ++c) row.push_back(rat_str(Mk(i, c)));
      rows.push_back(row);
    }
    coeffs.push_back(rows);
  }
  return coeffs;
}

PolyMatrix poly_matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument("parse error: polynomial matrix must be a nonempty array");
  }
  std::vector<RatMatrix> coeffs;
  for (size_t k = 0; k < j.size(); ++k) {
    coeffs.push_back(rat_matrix_from_json(j[k], "pair coefficient " + std::to_string(k)));
    if (k > 0 && (coeffs[k].rows() != coeffs[0].rows() || coeffs[k].cols() != coeffs[0].cols())) {
      throw std::invalid_argument("parse error: pair coefficient blocks differ in shape");
    }
  }
  return PolyMatrix::from_coeffs(coeffs);
}

SystemFile parse_system_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("parse error: ") + e.what());
  }
  SystemFile out;
  out.name = j.value("name", "unnamed");
  const bool has_ss = j.contains("A") || j.contains("B") || j.contains("C") || j.contains("D");
  if (has_ss) {
    if (!(j.contains("A") && j.contains("B") && j.contains("C") && j.contains("D"))) {
      throw std::invalid_argument("parse error: need all of A, B, C, D");
    }
    RatMatrix A = rat_matrix_from_json(j["A"], "A");
    RatMatrix B = rat_matrix_from_json(j["B"], "B");
    RatMatrix C = rat_matrix_from_json(j["C"], "C");
    RatMatrix D = rat_matrix_from_json(j["D"], "D");
    out.sys_exact = RatSystem(A, B, C, D);
    out.sys = out.sys_exact->to_double(out.name);
  }
  if (j.contains("pair")) {
    const json& p = j["pair"];
    if (!p.contains("P") || !p.contains("Q")) {
      throw std::invalid_argument("parse error: pair needs P and Q");
    }
    out.pair = PolyPair(poly_matrix_from_json(p["P"]), poly_matrix_from_json(p["Q"]));
  }
  if (!out.sys && !out.pair) {
    throw std::invalid_argument("parse error: need state-space matrices or a pair");
  }
  if (j.contains("supply")) {
    const std::string s = j["supply"].get<std::string>();
    if (s == "passive") {
      out.supply = Supply::Passive;
    } else if (s == "gain") {
      out.supply = Supply::Gain;
    } else {
      throw std::invalid_argument("parse error: supply must be 'passive' or 'gain'");
    }
  }
  return out;
}

SystemFile load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_system_text(ss.str());
}

namespace {

json complex_to_json(const Complex& z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

Complex complex_from_json(const json& j) { return Complex(j.at("re"), j.at("im")); }

json cvector_to_json(const ComplexVector& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(complex_to_json(v(i)));
  return arr;
}

ComplexVector cvector_from_json(const json& j) {
  ComplexVector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = complex_from_json(j[i]);
  return v;
}

}  // namespace

json Report::to_json() const {
  json j;
  j["verdict"] = verdict;
  j["X_minus"] = X_minus ? matrix_to_json(*X_minus) : json(nullptr);
  if (S_a_coefficients) {
    j["S_a"] = json{{"convention", S_a_convention},
                    {"coefficients", matrix_to_json(*S_a_coefficients)}};
  } else {
    j["S_a"] = nullptr;
  }
  j["L"] = L ? matrix_to_json(*L) : json(nullptr);
  j["W"] = W ? matrix_to_json(*W) : json(nullptr);
  j["bounded_above"] = bounded_above ? json(*bounded_above) : json(nullptr);
  if (witness_lambda) {
    json w;
    w["lambda"] = complex_to_json(*witness_lambda);
    if (witness_vector) w["z"] = cvector_to_json(*witness_vector);
    j["witness"] = w;
  } else {
    j["witness"] = nullptr;
  }
  j["trace"] = trace;
  j["elapsed_ms"] = elapsed_ms;
  j["detail"] = detail;
  return j;
}

Report Report::from_json(const json& j) {
  Report r;
  r.verdict = j.at("verdict").get<std::string>();
  if (!j.at("X_minus").is_null()) r.X_minus = matrix_from_json(j["X_minus"]);
  if (!j.at("S_a").is_null()) {
    r.S_a_convention = j["S_a"].at("convention").get<std::string>();
    r.S_a_coefficients = matrix_from_json(j["S_a"].at("coefficients"));
  }
  if (!j.at("L").is_null()) r.L = matrix_from_json(j["L"]);
  if (!j.at("W").is_null()) r.W = matrix_from_json(j["W"]);
  if (!j.at("bounded_above").is_null()) r.bounded_above = j["bounded_above"].get<bool>();
  if (!j.at("witness").is_null()) {
    r.witness_lambda = complex_from_json(j["witness"].at("lambda"));
    if (j["witness"].contains("z")) r.witness_vector = cvector_from_json(j["witness"]["z"]);
  }
  r.trace = j.at("trace").get<std::vector<std::string>>();
  r.elapsed_ms = j.at("elapsed_ms").get<double>();
  r.detail = j.value("detail", "");
  return r;
}

namespace {

bool opt_matrix_same(const std::optional<Matrix>& a, const std::optional<Matrix>& b, double tol) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  if (a->rows() != b->rows() || a->cols() != b->cols()) return false;
  return (*a - *b).norm() <= tol;
}

}  // namespace

bool Report::same_as(const Report& other, double tol) const {
  if (verdict != other.verdict || trace != other.trace || detail != other.detail) return false;
  if (bounded_above != other.bounded_above) return false;
  if (std::abs(elapsed_ms - other.elapsed_ms) > tol + 1e-12) return false;
  if (!opt_matrix_same(X_minus, other.X_minus, tol)) return false;
  if (!opt_matrix_same(S_a_coefficients, other.S_a_coefficients, tol)) return false;
  if (S_a_convention != other.S_a_convention) return false;
  if (!opt_matrix_same(L, other.L, tol)) return false;
  if (!opt_matrix_same(W, other.W, tol)) return false;
  if (witness_lambda.has_value() != other.witness_lambda.has_value()) return false;
  if (witness_lambda && std::abs(*witness_lambda - *other.witness_lambda) > tol) return false;
  return true;
}

std::vector<std::string> trace_strings(const ReductionTrace& trace) {
  std::vector<std::string> out;
  for (const auto& msg : trace.log) out.push_back("note: " + msg);
  int level = 1;
  for (const auto& st : trace.steps) {
    std::ostringstream os;
    os << "step " << level << ": ";
    switch (st.kind) {
      case ReductionStep::Kind::Symmetrize: {
        os << "symmetrize, skew offset = [";
        for (int i = 0; i < st.skew_offset.rows(); ++i) {
          for (int j = 0; j < st.skew_offset.cols(); ++j) {
            os << rat_str(st.skew_offset(i, j)) << (j + 1 < st.skew_offset.cols() ? " " : "");
          }
          os << (i + 1 < st.skew_offset.rows() ? "; " : "");
        }
        os << "]";
        break;
      }
      case ReductionStep::Kind::Compress: {
        os << "compress, rank(D) = " << st.rank_r << ", n -> " << st.n_after << ", T = [";
        for (int i = 0; i < st.T.rows(); ++i) {
          for (int j = 0; j < st.T.cols(); ++j) {
            os << rat_str(st.T(i, j)) << (j + 1 < st.T.cols() ? " " : "");
          }
          os << (i + 1 < st.T.rows() ? "; " : "");
        }
        os << "]";
        break;
      }
      case ReductionStep::Kind::DegreeReduce: {
        os << "degree-reduce, K = [";
        for (int i = 0; i < st.K.rows(); ++i) {
          for (int j = 0; j < st.K.cols(); ++j) {
            os << rat_str(st.K(i, j)) << (j + 1 < st.K.cols() ? " " : "");
          }
          os << (i + 1 < st.K.rows() ? "; " : "");
        }
        os << "], deg det Q: " << st.pair_before.Q.determinant().degree() << " -> "
           << st.pair_after.Q.determinant().degree();
        break;
      }
    }
    if (st.exactness_degraded) os << " (rationalized scaling)";
    out.push_back(os.str());
    ++level;
  }
  return out;
}

Report report_from_chain(const ChainResult& chain, double elapsed_ms, bool include_trace) {
  Report r;
  r.verdict = chain.verdict;
  r.elapsed_ms = elapsed_ms;
  r.detail = chain.failure;
  if (chain.ok) {
    r.X_minus = chain.storage.X;
    r.S_a_coefficients = chain.storage.X;
    r.S_a_convention =
        chain.storage.supply == Supply::Passive ? "x0'Xx0/2" : "x0'Xx0";
    r.L = chain.factor.L;
    r.W = chain.factor.W;
    r.bounded_above = chain.report.bounded_above;
    if (chain.report.unbounded_witness) {
      r.witness_lambda = chain.report.unbounded_witness->lambda;
      r.witness_vector = chain.report.unbounded_witness->z;
    }
  } else if (chain.pair_verdict.fail()) {
    r.witness_lambda = chain.pair_verdict.witness_lambda;
    if (chain.pair_verdict.witness_vector.size() > 0) {
      r.witness_vector = chain.pair_verdict.witness_vector;
    }
  }
  if (include_trace) r.trace = trace_strings(chain.trace);
  return r;
}

Report report_from_available(const AvailableEnergy& ae, Supply supply, double elapsed_ms) {
  Report r;
  r.elapsed_ms = elapsed_ms;
  if (ae.ok) {
    r.verdict = supply == Supply::Passive ? "passive" : "non-expansive";
    r.X_minus = ae.storage.X;
    r.S_a_coefficients = ae.storage.X;
    r.S_a_convention = supply == Supply::Passive ? "x0'Xx0/2" : "x0'Xx0";
    r.bounded_above = ae.report.bounded_above;
    if (ae.report.unbounded_witness) {
      r.witness_lambda = ae.report.unbounded_witness->lambda;
      r.witness_vector = ae.report.unbounded_witness->z;
    }
  } else {
    r.verdict = supply == Supply::Passive ? "not passive" : "not non-expansive";
    r.detail = ae.report.failure;
  }
  return r;
}

std::string extraction_table(const ExtractionRun& run) {
  std::ostringstream os;
  os << std::setprecision(10);
  const int d = run.states.empty() ? 0 : static_cast<int>(run.states[0].size());
  const int n = run.inputs.empty() ? 0 : static_cast<int>(run.inputs[0].size());
  const int m = run.outputs.empty() ? 0 : static_cast<int>(run.outputs[0].size());
  os << "# t";
  for (int i = 0; i < d; ++i) os << " x" << i + 1;
  for (int i = 0; i < n; ++i) os << " u" << i + 1;
  for (int i = 0; i < m; ++i) os << " y" << i + 1;
  os << " energy\n";
  for (size_t k = 0; k < run.times.size(); ++k) {
    os << run.times[k];
    for (int i = 0; i < d; ++i) os << " " << run.states[k](i);
    for (int i = 0; i < n; ++i) os << " " << run.inputs[k](i);
    for (int i = 0; i < m; ++i) os << " " << run.outputs[k](i);
    os << " " << run.cumulative_energy[k] << "\n";
  }
  return os.str();
}

}  // namespace ptk
