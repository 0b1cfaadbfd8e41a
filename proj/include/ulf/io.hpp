#pragma once

#include <json.hpp>

#include <fstream>
#include <optional>
#include <string>

#include "ulf/demos.hpp"
#include "ulf/lie.hpp"

namespace ulf {

using Json = nlohmann::ordered_json;

// ---- descriptors -----------------------------------------------------------

inline Json to_json(const FieldDescriptor& d) {
  Json j;
  j["kind"] = d.kind == FieldKind::padic ? "padic" : "laurent";
  j["p"] = d.p;
  if (d.kind == FieldKind::laurent) j["f"] = d.f;
  return j;
}

inline FieldDescriptor descriptor_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("p"))
    throw ParseError("field descriptor needs 'kind' and 'p'");
  FieldDescriptor d;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "padic")
    d.kind = FieldKind::padic;
  else if (kind == "laurent")
    d.kind = FieldKind::laurent;
  else
    throw ParseError("unknown field kind '" + kind + "'");
  d.p = j.at("p").get<std::uint64_t>();
  d.f = j.value("f", 1u);
  validate(d);
  return d;
}

// ---- elements, vectors, matrices -------------------------------------------

inline Json vec_to_json(const Vec& v) {
  Json j = Json::array();
  for (const auto& x : v) j.push_back(x.to_string());
  return j;
}

inline Json basis_to_json(const std::vector<Vec>& basis) {
  Json j = Json::array();
  for (const auto& v : basis) j.push_back(vec_to_json(v));
  return j;
}

inline Json matrix_to_json(const Matrix& m) {
  Json j = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(m.at(i, k).to_string());
    j.push_back(row);
  }
  return j;
}

inline Matrix matrix_from_json(const FieldDescriptor& d, const Json& j,
                               long prec = kDefaultPrecision) {
  if (!j.is_array() || j.empty()) throw ParseError("matrix must be a nonempty array of rows");
  std::vector<Vec> rows;
  for (const auto& row : j) {
    if (!row.is_array()) throw ParseError("matrix row must be an array");
    Vec r;
    for (const auto& cell : row) r.push_back(FieldElement::parse(d, cell.get<std::string>(), prec));
    rows.push_back(std::move(r));
  }
  return Matrix::from_rows(d, rows);
}

// ---- Lie algebra spec files -------------------------------------------------

struct LieSpecFile {
  FieldDescriptor field;
  LieAlgebra algebra;
  std::optional<Matrix> automorphism;
};

inline LieSpecFile lie_spec_from_json(const Json& j, long prec = kDefaultPrecision) {
  if (!j.is_object()) throw ParseError("spec file must be a JSON object");
  FieldDescriptor d = descriptor_from_json(j.at("field"));
  if (!j.contains("dim")) throw ParseError("spec file needs 'dim'");
  std::size_t dim = j.at("dim").get<std::size_t>();
  std::vector<BracketEntry> entries;
  for (const auto& b : j.value("brackets", Json::array())) {
    BracketEntry e{b.at("i").get<std::size_t>(), b.at("j").get<std::size_t>(),
                   b.at("k").get<std::size_t>(),
                   FieldElement::parse(d, b.at("c").get<std::string>(), prec)};
    entries.push_back(std::move(e));
  }
  LieSpecFile out{d, LieAlgebra(d, dim, std::move(entries)), std::nullopt};
  if (j.contains("automorphism")) {
    out.automorphism = matrix_from_json(d, j.at("automorphism"), prec);
    if (out.automorphism->rows() != dim || out.automorphism->cols() != dim)
      throw ParseError("automorphism shape does not match dim");
  }
  return out;
}

inline LieSpecFile lie_spec_from_file(const std::string& path, long prec = kDefaultPrecision) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open spec file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid JSON in '" + path + "': " + e.what());
  }
  return lie_spec_from_json(j, prec);
}

// ---- report fragments --------------------------------------------------------

inline Json convention_block(const FieldDescriptor& d) {
  Json j;
  j["a"] = "q = p^f = " + std::to_string(d.residue_size());
  j["log_scale"] =
      "absolute values are reported as valuations: |x| = a^{-v(x)}; all values exact rationals";
  return j;
}

inline Json polygon_to_json(const NewtonPolygon& np) {
  Json j = Json::array();
  for (const auto& s : np.segments) {
    Json seg;
    seg["valuation"] = rat_to_string(s.slope);
    seg["multiplicity"] = s.multiplicity;
    j.push_back(seg);
  }
  return j;
}

inline Json decomposition_to_json(const CharDecomposition& dec) {
  Json pieces = Json::array();
  for (const auto& p : dec.pieces) {
    Json piece;
    piece["valuation"] = rat_to_string(p.valuation);
    piece["dimension"] = p.basis.size();
    piece["basis"] = basis_to_json(p.basis);
    pieces.push_back(piece);
  }
  Json j;
  j["pieces"] = pieces;
  return j;
}

inline Json norm_to_json(const ValuationNorm& n) {
  Json j;
  std::vector<Vec> cols;
  for (std::size_t i = 0; i < n.basis.cols(); ++i) cols.push_back(n.basis.column(i));
  j["basis"] = basis_to_json(cols);
  Json shifts = Json::array();
  for (const auto& s : n.shifts) shifts.push_back(rat_to_string(s));
  j["shifts"] = shifts;
  return j;
}

inline Json gradation_to_json(const Gradation& g) {
  Json layers;
  for (const auto& [n, basis] : g.layers) {
    Json layer;
    layer["dimension"] = basis.size();
    layer["basis"] = basis_to_json(basis);
    layers[std::to_string(n)] = layer;
  }
  Json j;
  j["m"] = g.m;
  j["layers"] = layers;
  return j;
}

inline Json filtration_to_json(const Filtration& f) {
  Json j = Json::array();
  for (const auto& step : f.chain) {
    Json s;
    s["dimension"] = step.size();
    s["basis"] = basis_to_json(step);
    j.push_back(s);
  }
  return j;
}

inline Json checklist_to_json(const CheckList& c) {
  Json j = Json::array();
  for (const auto& ch : c.checks) {
    Json e;
    e["name"] = ch.name;
    e["status"] = ch.pass ? "pass" : "fail";
    e["witness"] = ch.witness;
    j.push_back(e);
  }
  return j;
}

// ---- analysis commands ---------------------------------------------------------

/// Shared head of every analysis report: convention, spectrum, norm, bounds.
inline Json analysis_head(const std::string& command, const LieSpecFile& spec, long prec,
                          std::uint64_t seed) {
  if (!spec.automorphism) throw ParseError("spec file needs an 'automorphism' for this command");
  const Matrix& b = *spec.automorphism;
  Json j;
  j["command"] = command;
  j["precision"] = prec;
  j["seed"] = seed;
  j["convention"] = convention_block(spec.field);
  j["field"] = to_json(spec.field);
  j["dim"] = spec.algebra.dim();
  spec.algebra.validate();
  CheckList checks;
  checks.add("jacobi", true, "all basis triples vanish exactly");
  check_lie_automorphism(spec.algebra, b, prec);
  checks.add("lie-automorphism", true, "brackets preserved exactly on all basis pairs");
  auto contract = is_contractive(b, prec);
  j["newton_polygon"] = polygon_to_json(contract.polygon);
  Json vals = Json::array();
  for (const auto& v : contract.polygon.slope_multiset()) vals.push_back(rat_to_string(v));
  j["valuations"] = vals;
  j["contractive"] = contract.contractive;
  if (!contract.contractive)
    throw NotContractive("automorphism is not contractive: characteristic valuation " +
                         rat_to_string(contract.polygon.segments[0].slope) + " <= 0");
  CharDecomposition dec = char_subspaces(b, prec);
  j["decomposition"] = decomposition_to_json(dec);
  checks.add("direct-sum", true, "stacked piece bases invertible; pieces invariant");
  ValuationNorm n = adapted_norm(b, prec);
  j["adapted_norm"] = norm_to_json(n);
  auto [theta, Theta] = operator_bounds(b, n, prec);
  Json ob;
  ob["theta_log"] = rat_to_string(theta);
  ob["Theta_log"] = rat_to_string(Theta);
  j["operator_bounds"] = ob;
  checks.add("adapted-norm", true, "w(Av) = w(v) + slope on every piece basis vector");
  j["checks"] = checklist_to_json(checks);
  return j;
}

inline Json run_analyze(const LieSpecFile& spec, long prec, std::uint64_t seed) {
  return analysis_head("analyze", spec, prec, seed);
}

inline Json run_gradation(const LieSpecFile& spec, long prec, std::uint64_t seed) {
  Json j = analysis_head("gradation", spec, prec, seed);
  Gradation g = gradation_from_automorphism(spec.algebra, *spec.automorphism, prec);
  j["gradation"] = gradation_to_json(g);
  j["m"] = g.m;
  Json checks = j["checks"];
  checks.push_back({{"name", "gradation-brackets"},
                    {"status", "pass"},
                    {"witness", "[g_r, g_s] within g_{r+s} on all layer basis pairs"}});
  j["checks"] = checks;
  return j;
}

inline Json run_central_series(const LieSpecFile& spec, long prec, std::uint64_t seed) {
  Json j = run_gradation(spec, prec, seed);
  j["command"] = "central-series";
  Filtration f = spectral_filtration(spec.algebra, *spec.automorphism, prec);
  j["filtration"] = filtration_to_json(f);
  auto lcs = lower_central_series(spec.algebra, prec);
  j["nilpotency_class"] =
      lcs.nilpotency_class ? Json(*lcs.nilpotency_class) : Json("inf");
  j["filtration_length"] = f.length();
  bool consistent = lcs.nilpotency_class && *lcs.nilpotency_class <= (long)f.length();
  Json checks = j["checks"];
  checks.push_back({{"name", "central-series"},
                    {"status", "pass"},
                    {"witness", "[g, F_j] within F_{j-1} exactly on all basis pairs"}});
  checks.push_back({{"name", "class-consistency"},
                    {"status", consistent ? "pass" : "fail"},
                    {"witness", "lower central series class <= filtration length"}});
  j["checks"] = checks;
  if (!consistent) throw CheckFailure("nilpotency class exceeds filtration length");
  return j;
}

inline Json run_integrate(const LieSpecFile& spec, long prec, std::uint64_t seed) {
  if (!spec.automorphism) throw ParseError("spec file needs an 'automorphism' for integrate");
  Json j;
  j["command"] = "integrate";
  j["precision"] = prec;
  j["seed"] = seed;
  j["convention"] = convention_block(spec.field);
  j["field"] = to_json(spec.field);
  j["dim"] = spec.algebra.dim();
  auto integ = bch_integrate(spec.algebra, *spec.automorphism, prec, seed);
  j["nilpotency_class"] = integ.group->nilpotency_class();
  j["bch_truncation_degree"] = integ.group->nilpotency_class();
  j["checks"] = checklist_to_json(integ.report);
  if (!integ.report.all_pass()) throw CheckFailure("BCH group verification failed");
  return j;
}

inline void write_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorClass::precondition, "cannot write to '" + tmp + "'");
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error(ErrorClass::precondition, "cannot rename temporary output to '" + path + "'");
}

}  // namespace ulf
