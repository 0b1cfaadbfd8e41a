#pragma once

#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "ulf/spectral.hpp"

namespace ulf {

/// Sparse structure constant: [e_i, e_j] gains c * e_k, stored for i < j.
struct BracketEntry {
  std::size_t i, j, k;
  FieldElement c;
};

/// Lie algebra given by structure constants on a fixed basis. Antisymmetry
/// is implicit in the i < j storage; Jacobi is checked by validate().
class LieAlgebra {
public:
  LieAlgebra(const FieldDescriptor& d, std::size_t dim, std::vector<BracketEntry> entries)
      : desc_(d), dim_(dim), entries_(std::move(entries)) {
    for (const auto& e : entries_) {
      if (e.i >= e.j || e.j >= dim_ || e.k >= dim_)
        throw Error(ErrorClass::precondition, "bracket entry indices out of range (need i < j < dim)");
      require_same(d, e.c.descriptor());
    }
  }

  const FieldDescriptor& descriptor() const { return desc_; }
  std::size_t dim() const { return dim_; }
  const std::vector<BracketEntry>& entries() const { return entries_; }

  Vec basis_vector(std::size_t i) const {
    Vec v(dim_, FieldElement::zero(desc_));
    v[i] = FieldElement::one(desc_);
    return v;
  }

  Vec bracket(const Vec& x, const Vec& y) const {
    Vec r(dim_, FieldElement::zero(desc_));
    for (const auto& e : entries_) {
      FieldElement coeff = x[e.i] * y[e.j] - x[e.j] * y[e.i];
      if (coeff.is_zero()) continue;
      r[e.k] = r[e.k] + coeff * e.c;
    }
    return r;
  }

  bool is_abelian() const { return entries_.empty(); }

  /// Jacobi identity on every basis triple; throws JacobiViolation with the
  /// offending triple and residual otherwise.
  void validate() const {
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = i + 1; j < dim_; ++j)
        for (std::size_t k = j + 1; k < dim_; ++k) {
          Vec jac = bracket(bracket(basis_vector(i), basis_vector(j)), basis_vector(k));
          jac = vec_add(jac, bracket(bracket(basis_vector(j), basis_vector(k)), basis_vector(i)));
          jac = vec_add(jac, bracket(bracket(basis_vector(k), basis_vector(i)), basis_vector(j)));
          for (std::size_t t = 0; t < dim_; ++t)
            if (decide_zero(jac[t]) == ZeroDecision::nonzero) {
              std::string res = "(";
              for (std::size_t u = 0; u < dim_; ++u) res += (u ? ", " : "") + jac[u].to_string();
              throw JacobiViolation("Jacobi fails on basis triple (" + std::to_string(i) + "," +
                                    std::to_string(j) + "," + std::to_string(k) + "), residual " +
                                    res + ")");
            }
        }
  }

private:
  FieldDescriptor desc_;
  std::size_t dim_;
  std::vector<BracketEntry> entries_;
};

/// B[e_i, e_j] = [B e_i, B e_j] exactly on all pairs.
inline void check_lie_automorphism(const LieAlgebra& l, const Matrix& b,
                                   long prec = kDefaultPrecision) {
  if (b.rows() != l.dim() || b.cols() != l.dim())
    throw Error(ErrorClass::precondition, "automorphism dimension mismatch");
  if (!invertible(b, prec)) throw NotInvertible("candidate automorphism is singular");
  for (std::size_t i = 0; i < l.dim(); ++i)
    for (std::size_t j = i + 1; j < l.dim(); ++j) {
      Vec lhs = matvec(b, l.bracket(l.basis_vector(i), l.basis_vector(j)));
      Vec rhs = l.bracket(b.column(i), b.column(j));
      for (std::size_t t = 0; t < l.dim(); ++t)
        if (!equal_at_precision(lhs[t], rhs[t]))
          throw NotAutomorphism("bracket of basis pair (" + std::to_string(i) + "," +
                                std::to_string(j) + ") is not preserved, coordinate " +
                                std::to_string(t) + ": " + lhs[t].to_string() + " vs " +
                                rhs[t].to_string());
    }
}

// ---- gradations -----------------------------------------------------------

/// g = direct sum of g_n over n >= 1 with [g_r, g_s] in g_{r+s}; m is the
/// denominator-clearing scale (layer n sits at characteristic valuation n/m).
struct Gradation {
  long long m = 1;
  std::map<long long, std::vector<Vec>> layers;

  std::size_t total_dim() const {
    std::size_t d = 0;
    for (const auto& [n, b] : layers) d += b.size();
    return d;
  }
  std::vector<Vec> stacked() const {
    std::vector<Vec> out;
    for (const auto& [n, b] : layers) out.insert(out.end(), b.begin(), b.end());
    return out;
  }
  /// Layer dimensions with indices divided by their gcd, for round-trip
  /// comparisons that are insensitive to the chosen scale.
  std::map<long long, std::size_t> normalized_dims() const {
    long long g = 0;
    for (const auto& [n, b] : layers)
      if (!b.empty()) g = std::gcd(g, n);
    if (g == 0) g = 1;
    std::map<long long, std::size_t> out;
    for (const auto& [n, b] : layers)
      if (!b.empty()) out[n / g] = b.size();
    return out;
  }
};

namespace detail {

/// Certify [g_r, g_s] subset of g_{r+s} (zero when the layer is absent) for
/// the given layer bases; the thrower tailors the error type.
template <typename Thrower>
inline void check_layer_brackets(const LieAlgebra& l,
                                 const std::map<long long, std::vector<Vec>>& layers, long prec,
                                 Thrower&& fail) {
  for (const auto& [r, br] : layers)
    for (const auto& [s, bs] : layers) {
      if (r > s) continue;
      auto target = layers.find(r + s);
      for (const auto& x : br)
        for (const auto& y : bs) {
          Vec z = l.bracket(x, y);
          if (vec_min_valuation(z).is_infinite()) continue;
          bool ok = target != layers.end() && in_span(target->second, z, prec);
          if (target == layers.end()) {
            ok = true;
            for (const auto& c : z)
              if (decide_zero(c) == ZeroDecision::nonzero) ok = false;
          }
          if (!ok)
            fail("bracket of layers " + std::to_string(r) + " and " + std::to_string(s) +
                 " escapes layer " + std::to_string(r + s));
        }
    }
}

}  // namespace detail

/// Decompose a contractive Lie algebra automorphism into an N-gradation:
/// m clears the slope denominators and layer n is the characteristic
/// subspace at valuation n/m. Bracket containment is certified exactly.
inline Gradation gradation_from_automorphism(const LieAlgebra& l, const Matrix& b,
                                             long prec = kDefaultPrecision) {
  check_lie_automorphism(l, b, prec);
  auto contract = is_contractive(b, prec);
  if (!contract.contractive)
    throw NotContractive("automorphism has a characteristic valuation <= 0");
  CharDecomposition dec = char_subspaces(b, prec);
  std::vector<Rat> vals;
  for (const auto& p : dec.pieces) vals.push_back(p.valuation);
  long long m = denominator_lcm(vals);
  Gradation g;
  g.m = m;
  for (const auto& p : dec.pieces) {
    Rat idx = p.valuation * Rat(m);
    g.layers[idx.numerator()] = p.basis;
  }
  detail::check_layer_brackets(l, g.layers, prec, [](const std::string& w) {
    throw GradingViolation(w + " (grading guaranteed by the spectrum; precision failure)");
  });
  return g;
}

/// The converse direction: theta with v(theta) > 0 acts as theta^n on layer
/// n; the result is a contractive Lie algebra automorphism.
inline Matrix automorphism_from_gradation(const LieAlgebra& l, const Gradation& g,
                                          const FieldElement& theta,
                                          long prec = kDefaultPrecision) {
  require_same(l.descriptor(), theta.descriptor());
  auto tv = theta.valuation();
  if (!tv || *tv <= 0) throw NotContracting("need v(theta) > 0");
  if (g.total_dim() != l.dim()) throw InvalidGradation("layer dimensions do not sum to dim");
  for (const auto& [n, basis] : g.layers)
    if (n <= 0 && !basis.empty()) throw InvalidGradation("layer indices must be positive");
  const FieldDescriptor& d = l.descriptor();
  std::vector<Vec> cols = g.stacked();
  Matrix v = Matrix::from_columns(d, cols);
  if (!invertible(v, prec)) throw InvalidGradation("stacked layer bases are not a basis");
  detail::check_layer_brackets(l, g.layers, prec,
                               [](const std::string& w) { throw InvalidGradation(w); });
  Matrix vd(d, l.dim(), l.dim());
  std::size_t col = 0;
  for (const auto& [n, basis] : g.layers) {
    FieldElement tn = theta.pow((std::uint64_t)n);
    for (const auto& bvec : basis) {
      Vec scaled = vec_scale(tn, bvec);
      for (std::size_t i = 0; i < l.dim(); ++i) vd.at(i, col) = scaled[i];
      ++col;
    }
  }
  Matrix b = vd * inverse(v, prec);
  check_lie_automorphism(l, b, prec);
  return b;
}

// ---- filtration / central series ------------------------------------------

/// Ascending chain F_1 < F_2 < ... < F_m = g of ideals.
struct Filtration {
  std::vector<std::vector<Vec>> chain;
  std::size_t length() const { return chain.size(); }
};

namespace detail {

/// Canonical basis of the span of the given vectors (row-space reduction).
inline std::vector<Vec> span_basis(const FieldDescriptor& d, const std::vector<Vec>& vecs,
                                   std::size_t dim, long prec) {
  std::vector<Vec> nonzero;
  for (const auto& v : vecs)
    if (!vec_min_valuation(v).is_infinite()) nonzero.push_back(v);
  if (nonzero.empty()) return {};
  Matrix m = Matrix::from_rows(d, nonzero);
  auto res = eliminate(m, dim, prec, kMinSigDigits);
  std::vector<Vec> out;
  for (std::size_t r = 0; r < res.rank; ++r) {
    Vec v(dim, FieldElement::zero(d));
    for (std::size_t j = 0; j < dim; ++j) v[res.col_perm[j]] = res.m.at(r, j);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace detail

/// Central series from the spectrum: F_j is the sum of the j
/// fastest-contracting characteristic subspaces (largest valuations first).
/// [g, F_j] subset of F_{j-1} holds exactly because brackets add valuations.
inline Filtration spectral_filtration(const LieAlgebra& l, const Matrix& b,
                                      long prec = kDefaultPrecision) {
  check_lie_automorphism(l, b, prec);
  auto contract = is_contractive(b, prec);
  if (!contract.contractive) throw NotContractive("spectral filtration needs a contractive automorphism");
  CharDecomposition dec = char_subspaces(b, prec);
  Filtration f;
  std::vector<Vec> acc;
  for (auto it = dec.pieces.rbegin(); it != dec.pieces.rend(); ++it) {
    acc.insert(acc.end(), it->basis.begin(), it->basis.end());
    f.chain.push_back(acc);
  }
  // exact centrality: [g, F_j] in F_{j-1}; invariance of each F_j under b
  for (std::size_t j = 0; j < f.chain.size(); ++j) {
    const std::vector<Vec>* lower = j == 0 ? nullptr : &f.chain[j - 1];
    for (const auto& bv : f.chain[j]) {
      if (!in_span(f.chain[j], matvec(b, bv), prec))
        throw CentralityViolation("filtration step is not automorphism-invariant");
      for (std::size_t i = 0; i < l.dim(); ++i) {
        Vec z = l.bracket(l.basis_vector(i), bv);
        if (vec_min_valuation(z).is_infinite()) continue;
        bool ok = lower ? in_span(*lower, z, prec) : false;
        if (!lower) {
          ok = true;
          for (const auto& c : z)
            if (decide_zero(c) == ZeroDecision::nonzero) ok = false;
        }
        if (!ok)
          throw CentralityViolation("[g, F_" + std::to_string(j + 1) + "] escapes F_" +
                                    std::to_string(j) + " (impossible on exact inputs)");
      }
    }
  }
  return f;
}

/// Lower central series g >= [g,g] >= [g,[g,g]] >= ...; nilpotency class is
/// the number of nonzero terms, nullopt when the series stabilizes above 0.
struct LowerCentralSeries {
  std::vector<std::vector<Vec>> terms;  // terms[0] = g
  std::optional<long> nilpotency_class;
};

inline LowerCentralSeries lower_central_series(const LieAlgebra& l,
                                               long prec = kDefaultPrecision) {
  const FieldDescriptor& d = l.descriptor();
  LowerCentralSeries out;
  std::vector<Vec> current;
  for (std::size_t i = 0; i < l.dim(); ++i) current.push_back(l.basis_vector(i));
  out.terms.push_back(current);
  while (true) {
    std::vector<Vec> gens;
    for (std::size_t i = 0; i < l.dim(); ++i)
      for (const auto& y : current) gens.push_back(l.bracket(l.basis_vector(i), y));
    std::vector<Vec> next = detail::span_basis(d, gens, l.dim(), prec);
    if (next.empty()) {
      out.nilpotency_class = (long)out.terms.size();
      return out;
    }
    if (next.size() == current.size()) {
      out.terms.push_back(next);
      out.nilpotency_class = std::nullopt;  // stabilized above zero
      return out;
    }
    out.terms.push_back(next);
    current = std::move(next);
  }
}

/// Tight log-scale bilinear bound: w([x,y]) >= w(x) + w(y) + C_log for all
/// x, y, with C_log attained on a basis pair. Infinite for abelian algebras.
inline LogValue bracket_constant(const LieAlgebra& l, const ValuationNorm& n,
                                 long prec = kDefaultPrecision) {
  (void)prec;
  LogValue best = LogValue::infinity();
  for (std::size_t i = 0; i < n.basis.cols(); ++i)
    for (std::size_t j = i + 1; j < n.basis.cols(); ++j) {
      Vec z = l.bracket(n.basis.column(i), n.basis.column(j));
      LogValue w = n.value(z);
      if (w.is_infinite()) continue;
      LogValue cand(w.value() - n.shifts[i] - n.shifts[j]);
      best = min(best, cand);
    }
  return best;
}

}  // namespace ulf
