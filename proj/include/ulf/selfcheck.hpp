#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "ulf/io.hpp"

namespace ulf {

struct CriterionResult {
  int id;
  std::string name;
  bool pass;
  std::string detail;
  double seconds = 0;
};

// ---- corpus of graded nilpotent Lie algebras --------------------------------

struct CorpusEntry {
  std::string label;
  FieldDescriptor field;
  LieAlgebra algebra;
  Gradation gradation;
  FieldElement theta;
};

namespace detail {

struct CorpusBuilder {
  FieldDescriptor d;
  SampleRng& rng;

  FieldElement unit() {
    return FieldElement::from_integer(d, 1 + (long long)rng.next(d.p - 1));
  }

  CorpusEntry abelian(std::size_t dim) {
    Gradation g;
    g.m = 1;
    LieAlgebra l(d, dim, {});
    for (std::size_t i = 0; i < dim; ++i)
      g.layers[1 + (long long)rng.next(3)].push_back(l.basis_vector(i));
    return {"abelian-" + std::to_string(dim), d, std::move(l), std::move(g), theta()};
  }

  CorpusEntry heisenberg_type(std::size_t nv, std::size_t nz) {
    std::size_t dim = nv + nz;
    std::vector<BracketEntry> entries;
    for (std::size_t i = 0; i < nv; ++i)
      for (std::size_t j = i + 1; j < nv; ++j)
        for (std::size_t k = 0; k < nz; ++k) {
          long long c = (i == 0 && j == 1 && k == 0) ? 1 : (long long)rng.next(d.p);
          if (c) entries.push_back({i, j, nv + k, FieldElement::from_integer(d, c)});
        }
    LieAlgebra l(d, dim, std::move(entries));
    Gradation g;
    g.m = 1;
    for (std::size_t i = 0; i < nv; ++i) g.layers[1].push_back(l.basis_vector(i));
    for (std::size_t k = 0; k < nz; ++k) g.layers[2].push_back(l.basis_vector(nv + k));
    return {"heisenberg-" + std::to_string(nv) + "+" + std::to_string(nz), d, std::move(l),
            std::move(g), theta()};
  }

  CorpusEntry filiform(std::size_t dim) {
    std::vector<BracketEntry> entries;
    for (std::size_t i = 1; i + 1 < dim; ++i)
      entries.push_back({0, i, i + 1, FieldElement::one(d)});
    LieAlgebra l(d, dim, std::move(entries));
    Gradation g;
    g.m = 1;
    g.layers[1].push_back(l.basis_vector(0));
    for (std::size_t i = 1; i < dim; ++i) g.layers[(long long)i].push_back(l.basis_vector(i));
    return {"filiform-" + std::to_string(dim), d, std::move(l), std::move(g), theta()};
  }

  CorpusEntry heisenberg_plus_abelian() {
    std::vector<BracketEntry> entries{{0, 1, 2, FieldElement::from_integer(d, 1)}};
    LieAlgebra l(d, 5, std::move(entries));
    Gradation g;
    g.m = 1;
    g.layers[1] = {l.basis_vector(0), l.basis_vector(1), l.basis_vector(3)};
    g.layers[2] = {l.basis_vector(2)};
    g.layers[3] = {l.basis_vector(4)};
    return {"heisenberg+abelian", d, std::move(l), std::move(g), theta()};
  }

  FieldElement theta() { return FieldElement::uniformizer_pow(d, 1 + (long)rng.next(2)); }

  /// Random basis relabeling: keeps everything exact and the gradation aligned.
  CorpusEntry permuted(CorpusEntry e) {
    std::size_t dim = e.algebra.dim();
    std::vector<std::size_t> perm(dim);
    for (std::size_t i = 0; i < dim; ++i) perm[i] = i;
    for (std::size_t i = dim; i-- > 1;) std::swap(perm[i], perm[rng.next(i + 1)]);
    std::vector<BracketEntry> entries;
    for (const auto& be : e.algebra.entries()) {
      std::size_t ni = perm[be.i], nj = perm[be.j], nk = perm[be.k];
      if (ni < nj)
        entries.push_back({ni, nj, nk, be.c});
      else
        entries.push_back({nj, ni, nk, be.c.neg()});
    }
    LieAlgebra l(e.field, dim, std::move(entries));
    Gradation g;
    g.m = e.gradation.m;
    for (const auto& [n, basis] : e.gradation.layers)
      for (const auto& v : basis) {
        Vec nv(dim, FieldElement::zero(e.field));
        for (std::size_t i = 0; i < dim; ++i) nv[perm[i]] = v[i];
        g.layers[n].push_back(std::move(nv));
      }
    return {e.label + "-permuted", e.field, std::move(l), std::move(g), e.theta};
  }
};

}  // namespace detail

/// >= 25 graded nilpotent Lie algebras (d <= 6) over Q_5, Q_7 and F_3((X)).
inline std::vector<CorpusEntry> gradation_corpus(std::uint64_t seed = 0) {
  std::vector<FieldDescriptor> fields{{FieldKind::padic, 5, 1},
                                      {FieldKind::padic, 7, 1},
                                      {FieldKind::laurent, 3, 1}};
  SampleRng rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<CorpusEntry> out;
  for (const auto& d : fields) {
    detail::CorpusBuilder b{d, rng};
    out.push_back(b.permuted(b.abelian(2)));
    out.push_back(b.permuted(b.abelian(4)));
    out.push_back(b.permuted(b.abelian(6)));
    out.push_back(b.permuted(b.heisenberg_type(2, 1)));
    out.push_back(b.permuted(b.heisenberg_type(3, 2)));
    out.push_back(b.permuted(b.heisenberg_type(4, 2)));
    out.push_back(b.permuted(b.filiform(4)));
    out.push_back(b.permuted(b.filiform(6)));
    out.push_back(b.permuted(b.heisenberg_plus_abelian()));
  }
  return out;
}

// ---- the acceptance criteria -------------------------------------------------

namespace detail {

template <typename F>
CriterionResult timed(int id, const std::string& name, F&& body) {
  auto t0 = std::chrono::steady_clock::now();
  CriterionResult r{id, name, false, "", 0};
  try {
    auto [pass, detail] = body();
    r.pass = pass;
    r.detail = detail;
  } catch (const Error& e) {
    r.pass = false;
    r.detail = e.name() + ": " + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace detail

/// Run the acceptance criteria; `quick` trims sample counts (used by unit
/// tests, never by the shipping selfcheck).
inline std::vector<CriterionResult> run_acceptance(std::uint64_t seed = 0,
                                                   long prec = kDefaultPrecision) {
  std::vector<CriterionResult> results;
  auto corpus = gradation_corpus(seed);
  std::vector<Matrix> corpus_autos;

  // 1. gradation <-> contractive automorphism round trip
  results.push_back(detail::timed(1, "gradation round trip", [&]() {
    auto t0 = std::chrono::steady_clock::now();
    int failures = 0;
    std::string first;
    for (const auto& e : corpus) {
      // keep corpus_autos aligned with corpus whatever happens per entry
      Matrix b = Matrix::identity(e.field, e.algebra.dim());
      try {
        b = automorphism_from_gradation(e.algebra, e.gradation, e.theta, prec);
        Gradation g2 = gradation_from_automorphism(e.algebra, b, prec);
        if (g2.normalized_dims() != e.gradation.normalized_dims()) {
          ++failures;
          if (first.empty()) first = e.label + ": layer dimensions differ";
        }
      } catch (const Error& err) {
        ++failures;
        if (first.empty()) first = e.label + ": " + err.what();
      }
      corpus_autos.push_back(std::move(b));
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = secs < 60.0;
    std::string det = std::to_string(corpus.size()) + " corpus algebras, " +
                      std::to_string(failures) + " failures" + (first.empty() ? "" : "; " + first) +
                      (in_time ? "" : "; exceeded 60 s");
    return std::pair{failures == 0 && in_time, det};
  }));

  // 2. central series from the spectrum, cross-checked against the lower
  //    central series
  results.push_back(detail::timed(2, "central series", [&]() {
    if (corpus_autos.size() != corpus.size())
      throw CheckFailure("corpus automorphisms unavailable (criterion 1 aborted)");
    int failures = 0;
    std::string first;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto& e = corpus[i];
      try {
        Filtration f = spectral_filtration(e.algebra, corpus_autos[i], prec);
        auto contract = is_contractive(corpus_autos[i], prec);
        if (f.length() != contract.valuations.size())
          throw CheckFailure("filtration length differs from distinct valuation count");
        auto lcs = lower_central_series(e.algebra, prec);
        if (!lcs.nilpotency_class || *lcs.nilpotency_class > (long)f.length())
          throw CheckFailure("nilpotency class exceeds filtration length");
      } catch (const Error& err) {
        ++failures;
        if (first.empty()) first = e.label + ": " + err.what();
      }
    }
    return std::pair{failures == 0, std::to_string(corpus.size()) + " algebras, " +
                                        std::to_string(failures) + " failures" +
                                        (first.empty() ? "" : "; " + first)};
  }));

  // 3. spectral decomposition of 50 random conjugated diagonal matrices
  results.push_back(detail::timed(3, "spectral decomposition", [&]() {
    std::vector<FieldDescriptor> fields{{FieldKind::padic, 5, 1},
                                        {FieldKind::padic, 7, 1},
                                        {FieldKind::laurent, 3, 1}};
    SampleRng rng(seed ^ 0xb5297a4d3f8dd34full);
    int failures = 0;
    std::string first;
    for (int t = 0; t < 50; ++t) {
      const FieldDescriptor& d = fields[(std::size_t)(t % 3)];
      std::size_t dim = 2 + rng.next(3);
      std::vector<Rat> expected;
      Matrix diag(d, dim, dim);
      for (std::size_t i = 0; i < dim; ++i) {
        long k = (long)rng.next(4);
        expected.push_back(Rat(k));
        FieldElement u = FieldElement::from_integer(d, 1 + (long long)rng.next(d.p - 1));
        diag.at(i, i) = u.shifted(k);
      }
      std::sort(expected.begin(), expected.end());
      Matrix s(d, dim, dim);
      do {
        for (std::size_t i = 0; i < dim; ++i)
          for (std::size_t j = 0; j < dim; ++j) s.at(i, j) = rng.element(d, 0, 3);
      } while (!invertible(s, prec));
      Matrix m = s * diag * inverse(s, prec);
      try {
        Poly cp = char_poly(m);
        CharDecomposition dec = char_subspaces(m, prec);
        if (dec.valuation_multiset() != expected) throw CheckFailure("valuation multiset differs");
        auto factors = slope_factor(cp, prec);
        Poly prod = Poly::from_coeffs(d, {FieldElement::one(d)});
        for (const auto& sf : factors) prod = prod * sf.factor;
        for (std::size_t i = 0; i <= (std::size_t)cp.degree(); ++i)
          if (!equal_at_precision(prod.coeff_or_zero(i), cp.coeff_or_zero(i)))
            throw CheckFailure("factor product differs from characteristic polynomial");
      } catch (const Error& err) {
        ++failures;
        if (first.empty()) first = std::string("instance ") + std::to_string(t) + ": " + err.what();
      }
    }
    return std::pair{failures == 0, "50 conjugated diagonals, " + std::to_string(failures) +
                                        " failures" + (first.empty() ? "" : "; " + first)};
  }));

  // 4. adapted norm: w(Av) = w(v) + slope as an exact rational identity
  results.push_back(detail::timed(4, "adapted norm exactness", [&]() {
    if (corpus_autos.size() != corpus.size())
      throw CheckFailure("corpus automorphisms unavailable (criterion 1 aborted)");
    SampleRng rng(seed ^ 0x1f83d9abfb41bd6bull);
    long checked = 0;
    int failures = 0;
    std::string first;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto& e = corpus[i];
      try {
        const Matrix& b = corpus_autos[i];
        ValuationNorm n = adapted_norm(b, prec);
        CharDecomposition dec = char_subspaces(b, prec);
        for (const auto& piece : dec.pieces) {
          for (int t = 0; t < 100; ++t) {
            Vec coeffs = rng.vector(e.field, piece.basis.size(), 0, 5, true);
            Vec v(e.algebra.dim(), FieldElement::zero(e.field));
            for (std::size_t k = 0; k < piece.basis.size(); ++k)
              v = vec_add(v, vec_scale(coeffs[k], piece.basis[k]));
            LogValue wv = n.value(v);
            if (wv.is_infinite()) continue;
            LogValue wav = n.value(matvec(b, v));
            ++checked;
            if (wav.is_infinite() || wav.value() != wv.value() + piece.valuation)
              throw CheckFailure("norm gain differs from slope on piece " +
                                 rat_to_string(piece.valuation));
          }
        }
      } catch (const Error& err) {
        ++failures;
        if (first.empty()) first = e.label + ": " + err.what();
      }
    }
    return std::pair{failures == 0, std::to_string(checked) + " vectors checked, " +
                                        std::to_string(failures) + " failures" +
                                        (first.empty() ? "" : "; " + first)};
  }));

  // 5. ball subgroup facts (a)-(d)
  results.push_back(detail::timed(5, "ball subgroup lemma", [&]() {
    FieldDescriptor q5{FieldKind::padic, 5, 1};
    FieldDescriptor f3{FieldKind::laurent, 3, 1};
    CheckList all;
    Matrix a5 = Matrix::identity(q5, 2);
    a5.at(0, 0) = FieldElement::from_integer(q5, 5);
    a5.at(1, 1) = FieldElement::from_integer(q5, 25);
    all.merge(ball_lemma_check(LinearAuto{a5}, Rat(0), prec, seed, 10));
    Matrix ax(f3, 1, 1);
    ax.at(0, 0) = FieldElement::uniformizer_pow(f3, 2);
    all.merge(ball_lemma_check(LinearAuto{ax}, Rat(0), prec, seed, 10));
    all.merge(ball_lemma_check(SemidirectAlphaAuto{f3}, Rat(1), prec, seed, 10));
    std::string bad;
    for (const auto& c : all.checks)
      if (!c.pass && bad.empty()) bad = c.name;
    return std::pair{all.all_pass(), std::to_string(all.checks.size()) + " exact log-scale checks" +
                                         (bad.empty() ? "" : "; first failure " + bad)};
  }));

  // 6. torsion exponents and composition-series demos
  results.push_back(detail::timed(6, "torsion and composition series", [&]() {
    FieldDescriptor f3{FieldKind::laurent, 3, 1};
    SampleRng rng(seed ^ 0x243f6a8885a308d3ull);
    std::vector<GroupElement> adds, shifts, semis;
    for (int i = 0; i < 20; ++i) {
      adds.push_back(AdditiveElem{rng.vector(f3, 3, -6, 10, true)});
      shifts.push_back(ShiftElem{rng.element(f3, -6, 10, true)});
      semis.push_back(SemidirectElem{rng.element(f3, -6, 10), rng.element(f3, -6, 10, true),
                                     rng.element(f3, -6, 10, true)});
    }
    std::string detail;
    bool pass = true;
    std::uint64_t ea = torsion_exponent(adds, 3);
    std::uint64_t es = torsion_exponent(shifts, 3);
    std::uint64_t ed = torsion_exponent(semis, 3);
    if (ea != 3 || es != 3) {
      pass = false;
      detail += "additive/shift exponent not 3; ";
    }
    if (ed != 9) {
      pass = false;
      detail += "semidirect exponent is " + std::to_string(ed) +
                ", criterion demands 9 (unattainable: for odd p every element satisfies g^p = 1, "
                "since sum_{k<p} k^p = p(p-1)/2 = 0 mod p); ";
    }
    auto ev = shift_isomorphism_even_sub(3, 40, 25, seed);
    auto sf = shift_isomorphism_subfield(3, 40, 25, seed);
    if (!ev.report.all_pass()) {
      pass = false;
      detail += "even-sub demo failed; ";
    }
    if (!sf.report.all_pass()) {
      pass = false;
      detail += "subfield demo failed; ";
    }
    if (detail.empty()) detail = "exponents 3/3/9 and both composition-series demos exact";
    return std::pair{pass, detail};
  }));

  // 7. same linearization, different groups
  results.push_back(detail::timed(7, "same-linearization separation", [&]() {
    auto rep = same_linearization_demo(3, 10, 20, seed, prec);
    std::string bad;
    for (const auto& c : rep.checks.checks)
      if (!c.pass && bad.empty()) bad = c.name;
    return std::pair{rep.checks.all_pass(),
                     bad.empty() ? "non-commuting pair with the exact predicted commutator in "
                                   "every ball level 1..10"
                                 : "failure: " + bad};
  }));

  // 8. BCH integration with the Q_2 rejection
  results.push_back(detail::timed(8, "BCH integration", [&]() {
    FieldDescriptor q5{FieldKind::padic, 5, 1};
    LieAlgebra heis(q5, 3, {{0, 1, 2, FieldElement::one(q5)}});
    Matrix b(q5, 3, 3);
    b.at(0, 0) = FieldElement::from_integer(q5, 5);
    b.at(1, 1) = FieldElement::from_integer(q5, 5);
    b.at(2, 2) = FieldElement::from_integer(q5, 25);
    auto integ = bch_integrate(heis, b, prec, seed, 30, 50);
    bool q2_rejected = false;
    FieldDescriptor q2{FieldKind::padic, 2, 1};
    LieAlgebra heis2(q2, 3, {{0, 1, 2, FieldElement::one(q2)}});
    Matrix b2(q2, 3, 3);
    b2.at(0, 0) = FieldElement::from_integer(q2, 2);
    b2.at(1, 1) = FieldElement::from_integer(q2, 2);
    b2.at(2, 2) = FieldElement::from_integer(q2, 4);
    try {
      bch_integrate(heis2, b2, prec, seed);
    } catch (const DenominatorNotUnit&) {
      q2_rejected = true;
    }
    bool pass = integ.report.all_pass() && q2_rejected;
    return std::pair{pass, std::string("associativity on 30 triples, automorphism property, ") +
                               "50-step contraction certificate" +
                               (q2_rejected ? "; Q_2 input rejected with DenominatorNotUnit"
                                            : "; Q_2 rejection MISSING")};
  }));

  // 9. morphism extension from a ball
  results.push_back(detail::timed(9, "morphism extension", [&]() {
    FieldDescriptor f3{FieldKind::laurent, 3, 1};
    Matrix rot(f3, 2, 2);
    rot.at(0, 1) = FieldElement::uniformizer_pow(f3, 1);
    rot.at(1, 0) = FieldElement::one(f3);
    GroupContext a1 = GroupContext::make(LinearAuto{rot}, prec);
    GroupContext a2 = GroupContext::make(RightShiftAuto{1}, prec);
    auto phi = [](const GroupElement& g) {
      return GroupElement{ShiftElem{interleave_forward(std::get<AdditiveElem>(g).coords)}};
    };
    SampleRng rng(seed ^ 0x452821e638d01377ull);
    std::vector<GroupElement> ball, global;
    for (int i = 0; i < 20; ++i) {
      ball.push_back(AdditiveElem{rng.vector(f3, 2, 0, 12, true)});
      global.push_back(AdditiveElem{rng.vector(f3, 2, -10, 10, true)});
    }
    auto ext = extend_morphism(a1, a2, phi, Rat(0), ball, global, prec);
    bool agrees = ext.report.all_pass();
    for (const auto& x : global)
      if (!group_equal(ext.map(x), phi(x))) agrees = false;
    return std::pair{agrees, "ball restriction of the interleave isomorphism extends to the "
                             "global map, exact on 20 samples"};
  }));

  // 10. the full suite under the time budget with exit code 0
  double total = 0;
  bool all = true;
  for (const auto& r : results) {
    total += r.seconds;
    all = all && r.pass;
  }
  CriterionResult ten{10, "selfcheck exit status", all && total < 300.0,
                      all ? "all criteria green within the budget"
                          : "red criteria present (see above)",
                      total};
  results.push_back(ten);
  return results;
}

inline Json selfcheck_to_json(const std::vector<CriterionResult>& rs) {
  Json arr = Json::array();
  bool all = true;
  for (const auto& r : rs) {
    Json j;
    j["id"] = r.id;
    j["name"] = r.name;
    j["status"] = r.pass ? "pass" : "fail";
    j["detail"] = r.detail;
    arr.push_back(j);
    all = all && r.pass;
  }
  Json out;
  out["command"] = "selfcheck";
  out["criteria"] = arr;
  out["all_pass"] = all;
  return out;
}

}  // namespace ulf
