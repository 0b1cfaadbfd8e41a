#include <catch2/catch_amalgamated.hpp>

#include "ulf/lie.hpp"
#include "ulf/selfcheck.hpp"

using namespace ulf;

namespace {

const FieldDescriptor kQ5{FieldKind::padic, 5, 1};
const FieldDescriptor kF3{FieldKind::laurent, 3, 1};

FieldElement I5(long long n) { return FieldElement::from_integer(kQ5, n); }

LieAlgebra heisenberg() { return LieAlgebra(kQ5, 3, {{0, 1, 2, I5(1)}}); }

Matrix heis_auto() {
  Matrix b(kQ5, 3, 3);
  b.at(0, 0) = I5(5);
  b.at(1, 1) = I5(5);
  b.at(2, 2) = I5(25);
  return b;
}

// test-only oracle: dense Jacobiator over the structure-constant tensor
Vec brute_jacobiator(const LieAlgebra& l, std::size_t i, std::size_t j, std::size_t k) {
  auto br = [&](const Vec& x, const Vec& y) { return l.bracket(x, y); };
  Vec a = br(br(l.basis_vector(i), l.basis_vector(j)), l.basis_vector(k));
  Vec b = br(br(l.basis_vector(j), l.basis_vector(k)), l.basis_vector(i));
  Vec c = br(br(l.basis_vector(k), l.basis_vector(i)), l.basis_vector(j));
  return vec_add(vec_add(a, b), c);
}

}  // namespace

TEST_CASE("Jacobi validation") {
  LieAlgebra ab(kQ5, 3, {});
  ab.validate();
  heisenberg().validate();
  // hand oracle: the only Heisenberg triple vanishes
  CHECK(vec_min_valuation(brute_jacobiator(heisenberg(), 0, 1, 2)).is_infinite());

  // the three-step solvable spec satisfies Jacobi: the oracle shows the only
  // triple cancels to zero, so validation must succeed
  LieAlgebra solv(kQ5, 3, {{0, 1, 0, I5(1)}, {0, 2, 1, I5(1)}, {1, 2, 2, I5(1)}});
  CHECK(vec_min_valuation(brute_jacobiator(solv, 0, 1, 2)).is_infinite());
  solv.validate();

  // genuinely broken: [e0,e1] = e0, [e0,e2] = e2 has Jacobiator e2
  LieAlgebra bad(kQ5, 3, {{0, 1, 0, I5(1)}, {0, 2, 2, I5(1)}});
  Vec jac = brute_jacobiator(bad, 0, 1, 2);
  CHECK(decide_zero(jac[2]) == ZeroDecision::nonzero);
  CHECK_THROWS_AS(bad.validate(), JacobiViolation);
}

TEST_CASE("Lie automorphism check") {
  check_lie_automorphism(heisenberg(), heis_auto());
  Matrix bad(kQ5, 3, 3);
  bad.at(0, 0) = I5(5);
  bad.at(1, 1) = I5(5);
  bad.at(2, 2) = I5(5);
  CHECK_THROWS_AS(check_lie_automorphism(heisenberg(), bad), NotAutomorphism);
  // any invertible map is an automorphism of an abelian algebra
  LieAlgebra ab(kQ5, 3, {});
  check_lie_automorphism(ab, bad);
}

TEST_CASE("gradation from a contractive automorphism") {
  // abelian K^2 with diag(X, X^2): m = 1, layers 1 and 2
  LieAlgebra ab2(kF3, 2, {});
  Matrix d2(kF3, 2, 2);
  d2.at(0, 0) = FieldElement::uniformizer_pow(kF3, 1);
  d2.at(1, 1) = FieldElement::uniformizer_pow(kF3, 2);
  auto g0 = gradation_from_automorphism(ab2, d2);
  CHECK(g0.m == 1);
  CHECK(g0.layers[1].size() == 1);
  CHECK(g0.layers[2].size() == 1);

  auto g = gradation_from_automorphism(heisenberg(), heis_auto());
  CHECK(g.m == 1);
  CHECK(g.layers[1].size() == 2);
  CHECK(g.layers[2].size() == 1);

  // companion of t^2 - X on abelian K^2: m = 2, single layer 1
  Matrix c(kF3, 2, 2);
  c.at(0, 1) = FieldElement::uniformizer_pow(kF3, 1);
  c.at(1, 0) = FieldElement::one(kF3);
  auto gc = gradation_from_automorphism(ab2, c);
  CHECK(gc.m == 2);
  CHECK(gc.layers[1].size() == 2);

  CHECK_THROWS_AS(gradation_from_automorphism(ab2, Matrix::identity(kF3, 2)), NotContractive);
}

TEST_CASE("automorphism from a gradation and the round trip") {
  Gradation gh;
  gh.m = 1;
  LieAlgebra h = heisenberg();
  gh.layers[1] = {h.basis_vector(0), h.basis_vector(1)};
  gh.layers[2] = {h.basis_vector(2)};
  Matrix b = automorphism_from_gradation(h, gh, I5(5));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      FieldElement want = i == j ? (i < 2 ? I5(5) : I5(25)) : I5(0);
      CHECK(equal_at_precision(b.at(i, j), want));
    }
  auto back = gradation_from_automorphism(h, b);
  CHECK(back.normalized_dims() == gh.normalized_dims());

  // concentrated in layer 1: theta * identity
  LieAlgebra ab(kF3, 2, {});
  Gradation g1;
  g1.m = 1;
  g1.layers[1] = {ab.basis_vector(0), ab.basis_vector(1)};
  Matrix t = automorphism_from_gradation(ab, g1, FieldElement::uniformizer_pow(kF3, 1));
  CHECK(equal_at_precision(t.at(0, 0), FieldElement::uniformizer_pow(kF3, 1)));
  CHECK(equal_at_precision(t.at(1, 1), FieldElement::uniformizer_pow(kF3, 1)));
  CHECK(decide_zero(t.at(0, 1)) == ZeroDecision::zero);

  CHECK_THROWS_AS(automorphism_from_gradation(h, gh, I5(1)), NotContracting);
  Gradation badg;
  badg.m = 1;
  badg.layers[1] = {h.basis_vector(0), h.basis_vector(1)};
  badg.layers[3] = {h.basis_vector(2)};  // [g_1, g_1] = g_2 escapes
  CHECK_THROWS_AS(automorphism_from_gradation(h, badg, I5(5)), InvalidGradation);
}

TEST_CASE("round trip over the generated corpus") {
  auto corpus = gradation_corpus(99);
  REQUIRE(corpus.size() >= 25);
  int tried = 0;
  for (const auto& e : corpus) {
    if (tried >= 10) break;  // the acceptance suite runs the full corpus
    ++tried;
    e.algebra.validate();
    Matrix b = automorphism_from_gradation(e.algebra, e.gradation, e.theta);
    auto g2 = gradation_from_automorphism(e.algebra, b);
    CHECK(g2.normalized_dims() == e.gradation.normalized_dims());
    // gradation implies nilpotency: class <= number of nonzero layers
    auto lcs = lower_central_series(e.algebra);
    REQUIRE(lcs.nilpotency_class.has_value());
    CHECK(*lcs.nilpotency_class <= (long)e.gradation.layers.size());
  }
}

TEST_CASE("spectral filtration is a central series") {
  auto f = spectral_filtration(heisenberg(), heis_auto());
  REQUIRE(f.chain.size() == 2);
  CHECK(f.chain[0].size() == 1);
  CHECK(in_span(f.chain[0], heisenberg().basis_vector(2)));
  CHECK(f.chain[1].size() == 3);

  // abelian K^3 with diag(X^{p+1}, X, X): F_1 = span(e0)
  LieAlgebra ab3(kF3, 3, {});
  Matrix d(kF3, 3, 3);
  d.at(0, 0) = FieldElement::uniformizer_pow(kF3, 4);
  d.at(1, 1) = FieldElement::uniformizer_pow(kF3, 1);
  d.at(2, 2) = FieldElement::uniformizer_pow(kF3, 1);
  auto fd = spectral_filtration(ab3, d);
  REQUIRE(fd.chain.size() == 2);
  CHECK(fd.chain[0].size() == 1);
  CHECK(in_span(fd.chain[0], ab3.basis_vector(0)));

  // one-dimensional: F_1 = g
  LieAlgebra one(kF3, 1, {});
  Matrix x(kF3, 1, 1);
  x.at(0, 0) = FieldElement::uniformizer_pow(kF3, 1);
  CHECK(spectral_filtration(one, x).chain.size() == 1);

  CHECK_THROWS_AS(spectral_filtration(heisenberg(), Matrix::identity(kQ5, 3)), NotContractive);
}

TEST_CASE("lower central series and nilpotency class") {
  auto lh = lower_central_series(heisenberg());
  REQUIRE(lh.nilpotency_class.has_value());
  CHECK(*lh.nilpotency_class == 2);
  CHECK(lh.terms[1].size() == 1);

  LieAlgebra ab(kQ5, 4, {});
  CHECK(*lower_central_series(ab).nilpotency_class == 1);

  LieAlgebra sl2(kQ5, 3, {{0, 1, 2, I5(1)}, {0, 2, 0, I5(-2)}, {1, 2, 1, I5(2)}});
  sl2.validate();
  auto ls = lower_central_series(sl2);
  CHECK_FALSE(ls.nilpotency_class.has_value());
  CHECK(ls.terms.back().size() == 3);

  // consistency with the filtration length on the Heisenberg example
  auto f = spectral_filtration(heisenberg(), heis_auto());
  CHECK(*lh.nilpotency_class <= (long)f.chain.size());
}

TEST_CASE("bracket constants") {
  auto n = adapted_norm(heis_auto(), 64);
  auto c = bracket_constant(heisenberg(), n);
  REQUIRE_FALSE(c.is_infinite());
  CHECK(c.value() == Rat(0));
  CHECK(bracket_constant(LieAlgebra(kQ5, 3, {}), n).is_infinite());
  // the bound holds for random vectors
  SampleRng rng(6);
  LieAlgebra h = heisenberg();
  for (int t = 0; t < 50; ++t) {
    Vec x = rng.vector(kQ5, 3, -3, 5, true), y = rng.vector(kQ5, 3, -3, 5, true);
    LogValue w = n.value(h.bracket(x, y));
    if (w.is_infinite()) continue;
    CHECK(w.value() >= n.value(x).value() + n.value(y).value() + c.value());
  }
}

TEST_CASE("bracket-spectrum compatibility") {
  // [E_u, E_u'] lands in E_{u+u'} (or vanishes) for the Heisenberg pair
  auto dec = char_subspaces(heis_auto(), 64);
  Matrix stacked = Matrix::from_columns(kQ5, dec.stacked_basis());
  Matrix inv = inverse(stacked, 64);
  LieAlgebra h = heisenberg();
  for (const auto& pu : dec.pieces)
    for (const auto& pv : dec.pieces)
      for (const auto& x : pu.basis)
        for (const auto& y : pv.basis) {
          Vec z = h.bracket(x, y);
          if (vec_min_valuation(z).is_infinite()) continue;
          Vec coords = matvec(inv, z);
          std::size_t idx = 0;
          for (const auto& piece : dec.pieces)
            for (std::size_t t = 0; t < piece.basis.size(); ++t, ++idx)
              if (piece.valuation != pu.valuation + pv.valuation)
                CHECK(decide_zero(coords[idx]) == ZeroDecision::zero);
        }
}
