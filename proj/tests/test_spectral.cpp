#include <catch2/catch_amalgamated.hpp>

#include "ulf/groups.hpp"
#include "ulf/spectral.hpp"

using namespace ulf;

namespace {

const FieldDescriptor kQ5{FieldKind::padic, 5, 1};
const FieldDescriptor kF3{FieldKind::laurent, 3, 1};

Matrix diag2(const FieldDescriptor& d, const FieldElement& a, const FieldElement& b) {
  Matrix m(d, 2, 2);
  m.at(0, 0) = a;
  m.at(1, 1) = b;
  return m;
}

Matrix companion_t2_minus_x() {
  Matrix c(kF3, 2, 2);
  c.at(0, 1) = FieldElement::uniformizer_pow(kF3, 1);
  c.at(1, 0) = FieldElement::one(kF3);
  return c;
}

}  // namespace

TEST_CASE("characteristic subspaces on the worked examples") {
  Matrix a = diag2(kF3, FieldElement::uniformizer_pow(kF3, 1), FieldElement::uniformizer_pow(kF3, 2));
  auto dec = char_subspaces(a, 64);
  REQUIRE(dec.pieces.size() == 2);
  CHECK(dec.pieces[0].valuation == Rat(1));
  CHECK(dec.pieces[1].valuation == Rat(2));
  CHECK(in_span(dec.pieces[0].basis, Vec{FieldElement::one(kF3), FieldElement::zero(kF3)}));
  CHECK(in_span(dec.pieces[1].basis, Vec{FieldElement::zero(kF3), FieldElement::one(kF3)}));

  auto dc = char_subspaces(companion_t2_minus_x(), 64);
  REQUIRE(dc.pieces.size() == 1);
  CHECK(dc.pieces[0].valuation == Rat(1, 2));
  CHECK(dc.pieces[0].basis.size() == 2);

  auto di = char_subspaces(Matrix::identity(kQ5, 2), 64);
  REQUIRE(di.pieces.size() == 1);
  CHECK(di.pieces[0].valuation == Rat(0));

  Matrix z(kQ5, 2, 2);
  CHECK_THROWS_AS(char_subspaces(z, 64), SingularInput);
}

TEST_CASE("contractivity detection") {
  Matrix a = diag2(kF3, FieldElement::uniformizer_pow(kF3, 1), FieldElement::uniformizer_pow(kF3, 2));
  auto r = is_contractive(a);
  CHECK(r.contractive);
  CHECK(r.valuations == std::vector<Rat>{Rat(1), Rat(2)});

  auto ri = is_contractive(Matrix::identity(kQ5, 2));
  CHECK_FALSE(ri.contractive);
  CHECK(ri.valuations == std::vector<Rat>{Rat(0)});

  auto rc = is_contractive(companion_t2_minus_x());
  CHECK(rc.contractive);
  CHECK(rc.valuations == std::vector<Rat>{Rat(1, 2)});
}

TEST_CASE("adapted norms realize the exact norm-gain identity") {
  // diag(X, X^2): standard basis, shifts (0, 0)
  Matrix a = diag2(kF3, FieldElement::uniformizer_pow(kF3, 1), FieldElement::uniformizer_pow(kF3, 2));
  auto n = adapted_norm(a, 64);
  CHECK(n.shifts == std::vector<Rat>{Rat(0), Rat(0)});
  auto [theta, Theta] = operator_bounds(a, n, 64);
  CHECK(theta == Rat(2));
  CHECK(Theta == Rat(1));

  // companion of t^2 - X: basis (e1, e2), shifts (0, 1/2), w(Av) = w(v) + 1/2
  Matrix c = companion_t2_minus_x();
  auto nc = adapted_norm(c, 64);
  REQUIRE(nc.shifts == std::vector<Rat>{Rat(0), Rat(1, 2)});
  CHECK(nc.basis.at(0, 0).to_string() == "1");
  CHECK(nc.basis.at(1, 1).to_string() == "1");
  SampleRng rng(2);
  for (int t = 0; t < 50; ++t) {
    Vec v = rng.vector(kF3, 2, -4, 6, true);
    LogValue wv = nc.value(v);
    LogValue wa = nc.value(matvec(c, v));
    REQUIRE_FALSE(wv.is_infinite());
    CHECK(wa.value() == wv.value() + Rat(1, 2));
    // and the explicit formula w(x, y) = min(v(x), v(y) + 1/2)
    Rat byhand = std::min(v[0].is_zero() ? Rat(1000) : Rat(*v[0].valuation()),
                          v[1].is_zero() ? Rat(1000) : Rat(*v[1].valuation()) + Rat(1, 2));
    CHECK(wv.value() == byhand);
  }
  auto [tc, Tc] = operator_bounds(c, nc, 64);
  CHECK(tc == Rat(1, 2));
  CHECK(Tc == Rat(1, 2));

  // identity: any basis, zero shifts, bounds (0, 0)
  auto ni = adapted_norm(Matrix::identity(kQ5, 2), 64);
  auto [ti, Ti] = operator_bounds(Matrix::identity(kQ5, 2), ni, 64);
  CHECK(ti == Rat(0));
  CHECK(Ti == Rat(0));
}

TEST_CASE("adapted norms with nontrivial denominator clearing") {
  // companion of t^3 - X^2: slope 2/3 (m = 3, s = 2), the general chain case
  Matrix c(kF3, 3, 3);
  c.at(0, 2) = FieldElement::uniformizer_pow(kF3, 2);
  c.at(1, 0) = FieldElement::one(kF3);
  c.at(2, 1) = FieldElement::one(kF3);
  auto dec = char_subspaces(c, 64);
  REQUIRE(dec.pieces.size() == 1);
  CHECK(dec.pieces[0].valuation == Rat(2, 3));
  auto n = adapted_norm(c, 64);
  for (const auto& s : n.shifts) CHECK((s >= Rat(0) && s < Rat(1)));
  SampleRng rng(14);
  for (int t = 0; t < 60; ++t) {
    Vec v = rng.vector(kF3, 3, -4, 6, true);
    LogValue wv = n.value(v);
    REQUIRE_FALSE(wv.is_infinite());
    CHECK(n.value(matvec(c, v)).value() == wv.value() + Rat(2, 3));
  }
  auto [th, Th] = operator_bounds(c, n, 64);
  CHECK(th == Rat(2, 3));
  CHECK(Th == Rat(2, 3));

  // companion of t^3 - X: slope 1/3 (m = 3, s = 1)
  Matrix c2(kF3, 3, 3);
  c2.at(0, 2) = FieldElement::uniformizer_pow(kF3, 1);
  c2.at(1, 0) = FieldElement::one(kF3);
  c2.at(2, 1) = FieldElement::one(kF3);
  auto n2 = adapted_norm(c2, 64);
  SampleRng rng2(15);
  for (int t = 0; t < 60; ++t) {
    Vec v = rng2.vector(kF3, 3, -4, 6, true);
    LogValue wv = n2.value(v);
    REQUIRE_FALSE(wv.is_infinite());
    CHECK(n2.value(matvec(c2, v)).value() == wv.value() + Rat(1, 3));
  }
}

TEST_CASE("norm compatibility on every piece of a mixed spectrum") {
  // block diag(companion(t^2 - X), X^2), slopes 1/2 and 2
  Matrix m(kF3, 3, 3);
  m.at(0, 1) = FieldElement::uniformizer_pow(kF3, 1);
  m.at(1, 0) = FieldElement::one(kF3);
  m.at(2, 2) = FieldElement::uniformizer_pow(kF3, 2);
  auto dec = char_subspaces(m, 64);
  auto n = adapted_norm(m, 64);
  SampleRng rng(4);
  for (const auto& piece : dec.pieces)
    for (int t = 0; t < 100; ++t) {
      Vec coeffs = rng.vector(kF3, piece.basis.size(), 0, 5, true);
      Vec v(3, FieldElement::zero(kF3));
      for (std::size_t k = 0; k < piece.basis.size(); ++k)
        v = vec_add(v, vec_scale(coeffs[k], piece.basis[k]));
      LogValue wv = n.value(v);
      if (wv.is_infinite()) continue;
      CHECK(n.value(matvec(m, v)).value() == wv.value() + piece.valuation);
    }
}

TEST_CASE("brute-force equivalence on conjugated diagonals (d <= 3)") {
  SampleRng rng(31);
  for (int t = 0; t < 15; ++t) {
    const FieldDescriptor& d = t % 2 ? kQ5 : kF3;
    std::size_t dim = 2 + rng.next(2);
    Matrix diag(d, dim, dim);
    std::vector<Rat> expected;
    for (std::size_t i = 0; i < dim; ++i) {
      long k = (long)rng.next(3);
      expected.push_back(Rat(k));
      diag.at(i, i) = FieldElement::from_integer(d, 1 + (long long)rng.next(d.p - 1)).shifted(k);
    }
    std::sort(expected.begin(), expected.end());
    Matrix s(d, dim, dim);
    do {
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) s.at(i, j) = rng.element(d, 0, 2);
    } while (!invertible(s, 64));
    Matrix m = s * diag * inverse(s, 64);
    auto dec = char_subspaces(m, 64);
    CHECK(dec.valuation_multiset() == expected);
    // span matching against the known eigenvectors (columns of s)
    for (std::size_t i = 0; i < dim; ++i) {
      Rat k = Rat(*diag.at(i, i).valuation());
      for (const auto& piece : dec.pieces)
        if (piece.valuation == k) CHECK(in_span(piece.basis, s.column(i), 64));
    }
  }
}

TEST_CASE("contractive orbits decay at the adapted rate") {
  Matrix c = companion_t2_minus_x();
  auto res = is_contractive(c);
  REQUIRE(res.contractive);
  auto n = adapted_norm(c, 64);
  auto [theta, Theta] = operator_bounds(c, n, 64);
  SampleRng rng(8);
  for (int t = 0; t < 20; ++t) {
    Vec v = rng.vector(kF3, 2, -3, 4, true);
    LogValue w0 = n.value(v);
    Vec cur = v;
    for (int k = 1; k <= 50; ++k) {
      cur = matvec(c, cur);
      LogValue w = n.value(cur);
      REQUIRE_FALSE(w.is_infinite());
      CHECK(w.value() - w0.value() >= Rat(k) * Theta);
    }
  }
}

TEST_CASE("direct sum and purity invariants on random spectra") {
  SampleRng rng(41);
  for (int t = 0; t < 10; ++t) {
    std::size_t dim = 2 + rng.next(3);
    Matrix diag(kQ5, dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
      diag.at(i, i) = FieldElement::from_integer(kQ5, 1 + (long long)rng.next(4)).shifted((long)rng.next(3));
    Matrix s(kQ5, dim, dim);
    do {
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) s.at(i, j) = rng.element(kQ5, 0, 2);
    } while (!invertible(s, 64));
    Matrix m = s * diag * inverse(s, 64);
    auto dec = char_subspaces(m, 64);
    std::size_t total = 0;
    for (const auto& p : dec.pieces) total += p.basis.size();
    CHECK(total == dim);
    CHECK(invertible(Matrix::from_columns(kQ5, dec.stacked_basis()), 64));
  }
}
