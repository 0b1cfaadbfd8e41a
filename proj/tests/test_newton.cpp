#include <catch2/catch_amalgamated.hpp>

#include "ulf/groups.hpp"
#include "ulf/newton.hpp"

using namespace ulf;

namespace {

const FieldDescriptor kQ5{FieldKind::padic, 5, 1};
const FieldDescriptor kF3{FieldKind::laurent, 3, 1};

Poly poly(const FieldDescriptor& d, std::initializer_list<const char*> coeffs) {
  std::vector<FieldElement> c;
  for (const char* s : coeffs) c.push_back(FieldElement::parse(d, s));
  return Poly::from_coeffs(d, std::move(c));
}

// test-only hull oracle: gift wrapping from the leftmost point, independent
// of the monotone-chain code under test
std::vector<std::pair<Rat, long>> brute_hull_slopes(const std::vector<std::pair<long, long>>& pts) {
  std::vector<std::pair<Rat, long>> out;  // (root valuation, multiplicity)
  std::size_t cur = 0;  // points sorted by x; leftmost first
  while (pts[cur].first != pts.back().first) {
    std::size_t best = cur + 1;
    Rat best_slope(pts[best].second - pts[cur].second, pts[best].first - pts[cur].first);
    for (std::size_t j = cur + 1; j < pts.size(); ++j) {
      Rat s(pts[j].second - pts[cur].second, pts[j].first - pts[cur].first);
      if (s < best_slope || (s == best_slope && pts[j].first > pts[best].first)) {
        best = j;
        best_slope = s;
      }
    }
    out.emplace_back(-best_slope, pts[best].first - pts[cur].first);
    cur = best;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<Rat, long>> segments_of(const NewtonPolygon& np) {
  std::vector<std::pair<Rat, long>> out;
  for (const auto& s : np.segments) out.emplace_back(s.slope, s.multiplicity);
  return out;
}

}  // namespace

TEST_CASE("polynomial division by monic divisors round-trips") {
  SampleRng rng(23);
  for (int t = 0; t < 20; ++t) {
    std::vector<FieldElement> gc;
    for (int i = 0; i < 3; ++i) gc.push_back(rng.element(kF3, 0, 4));
    gc.push_back(FieldElement::one(kF3));
    Poly g = Poly::from_coeffs(kF3, std::move(gc));
    std::vector<FieldElement> fc;
    for (int i = 0; i < 6; ++i) fc.push_back(rng.element(kF3, 0, 4));
    Poly f = Poly::from_coeffs(kF3, std::move(fc));
    auto [q, r] = divmod_monic(f, g);
    Poly back = q * g + r;
    REQUIRE(back.c.size() >= f.c.size());
    for (std::size_t i = 0; i < back.c.size(); ++i)
      CHECK(equal_at_precision(back.coeff_or_zero(i), f.coeff_or_zero(i)));
    CHECK(r.degree() < g.degree());
  }
}

TEST_CASE("Newton polygons match the hull oracle") {
  // t^2 - p over Q_5: points (0,1), (2,0)
  auto f1 = poly(kQ5, {"-5", "0", "1"});
  auto oracle1 = brute_hull_slopes({{0, 1}, {2, 0}});
  REQUIRE(oracle1 == std::vector<std::pair<Rat, long>>{{Rat(1, 2), 2}});
  CHECK(segments_of(newton_polygon(f1)) == oracle1);

  // (t - p)(t - p^2): expand and feed the oracle the actual points
  auto f2 = poly(kQ5, {"125", "-30", "1"});
  auto oracle2 = brute_hull_slopes({{0, 3}, {1, 1}, {2, 0}});
  REQUIRE(oracle2 == std::vector<std::pair<Rat, long>>{{Rat(1), 1}, {Rat(2), 1}});
  CHECK(segments_of(newton_polygon(f2)) == oracle2);

  // t - 1
  CHECK(segments_of(newton_polygon(poly(kQ5, {"-1", "1"}))) ==
        std::vector<std::pair<Rat, long>>{{Rat(0), 1}});

  // randomized cross-check against the oracle
  SampleRng rng(7);
  for (int t = 0; t < 40; ++t) {
    std::size_t deg = 2 + rng.next(4);
    std::vector<FieldElement> c;
    std::vector<std::pair<long, long>> pts;
    for (std::size_t i = 0; i < deg; ++i) {
      long v = (long)rng.next(5);
      auto e = FieldElement::from_integer(kQ5, 1 + (long long)rng.next(4)).shifted(v);
      c.push_back(e);
      pts.emplace_back((long)i, v);
    }
    c.push_back(FieldElement::one(kQ5));
    pts.emplace_back((long)deg, 0);
    CHECK(segments_of(newton_polygon(Poly::from_coeffs(kQ5, std::move(c)))) ==
          brute_hull_slopes(pts));
  }

  CHECK_THROWS_AS(newton_polygon(poly(kQ5, {"0", "0", "1"})), SingularInput);
}

TEST_CASE("slope factorization splits, reconstructs and certifies purity") {
  auto f2 = poly(kQ5, {"125", "-30", "1"});
  auto sf = slope_factor(f2, 48);
  REQUIRE(sf.size() == 2);
  CHECK(sf[0].slope == Rat(1));
  CHECK(sf[1].slope == Rat(2));
  Poly prod = sf[0].factor * sf[1].factor;
  for (std::size_t i = 0; i <= 2; ++i) {
    auto diff = prod.coeff_or_zero(i) - f2.coeff_or_zero(i);
    CHECK(decide_zero(diff) == ZeroDecision::zero);
    if (diff.is_zero_class()) CHECK(diff.precision() >= 48);
  }
  for (const auto& s : sf) {
    auto np = newton_polygon(s.factor);
    CHECK(np.single_segment());
    CHECK(np.segments[0].slope == s.slope);
  }

  // single pure segment returns the input unchanged
  auto comp = poly(kF3, {"2*X", "0", "1"});  // t^2 - X
  auto sfc = slope_factor(comp, 48);
  REQUIRE(sfc.size() == 1);
  CHECK(sfc[0].slope == Rat(1, 2));
  CHECK(sfc[0].factor.c[0].identical(comp.c[0]));

  // (t-1)(t-p): evaluating at each approximate root via a doubled-precision
  // lift leaves valuation >= N/2
  long target = 32;
  auto f5 = poly(kQ5, {"5", "-6", "1"});
  auto lifted = slope_factor(f5, 2 * target);
  REQUIRE(lifted.size() == 2);
  for (const auto& s : lifted) {
    REQUIRE(s.factor.degree() == 1);
    auto root = s.factor.c[0].neg();
    auto val = eval(f5, root);
    long got = val.is_zero_class() ? val.precision() : *val.valuation();
    CHECK(got >= target);
  }

  CHECK_THROWS_AS(slope_factor(poly(kQ5, {"0", "1", "1"}), 48), SingularInput);
}

TEST_CASE("mixed fractional and integer slopes factor correctly") {
  // (t^2 - X)(t - X^2) over F_3((X))
  auto g = poly(kF3, {"2*X", "0", "1"});
  auto h = poly(kF3, {"2*X^2", "1"});
  Poly f = g * h;
  auto sf = slope_factor(f, 48);
  REQUIRE(sf.size() == 2);
  CHECK(sf[0].slope == Rat(1, 2));
  CHECK(sf[0].factor.degree() == 2);
  CHECK(sf[1].slope == Rat(2));
  CHECK(sf[1].factor.degree() == 1);
  Poly prod = sf[0].factor * sf[1].factor;
  for (std::size_t i = 0; i <= 3; ++i)
    CHECK(decide_zero(prod.coeff_or_zero(i) - f.coeff_or_zero(i)) == ZeroDecision::zero);

  // three-way split with repeated Hensel recursion
  auto a = poly(kQ5, {"-5", "1"});    // root 5
  auto b = poly(kQ5, {"-25", "1"});   // root 25
  auto c = poly(kQ5, {"-1", "1"});    // root 1
  Poly f3 = a * b * c;
  auto sf3 = slope_factor(f3, 48);
  REQUIRE(sf3.size() == 3);
  CHECK(sf3[0].slope == Rat(0));
  CHECK(sf3[1].slope == Rat(1));
  CHECK(sf3[2].slope == Rat(2));
}

TEST_CASE("characteristic polynomials on the worked examples") {
  Matrix a(kF3, 2, 2);
  a.at(0, 0) = FieldElement::uniformizer_pow(kF3, 1);
  a.at(1, 1) = FieldElement::uniformizer_pow(kF3, 2);
  Poly cp = char_poly(a);
  CHECK(cp.to_string() == "t^2 + (2*X + 2*X^2)*t + X^3");

  Matrix c(kF3, 2, 2);
  c.at(0, 1) = FieldElement::uniformizer_pow(kF3, 1);
  c.at(1, 0) = FieldElement::one(kF3);
  CHECK(char_poly(c).to_string() == "t^2 + 2*X");

  Poly ci = char_poly(Matrix::identity(kQ5, 2));
  CHECK(ci.c[0].to_string() == "1");
  CHECK(ci.c[1].to_string() == "-2");

  // Cayley-Hamilton at working precision on random matrices
  SampleRng rng(29);
  for (int t = 0; t < 10; ++t) {
    std::size_t n = 2 + rng.next(3);
    Matrix m(kQ5, n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m.at(i, j) = rng.element(kQ5, 0, 3);
    Matrix z = eval_matrix(char_poly(m), m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) CHECK(decide_zero(z.at(i, j)) == ZeroDecision::zero);
  }
}
