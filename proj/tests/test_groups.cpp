#include <catch2/catch_amalgamated.hpp>

#include "ulf/demos.hpp"

using namespace ulf;

namespace {

const FieldDescriptor kF3{FieldKind::laurent, 3, 1};
const FieldDescriptor kQ5{FieldKind::padic, 5, 1};

GroupElement random_element(SampleRng& rng, int kind, const std::shared_ptr<BchGroup>& grp) {
  switch (kind) {
    case 0: return AdditiveElem{rng.vector(kF3, 3, -4, 8)};
    case 1: return ShiftElem{rng.element(kF3, -4, 8)};
    case 2:
      return SemidirectElem{rng.element(kF3, -4, 8), rng.element(kF3, -4, 8),
                            rng.element(kF3, -4, 8)};
    default: return BchElem{grp, rng.vector(kQ5, 3, 0, 5)};
  }
}

std::shared_ptr<BchGroup> heis_group() {
  LieAlgebra heis(kQ5, 3, {{0, 1, 2, FieldElement::one(kQ5)}});
  Matrix b(kQ5, 3, 3);
  b.at(0, 0) = FieldElement::from_integer(kQ5, 5);
  b.at(1, 1) = FieldElement::from_integer(kQ5, 5);
  b.at(2, 2) = FieldElement::from_integer(kQ5, 25);
  return bch_integrate(heis, b, 64, 0, 5, 10).group;
}

}  // namespace

TEST_CASE("group axioms hold exactly on random triples for every group kind") {
  auto grp = heis_group();
  SampleRng rng(13);
  for (int kind = 0; kind < 4; ++kind) {
    for (int t = 0; t < 100; ++t) {
      GroupElement x = random_element(rng, kind, grp);
      GroupElement y = random_element(rng, kind, grp);
      GroupElement z = random_element(rng, kind, grp);
      CHECK(group_equal(group_op(group_op(x, y), z), group_op(x, group_op(y, z))));
      CHECK(group_equal(group_op(x, identity_like(x)), x));
      CHECK(is_identity(group_op(x, group_inv(x))));
      CHECK(is_identity(group_op(group_inv(x), x)));
    }
  }
  CHECK_THROWS_AS(group_op(random_element(rng, 0, grp), random_element(rng, 1, grp)), TagMismatch);
}

TEST_CASE("semidirect commutator matches the closed formula") {
  // commutator((0,1,0), (0,0,X)) = (-X^3, 0, 0) = (2X^3, 0, 0) in char 3
  SemidirectElem g{FieldElement::zero(kF3), FieldElement::one(kF3), FieldElement::zero(kF3)};
  SemidirectElem h{FieldElement::zero(kF3), FieldElement::zero(kF3),
                   FieldElement::uniformizer_pow(kF3, 1)};
  auto c = commutator(GroupElement{g}, GroupElement{h});
  const auto& ce = std::get<SemidirectElem>(c);
  CHECK(ce.x.to_string() == "2*X^3");
  CHECK(ce.y.is_zero());
  CHECK(ce.z.is_zero());
  CHECK(is_identity(commutator(GroupElement{g}, GroupElement{g})));

  SampleRng rng(19);
  for (int t = 0; t < 50; ++t) {
    SemidirectElem a{rng.element(kF3, -4, 8), rng.element(kF3, -4, 8), rng.element(kF3, -4, 8)};
    SemidirectElem b{rng.element(kF3, -4, 8), rng.element(kF3, -4, 8), rng.element(kF3, -4, 8)};
    auto cc = commutator(GroupElement{a}, GroupElement{b});
    const auto& cce = std::get<SemidirectElem>(cc);
    FieldElement expect = a.z.pow(3) * b.y - b.z.pow(3) * a.y;
    CHECK(equal_at_precision(cce.x, expect, 1));
    CHECK(decide_zero(cce.y, 1) == ZeroDecision::zero);
    CHECK(decide_zero(cce.z, 1) == ZeroDecision::zero);
  }
}

TEST_CASE("BCH multiplication on the Heisenberg group") {
  auto grp = heis_group();
  auto I = [&](long long n) { return FieldElement::from_integer(kQ5, n); };
  Vec e1{I(1), I(0), I(0)}, e2{I(0), I(1), I(0)};
  Vec prod = grp->multiply(e1, e2);
  CHECK(equal_at_precision(prod[0], I(1)));
  CHECK(equal_at_precision(prod[1], I(1)));
  CHECK(equal_at_precision(prod[2], FieldElement::from_rational(kQ5, 1, 2, 64)));

  // abelian BCH law is plain vector addition
  LieAlgebra ab(kQ5, 2, {});
  Matrix b = Matrix::identity(kQ5, 2);
  b.at(0, 0) = I(5);
  b.at(1, 1) = I(5);
  auto abgrp = bch_integrate(ab, b, 64, 0, 5, 10).group;
  SampleRng rng(3);
  for (int t = 0; t < 20; ++t) {
    Vec x = rng.vector(kQ5, 2, 0, 5), y = rng.vector(kQ5, 2, 0, 5);
    Vec s = abgrp->multiply(x, y);
    CHECK(equal_at_precision(s[0], x[0] + y[0]));
    CHECK(equal_at_precision(s[1], x[1] + y[1]));
  }
}

TEST_CASE("BCH truncation at class 3 matches the hand formula") {
  // filiform: [e0,e1] = e2, [e0,e2] = e3; class 3, fine over Q_5
  LieAlgebra fil(kQ5, 4, {{0, 1, 2, FieldElement::one(kQ5)}, {0, 2, 3, FieldElement::one(kQ5)}});
  fil.validate();
  Matrix b(kQ5, 4, 4);
  b.at(0, 0) = FieldElement::from_integer(kQ5, 5);
  b.at(1, 1) = FieldElement::from_integer(kQ5, 5);
  b.at(2, 2) = FieldElement::from_integer(kQ5, 25);
  b.at(3, 3) = FieldElement::from_integer(kQ5, 125);
  auto integ = bch_integrate(fil, b, 64, 0, 10, 10);
  CHECK(integ.group->nilpotency_class() == 3);
  CHECK(integ.report.all_pass());
  SampleRng rng(5);
  auto half = FieldElement::from_rational(kQ5, 1, 2, 64);
  auto twelfth = FieldElement::from_rational(kQ5, 1, 12, 64);
  for (int t = 0; t < 10; ++t) {
    Vec x = rng.vector(kQ5, 4, 0, 4), y = rng.vector(kQ5, 4, 0, 4);
    Vec got = integ.group->multiply(x, y);
    Vec xy = fil.bracket(x, y);
    Vec want = vec_add(vec_add(x, y), vec_scale(half, xy));
    want = vec_add(want, vec_scale(twelfth, fil.bracket(x, xy)));
    want = vec_sub(want, vec_scale(twelfth, fil.bracket(y, xy)));
    for (std::size_t i = 0; i < 4; ++i) CHECK(equal_at_precision(got[i], want[i]));
  }
}

TEST_CASE("automorphism application and contraction trajectories") {
  // additive K with multiplication by X^2: valuation of alpha^n(1) is 2n
  Matrix x2(kF3, 1, 1);
  x2.at(0, 0) = FieldElement::uniformizer_pow(kF3, 2);
  GroupElement one{AdditiveElem{Vec{FieldElement::one(kF3)}}};
  GroupElement cur = one;
  for (int n = 1; n <= 10; ++n) {
    cur = apply_automorphism(LinearAuto{x2}, cur);
    CHECK(*std::get<AdditiveElem>(cur).coords[0].valuation() == 2 * n);
  }

  // right shift translates windows: support [0, 5) to [n, 5 + n)
  GroupElement se{ShiftElem{FieldElement::from_digits(kF3, 0, {1, 2, 0, 1, 2}, false, 5)}};
  GroupElement s1 = apply_automorphism(RightShiftAuto{1}, se);
  CHECK(*std::get<ShiftElem>(s1).series.valuation() == 1);
  CHECK(std::get<ShiftElem>(s1).series.precision() == 6);

  // semidirect alpha: levels gain at least 1 per step (slopes p+1, 1, 1);
  // the constant sample (1,1,1) is included explicitly
  SampleRng rng(9);
  std::vector<GroupElement> samples;
  samples.push_back(SemidirectElem{FieldElement::one(kF3), FieldElement::one(kF3),
                                   FieldElement::one(kF3)});
  for (int i = 0; i < 5; ++i)
    samples.push_back(SemidirectElem{rng.element(kF3, -3, 6, true), rng.element(kF3, -3, 6, true),
                                     rng.element(kF3, -3, 6, true)});
  auto rep = contractivity_report(SemidirectAlphaAuto{kF3}, samples, 50, 64);
  CHECK(rep.Theta_log == Rat(1));
  CHECK(rep.theta_log == Rat(4));
  CHECK(rep.checks.all_pass());

  CHECK_THROWS_AS(contractivity_report(LinearAuto{Matrix::identity(kF3, 1)}, samples, 10, 64),
                  NotContractive);
}

TEST_CASE("ball subgroup facts (a)-(d)") {
  // additive Q_5 with A = 5, level 0: (c) gives p * U_0 = U_1
  Matrix a5(kQ5, 1, 1);
  a5.at(0, 0) = FieldElement::from_integer(kQ5, 5);
  auto bl = ball_lemma_check(LinearAuto{a5}, Rat(0), 64, 0, 10);
  CHECK(bl.all_pass());
  bool saw_c = false;
  for (const auto& c : bl.checks) saw_c = saw_c || c.name == "c-pth-power-level";
  CHECK(saw_c);

  // additive F_3((X)) with A = X^2: theta = Theta = 2, both inclusions equal
  Matrix ax(kF3, 1, 1);
  ax.at(0, 0) = FieldElement::uniformizer_pow(kF3, 2);
  auto ctx = GroupContext::make(LinearAuto{ax}, 64);
  CHECK(ctx.theta_log == Rat(2));
  CHECK(ctx.Theta_log == Rat(2));
  CHECK(ball_lemma_check(LinearAuto{ax}, Rat(0), 64, 0, 10).all_pass());

  // semidirect at level 1: commutator level >= 3*1 + 1 = 4 > 1
  auto bs = ball_lemma_check(SemidirectAlphaAuto{kF3}, Rat(1), 64, 0, 10);
  CHECK(bs.all_pass());

  CHECK_THROWS_AS(ball_lemma_check(LinearAuto{Matrix::identity(kQ5, 1)}, Rat(0), 64),
                  NotContractive);
}

TEST_CASE("torsion exponents certified by exact exponentiation") {
  SampleRng rng(21);
  std::vector<GroupElement> adds, shifts, semis;
  for (int i = 0; i < 20; ++i) {
    adds.push_back(AdditiveElem{rng.vector(kF3, 2, -4, 8, true)});
    shifts.push_back(ShiftElem{rng.element(kF3, -4, 8, true)});
    semis.push_back(SemidirectElem{rng.element(kF3, -4, 8), rng.element(kF3, -4, 8, true),
                                   rng.element(kF3, -4, 8, true)});
  }
  CHECK(torsion_exponent(adds, 3) == 3);
  CHECK(torsion_exponent(shifts, 3) == 3);
  // the semidirect exponent over F_3((X)) is 3: for odd p every element
  // satisfies g^p = 1 because sum_{k<p} k^p = p(p-1)/2 vanishes mod p; the
  // p^2 phenomenon is specific to p = 2
  CHECK(torsion_exponent(semis, 3) == 3);
  FieldDescriptor f2{FieldKind::laurent, 2, 1};
  SampleRng rng2(22);
  std::vector<GroupElement> semis2;
  for (int i = 0; i < 20; ++i)
    semis2.push_back(SemidirectElem{rng2.element(f2, -4, 8), rng2.element(f2, -4, 8, true),
                                    rng2.element(f2, -4, 8, true)});
  CHECK(torsion_exponent(semis2, 2) == 4);

  // a torsion-free group exceeds the p^8 cap
  std::vector<GroupElement> free_samples{AdditiveElem{Vec{FieldElement::one(kQ5)}}};
  CHECK_THROWS_AS(torsion_exponent(free_samples, 5), NotTorsion);
}

TEST_CASE("shift isomorphism demos verify their composition series") {
  auto ev = shift_isomorphism_even_sub(3, 40, 25, 0);
  CHECK(ev.report.all_pass());
  auto sf = shift_isomorphism_subfield(3, 40, 25, 0);
  CHECK(sf.report.all_pass());
  auto il2 = shift_isomorphism_interleave(3, 2, 40, 25, 0);
  CHECK(il2.report.all_pass());
  auto il4 = shift_isomorphism_interleave(3, 4, 40, 25, 0);
  CHECK(il4.report.all_pass());

  // the worked interleave value: (1 + X, X) -> 1 + X^2 + X^3
  auto v = interleave_forward({FieldElement::parse(kF3, "1 + X"), FieldElement::parse(kF3, "X")});
  CHECK(v.to_string() == "1 + X^2 + X^3");

  // round trip property on 50 random windowed elements
  SampleRng rng(33);
  for (int t = 0; t < 50; ++t) {
    auto s = rng.element(kF3, -10, 10, true).truncated(10);
    auto comps = interleave_backward(s, 3);
    CHECK(equal_at_precision(interleave_forward(comps), s, 1));
  }

  CHECK_THROWS_AS(shift_isomorphism_even_sub(3, 4, 5, 0), WindowTooSmall);
}

TEST_CASE("morphism extension from an invariant ball") {
  // identity on the level-0 ball of (K, +) with alpha = multiplication by X
  Matrix mx(kF3, 1, 1);
  mx.at(0, 0) = FieldElement::uniformizer_pow(kF3, 1);
  GroupContext a1 = GroupContext::make(LinearAuto{mx}, 64);
  SampleRng rng(12);
  std::vector<GroupElement> ball, global;
  for (int i = 0; i < 10; ++i) {
    ball.push_back(AdditiveElem{rng.vector(kF3, 1, 0, 8, true)});
    global.push_back(AdditiveElem{rng.vector(kF3, 1, -6, 6, true)});
  }
  auto idmap = [](const GroupElement& g) { return g; };
  auto ext = extend_morphism(a1, a1, idmap, Rat(0), ball, global, 64);
  CHECK(ext.report.all_pass());
  for (const auto& x : global) CHECK(group_equal(ext.map(x), x));

  // multiplication by an exact c on the ball extends to the global map
  FieldElement c = FieldElement::parse(kF3, "1 + 2*X");
  auto mulc = [c](const GroupElement& g) {
    return GroupElement{AdditiveElem{vec_scale(c, std::get<AdditiveElem>(g).coords)}};
  };
  auto extc = extend_morphism(a1, a1, mulc, Rat(0), ball, global, 64);
  CHECK(extc.report.all_pass());
  for (const auto& x : global) CHECK(group_equal(extc.map(x), mulc(x)));

  // interleave phi restricted to the level-0 ball extends to the global phi,
  // and the reverse extension inverts it
  Matrix rot(kF3, 2, 2);
  rot.at(0, 1) = FieldElement::uniformizer_pow(kF3, 1);
  rot.at(1, 0) = FieldElement::one(kF3);
  GroupContext ar = GroupContext::make(LinearAuto{rot}, 64);
  GroupContext as = GroupContext::make(RightShiftAuto{1}, 64);
  auto phi = [](const GroupElement& g) {
    return GroupElement{ShiftElem{interleave_forward(std::get<AdditiveElem>(g).coords)}};
  };
  auto phi_inv = [](const GroupElement& g) {
    return GroupElement{AdditiveElem{interleave_backward(std::get<ShiftElem>(g).series, 2)}};
  };
  std::vector<GroupElement> ball2, global2, shift_ball, shift_global;
  for (int i = 0; i < 20; ++i) {
    ball2.push_back(AdditiveElem{rng.vector(kF3, 2, 0, 10, true)});
    global2.push_back(AdditiveElem{rng.vector(kF3, 2, -8, 8, true)});
    shift_ball.push_back(ShiftElem{rng.element(kF3, 0, 10, true)});
    shift_global.push_back(ShiftElem{rng.element(kF3, -8, 8, true)});
  }
  auto extphi = extend_morphism(ar, as, phi, Rat(0), ball2, global2, 64);
  CHECK(extphi.report.all_pass());
  for (const auto& x : global2) CHECK(group_equal(extphi.map(x), phi(x)));
  auto extinv = extend_morphism(as, ar, phi_inv, Rat(0), shift_ball, shift_global, 64);
  CHECK(extinv.report.all_pass());
  for (const auto& x : global2) CHECK(group_equal(extinv.map(extphi.map(x)), x));

  // a non-intertwining map on the ball is rejected
  auto bogus = [](const GroupElement& g) {
    auto v = std::get<AdditiveElem>(g).coords;
    std::swap(v[0], v[1]);
    return GroupElement{ShiftElem{interleave_forward(v)}};
  };
  CHECK_THROWS_AS(extend_morphism(ar, as, bogus, Rat(0), ball2, global2, 64), NotIntertwining);

  // an expanding automorphism cannot leave the ball invariant
  Matrix mxinv(kF3, 1, 1);
  mxinv.at(0, 0) = FieldElement::uniformizer_pow(kF3, -1);
  GroupContext bad1 = GroupContext::make(LinearAuto{mxinv}, 64);
  CHECK_THROWS_AS(extend_morphism(bad1, bad1, idmap, Rat(0), ball, global, 64), NotInvariant);
}

TEST_CASE("same-linearization demo separates the two groups") {
  auto rep = same_linearization_demo(3, 10, 20, 0, 64);
  CHECK(rep.checks.all_pass());
  bool saw_pair = false;
  for (const auto& c : rep.checks.checks)
    if (c.name == "non-commuting-pair-per-level") {
      saw_pair = true;
      CHECK(c.witness.find("2*X^4") != std::string::npos);
    }
  CHECK(saw_pair);
}

TEST_CASE("named demo drivers") {
  CHECK(demo_semidirect(3, 0, 64).all_pass());
  CHECK(demo_heisenberg_bch(0, 64).all_pass());
}
