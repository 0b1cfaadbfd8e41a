#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ulf/groups.hpp"

namespace ulf {

// ---- digit reindexing ------------------------------------------------------

/// Digits at positions congruent to rem mod step, reindexed to consecutive
/// positions: output digit k = input digit at step*k + rem.
inline FieldElement take_congruent_digits(const FieldElement& s, long step, long rem) {
  const FieldDescriptor& d = s.descriptor();
  auto v = s.valuation();
  long out_prec = s.exact() ? 0 : ceil_rat(Rat(s.precision() - rem, step));
  if (!v) {
    return s.exact() ? FieldElement::zero(d) : FieldElement::zero_class(d, out_prec);
  }
  long k0 = ceil_rat(Rat(*v - rem, step));
  long k1 = s.exact() ? ceil_rat(Rat(s.support_end() - rem, step)) : out_prec;
  std::vector<std::uint64_t> digits;
  for (long k = k0; k < k1; ++k) digits.push_back(s.digit_at(step * k + rem));
  return FieldElement::from_digits(d, k0, std::move(digits), s.exact(), out_prec);
}

/// Inverse reindexing: output digit at step*k + rem = input digit k, other
/// positions zero.
inline FieldElement spread_digits(const FieldElement& s, long step, long rem) {
  const FieldDescriptor& d = s.descriptor();
  auto v = s.valuation();
  long out_prec = s.exact() ? 0 : step * (s.precision() - 1) + rem + 1;
  if (!v) return s.exact() ? FieldElement::zero(d) : FieldElement::zero_class(d, out_prec);
  long len = (s.exact() ? s.support_end() : s.precision()) - *v;
  std::vector<std::uint64_t> digits((std::size_t)((len - 1) * step + 1), 0);
  for (long k = 0; k < len; ++k) digits[(std::size_t)(k * step)] = s.digit_at(*v + k);
  return FieldElement::from_digits(d, step * *v + rem, std::move(digits), s.exact(), out_prec);
}

/// Interleave n series into one: component i contributes its digit k at
/// position n*k + i.
inline FieldElement interleave_forward(const std::vector<FieldElement>& comps) {
  if (comps.empty()) throw Error(ErrorClass::precondition, "empty interleave input");
  const FieldDescriptor& d = comps[0].descriptor();
  long n = (long)comps.size();
  FieldElement acc = FieldElement::zero(d);
  for (long i = 0; i < n; ++i) acc = acc + spread_digits(comps[(std::size_t)i], n, i);
  return acc;
}

inline std::vector<FieldElement> interleave_backward(const FieldElement& s, unsigned n) {
  std::vector<FieldElement> out;
  for (unsigned i = 0; i < n; ++i) out.push_back(take_congruent_digits(s, (long)n, (long)i));
  return out;
}

// ---- verified isomorphism demos ---------------------------------------------

struct VerifiedIsomorphism {
  std::function<GroupElement(const GroupElement&)> forward;
  std::function<GroupElement(const GroupElement&)> backward;
  CheckList report;
};

namespace detail {

inline void require_window(long width, long need) {
  if (width < need)
    throw WindowTooSmall("window width " + std::to_string(width) + " below required " +
                         std::to_string(need));
}

}  // namespace detail

/// The even-support subgroup of (F_q((X)), +) under multiplication by X^2:
/// an automorphism-stable closed subgroup whose factor and cofactor are both
/// one-step shift groups via explicit digit reindexing.
inline VerifiedIsomorphism shift_isomorphism_even_sub(std::uint64_t p, long window = 32,
                                                      int nsamples = 25, std::uint64_t seed = 0) {
  detail::require_window(window, 8);
  FieldDescriptor d{FieldKind::laurent, p, 1};
  validate(d);
  SampleRng rng(seed);
  CheckList rep;
  GroupAutomorphismSpec alpha = RightShiftAuto{2};
  GroupAutomorphismSpec sigma = RightShiftAuto{1};

  auto even_sample = [&](bool exact_elem) {
    FieldElement base = rng.element(d, -window / 2, window / 2, true);
    FieldElement e = spread_digits(base, 2, 0);
    if (!exact_elem) e = e.truncated(window);
    return GroupElement{ShiftElem{e}};
  };
  auto fwd = [](const GroupElement& g) {
    return GroupElement{ShiftElem{take_congruent_digits(std::get<ShiftElem>(g).series, 2, 0)}};
  };
  auto bwd = [](const GroupElement& g) {
    return GroupElement{ShiftElem{spread_digits(std::get<ShiftElem>(g).series, 2, 0)}};
  };

  bool stable = true, additive = true, inter = true, round = true;
  for (int t = 0; t < nsamples; ++t) {
    GroupElement g = even_sample(t % 2 == 0), h = even_sample(true);
    GroupElement ag = apply_automorphism(alpha, g);
    // alpha-stability: the image has no odd digits
    if (decide_zero(take_congruent_digits(std::get<ShiftElem>(ag).series, 2, 1), 1) !=
        ZeroDecision::zero)
      stable = false;
    if (!group_equal(fwd(group_op(g, h)), group_op(fwd(g), fwd(h)))) additive = false;
    if (!group_equal(fwd(ag), apply_automorphism(sigma, fwd(g)))) inter = false;
    if (!group_equal(bwd(fwd(g)), g)) round = false;
    if (!group_equal(fwd(bwd(fwd(g))), fwd(g))) round = false;
  }
  rep.add("subgroup-alpha-stable", stable, "X^2-multiples of even-support series are even-support");
  rep.add("factor-iso-additive", additive);
  rep.add("factor-iso-intertwines", inter, "phi(alpha(g)) = sigma(phi(g)) on window interiors");
  rep.add("factor-iso-round-trip", round);

  // quotient side: odd digits, reindexed
  auto qrep = [](const GroupElement& g) {
    return GroupElement{ShiftElem{take_congruent_digits(std::get<ShiftElem>(g).series, 2, 1)}};
  };
  bool qadd = true, qint = true;
  for (int t = 0; t < nsamples; ++t) {
    FieldElement a = rng.element(d, -window / 2, window / 2);
    FieldElement b = rng.element(d, -window / 2, window / 2);
    GroupElement g{ShiftElem{a}}, h{ShiftElem{b}};
    if (!group_equal(qrep(group_op(g, h)), group_op(qrep(g), qrep(h)))) qadd = false;
    GroupElement lhs = qrep(apply_automorphism(alpha, g));
    GroupElement rhs = apply_automorphism(sigma, qrep(g));
    if (!group_equal(lhs, rhs)) qint = false;
  }
  rep.add("quotient-iso-additive", qadd, "representatives on odd-support windows");
  rep.add("quotient-iso-intertwines", qint);
  rep.add("composition-series", rep.all_pass(),
          "1 < G_1 < G with both factors isomorphic to the one-step shift group");
  return {fwd, bwd, rep};
}

/// F_p((X)) inside F_{p^2}((X)) under multiplication by X; the subgroup and
/// the quotient are matched to the shift group through the module
/// coordinates in the basis (1, w).
inline VerifiedIsomorphism shift_isomorphism_subfield(std::uint64_t p, long window = 32,
                                                      int nsamples = 25, std::uint64_t seed = 0) {
  detail::require_window(window, 8);
  FieldDescriptor ext{FieldKind::laurent, p, 2};
  FieldDescriptor base{FieldKind::laurent, p, 1};
  validate(ext);
  SampleRng rng(seed);
  CheckList rep;
  GroupAutomorphismSpec alpha = RightShiftAuto{1};
  GroupAutomorphismSpec sigma = RightShiftAuto{1};

  auto fwd = [](const GroupElement& g) {
    return GroupElement{ShiftElem{module_coordinates(std::get<ShiftElem>(g).series)[0]}};
  };
  auto bwd = [ext](const GroupElement& g) {
    return GroupElement{ShiftElem{embed_into_extension(std::get<ShiftElem>(g).series, ext.f)}};
  };

  bool ring = true, stable = true, additive = true, inter = true, round = true;
  for (int t = 0; t < nsamples; ++t) {
    FieldElement a = rng.element(base, -window / 2, window / 2, true);
    FieldElement b = rng.element(base, -window / 2, window / 2, true);
    // embedding is a ring homomorphism
    if (!equal_at_precision(embed_into_extension(a, 2) * embed_into_extension(b, 2),
                            embed_into_extension(a * b, 2), 1))
      ring = false;
    if (!equal_at_precision(embed_into_extension(a, 2) + embed_into_extension(b, 2),
                            embed_into_extension(a + b, 2), 1))
      ring = false;
    GroupElement g{ShiftElem{embed_into_extension(a, 2)}};
    GroupElement ag = apply_automorphism(alpha, g);
    // stability: the w-coordinate of the image vanishes
    if (decide_zero(module_coordinates(std::get<ShiftElem>(ag).series)[1], 1) != ZeroDecision::zero)
      stable = false;
    GroupElement h{ShiftElem{embed_into_extension(b, 2)}};
    if (!group_equal(fwd(group_op(g, h)), group_op(fwd(g), fwd(h)))) additive = false;
    if (!group_equal(fwd(ag), apply_automorphism(sigma, fwd(g)))) inter = false;
    if (!group_equal(bwd(fwd(g)), g)) round = false;
  }
  rep.add("embedding-ring-homomorphism", ring);
  rep.add("subgroup-alpha-stable", stable, "X * F_p((X)) stays inside F_p((X))");
  rep.add("factor-iso-additive", additive);
  rep.add("factor-iso-intertwines", inter);
  rep.add("factor-iso-round-trip", round);

  // quotient: w-coordinate of arbitrary elements
  auto qrep = [](const GroupElement& g) {
    return GroupElement{ShiftElem{module_coordinates(std::get<ShiftElem>(g).series)[1]}};
  };
  bool qadd = true, qint = true;
  for (int t = 0; t < nsamples; ++t) {
    FieldElement a = rng.element(ext, -window / 2, window / 2);
    FieldElement b = rng.element(ext, -window / 2, window / 2);
    GroupElement g{ShiftElem{a}}, h{ShiftElem{b}};
    if (!group_equal(qrep(group_op(g, h)), group_op(qrep(g), qrep(h)))) qadd = false;
    if (!group_equal(qrep(apply_automorphism(alpha, g)), apply_automorphism(sigma, qrep(g))))
      qint = false;
  }
  rep.add("quotient-iso-additive", qadd);
  rep.add("quotient-iso-intertwines", qint);
  rep.add("composition-series", rep.all_pass(),
          "1 < F_p((X)) < F_{p^2}((X)) with both factors one-step shift groups");
  return {fwd, bwd, rep};
}

/// K^n with the rotation (x_1,...,x_n) -> (X x_n, x_1,...,x_{n-1}) is a
/// single shift group: digit interleaving conjugates the rotation to the
/// one-step right shift.
inline VerifiedIsomorphism shift_isomorphism_interleave(std::uint64_t p, unsigned n,
                                                        long window = 32, int nsamples = 25,
                                                        std::uint64_t seed = 0) {
  detail::require_window(window, 8);
  if (n < 2) throw Error(ErrorClass::precondition, "interleave needs n >= 2");
  FieldDescriptor d{FieldKind::laurent, p, 1};
  validate(d);
  SampleRng rng(seed);
  CheckList rep;
  Matrix rot(d, n, n);
  rot.at(0, n - 1) = FieldElement::uniformizer_pow(d, 1);
  for (unsigned i = 1; i < n; ++i) rot.at(i, i - 1) = FieldElement::one(d);
  GroupAutomorphismSpec alpha = LinearAuto{rot};
  GroupAutomorphismSpec sigma = RightShiftAuto{1};

  auto fwd = [](const GroupElement& g) {
    return GroupElement{ShiftElem{interleave_forward(std::get<AdditiveElem>(g).coords)}};
  };
  auto bwd = [n](const GroupElement& g) {
    return GroupElement{AdditiveElem{interleave_backward(std::get<ShiftElem>(g).series, n)}};
  };

  bool additive = true, inter = true, round = true;
  for (int t = 0; t < nsamples; ++t) {
    GroupElement g{AdditiveElem{rng.vector(d, n, -window / 2, window / 2, true)}};
    GroupElement h{AdditiveElem{rng.vector(d, n, -window / 2, window / 2)}};
    if (!group_equal(fwd(group_op(g, h)), group_op(fwd(g), fwd(h)))) additive = false;
    if (!group_equal(fwd(apply_automorphism(alpha, g)), apply_automorphism(sigma, fwd(g))))
      inter = false;
    if (!group_equal(bwd(fwd(g)), g)) round = false;
  }
  rep.add("iso-additive", additive);
  rep.add("iso-intertwines", inter, "phi(alpha(x)) = sigma(phi(x)), digitwise exact");
  rep.add("iso-round-trip", round);
  return {fwd, bwd, rep};
}

// ---- morphism extension -------------------------------------------------------

struct ExtendedMorphism {
  std::function<GroupElement(const GroupElement&)> map;
  CheckList report;
};

/// Extend a morphism defined on an alpha1-invariant ball to the whole group:
/// h(x) = alpha2^{-n}(g(alpha1^n(x))) with n the computable entry time of x
/// into the ball. Intertwining of g on the ball is spot-checked exactly.
inline ExtendedMorphism extend_morphism(const GroupContext& a1, const GroupContext& a2,
                                        const std::function<GroupElement(const GroupElement&)>& g,
                                        Rat ball_level,
                                        const std::vector<GroupElement>& ball_samples,
                                        const std::vector<GroupElement>& global_samples,
                                        long prec = kDefaultPrecision) {
  if (a1.Theta_log < Rat(0))
    throw NotInvariant("ball is not alpha1-invariant: log operator norm " +
                       rat_to_string(a1.Theta_log) + " < 0");
  CheckList rep;
  rep.add("ball-invariant", true,
          "levels gain " + rat_to_string(a1.Theta_log) + " >= 0 per application");

  for (const auto& u : ball_samples) {
    if (a1.level(u) < LogValue(ball_level))
      throw Error(ErrorClass::precondition, "ball sample below the ball level");
    if (!group_equal(g(a1.apply(u, prec)), a2.apply(g(u), prec)))
      throw NotIntertwining("g does not intertwine the automorphisms on the ball");
  }
  rep.add("g-intertwines-on-ball", true,
          std::to_string(ball_samples.size()) + " ball samples, exact");

  auto entry_time = [a1, ball_level](const GroupElement& x) -> long {
    LogValue w = a1.level(x);
    if (w.is_infinite() || !(w < LogValue(ball_level))) return 0;
    if (a1.Theta_log <= Rat(0))
      throw NotInvariant("cannot reach the ball: contraction rate is not positive");
    long n = ceil_rat((ball_level - w.value()) / a1.Theta_log);
    return n < 0 ? 0 : n;
  };
  auto h = [a1, a2, g, entry_time, prec](const GroupElement& x) {
    long n = entry_time(x);
    GroupElement y = x;
    for (long i = 0; i < n; ++i) y = a1.apply(y, prec);
    y = g(y);
    for (long i = 0; i < n; ++i) y = a2.unapply(y, prec);
    return y;
  };

  bool extends = true;
  for (const auto& u : ball_samples)
    if (!group_equal(h(u), g(u))) extends = false;
  rep.add("h-extends-g", extends);

  bool inter = true;
  for (const auto& x : global_samples)
    if (!group_equal(h(a1.apply(x, prec)), a2.apply(h(x), prec))) inter = false;
  rep.add("h-intertwines", inter, "alpha2(h(x)) = h(alpha1(x)) on all samples");
  return {h, rep};
}

// ---- the two-groups-one-linearization demonstration ---------------------------

struct SameLinearizationReport {
  CheckList checks;
  std::string conclusion;
};

/// The semidirect group and (K^3, +) share the linearization
/// diag(X^{p+1}, X, X), yet the former is non-abelian inside every ball:
/// the commutator formula (z^p b - c^p y, 0, 0) is verified exactly and an
/// explicit non-commuting pair is produced at every requested level.
inline SameLinearizationReport same_linearization_demo(std::uint64_t p, long depth = 10,
                                                       int nsamples = 20, std::uint64_t seed = 0,
                                                       long prec = kDefaultPrecision) {
  FieldDescriptor d{FieldKind::laurent, p, 1};
  validate(d);
  SampleRng rng(seed);
  SameLinearizationReport out;
  GroupAutomorphismSpec alpha = SemidirectAlphaAuto{d};

  auto sample = [&]() {
    return SemidirectElem{rng.element(d, -4, 8), rng.element(d, -4, 8), rng.element(d, -4, 8)};
  };

  // (i) commutator formula, exact
  bool formula = true;
  for (int t = 0; t < nsamples; ++t) {
    SemidirectElem g = sample(), h = sample();
    GroupElement c = commutator(GroupElement{g}, GroupElement{h});
    const auto& ce = std::get<SemidirectElem>(c);
    FieldElement expect = g.z.pow(p) * h.y - h.z.pow(p) * g.y;
    if (!equal_at_precision(ce.x, expect, 1) || decide_zero(ce.y, 1) != ZeroDecision::zero ||
        decide_zero(ce.z, 1) != ZeroDecision::zero)
      formula = false;
  }
  out.checks.add("commutator-formula", formula, "ghg^-1h^-1 = (z^p b - c^p y, 0, 0) exactly");

  // (ii) witness pair in every ball level 1..depth
  bool witness = true;
  std::string wtext;
  for (long s = 1; s <= depth; ++s) {
    SemidirectElem g{FieldElement::zero(d), FieldElement::uniformizer_pow(d, s),
                     FieldElement::zero(d)};
    SemidirectElem h{FieldElement::zero(d), FieldElement::zero(d),
                     FieldElement::uniformizer_pow(d, s)};
    GroupElement c = commutator(GroupElement{g}, GroupElement{h});
    const auto& ce = std::get<SemidirectElem>(c);
    FieldElement expect = FieldElement::uniformizer_pow(d, s * ((long)p + 1)).neg();
    if (is_identity(c) || !equal_at_precision(ce.x, expect, 1)) witness = false;
    if (s == 1) wtext = "level 1 pair: commutator x-part " + ce.x.to_string();
  }
  out.checks.add("non-commuting-pair-per-level", witness, wtext);

  // central subgroup K x 0 x 0
  bool central = true;
  for (int t = 0; t < nsamples; ++t) {
    SemidirectElem g{rng.element(d, -4, 8), FieldElement::zero(d), FieldElement::zero(d)};
    if (!is_identity(commutator(GroupElement{g}, GroupElement{sample()}))) central = false;
  }
  out.checks.add("first-coordinate-central", central, "commutators depend only on y, z, b, c");

  // (iii) the abelian group with the same linearization
  Matrix lin(d, 3, 3);
  lin.at(0, 0) = FieldElement::uniformizer_pow(d, (long)p + 1);
  lin.at(1, 1) = FieldElement::uniformizer_pow(d, 1);
  lin.at(2, 2) = FieldElement::uniformizer_pow(d, 1);
  GroupAutomorphismSpec ablin = LinearAuto{lin};
  bool abelian = true, autos = true;
  for (int t = 0; t < nsamples; ++t) {
    GroupElement g{AdditiveElem{rng.vector(d, 3, -4, 8)}};
    GroupElement h{AdditiveElem{rng.vector(d, 3, -4, 8)}};
    if (!is_identity(commutator(g, h))) abelian = false;
    if (!automorphism_property_holds(ablin, g, h, prec)) autos = false;
    SemidirectElem gs = sample(), hs = sample();
    if (!automorphism_property_holds(alpha, GroupElement{gs}, GroupElement{hs}, prec)) autos = false;
  }
  out.checks.add("additive-side-abelian", abelian, "(K^3, +): all commutators are the identity");
  out.checks.add("same-linear-automorphism", autos,
                 "diag(X^" + std::to_string(p + 1) + ", X, X) is an automorphism of both groups");
  out.conclusion =
      "the pair (Lie algebra, linearization) does not determine the contraction group in "
      "characteristic p: (K^3, +) is abelian while the semidirect group has a non-commuting "
      "pair inside every ball";
  return out;
}

// ---- named demo drivers ---------------------------------------------------------

/// Semidirect contraction group: automorphism property, contraction
/// certificate, ball facts at level 1, torsion exponent, commutator formula.
inline CheckList demo_semidirect(std::uint64_t p, std::uint64_t seed = 0,
                                 long prec = kDefaultPrecision) {
  FieldDescriptor d{FieldKind::laurent, p, 1};
  validate(d);
  SampleRng rng(seed);
  CheckList rep;
  GroupAutomorphismSpec alpha = SemidirectAlphaAuto{d};

  auto sample = [&]() {
    return GroupElement{SemidirectElem{rng.element(d, -6, 10), rng.element(d, -6, 10, true),
                                       rng.element(d, -6, 10, true)}};
  };
  bool autos = true;
  for (int t = 0; t < 20 && autos; ++t) autos = automorphism_property_holds(alpha, sample(), sample(), prec);
  rep.add("automorphism-property", autos, "alpha(g h) = alpha(g) alpha(h) exactly on 20 pairs");

  std::vector<GroupElement> samples;
  for (int t = 0; t < 10; ++t) samples.push_back(sample());
  auto crep = contractivity_report(alpha, samples, 50, prec);
  rep.add("contraction-certificate", crep.checks.all_pass(),
          "levels gain at least " + rat_to_string(crep.Theta_log) + " per step");

  rep.merge(ball_lemma_check(alpha, Rat(1), prec, seed, 10));

  std::vector<GroupElement> torsion_samples;
  SampleRng rng2(seed + 1);
  for (int t = 0; t < 20; ++t)
    torsion_samples.push_back(GroupElement{SemidirectElem{rng2.element(d, -6, 10),
                                                          rng2.element(d, -6, 10, true),
                                                          rng2.element(d, -6, 10, true)}});
  std::uint64_t e = torsion_exponent(torsion_samples, p);
  rep.add("torsion-exponent-divides-p2", (p * p) % e == 0,
          "smallest p-power killing all 20 samples: " + std::to_string(e));
  return rep;
}

/// Heisenberg BCH integration over Q_5 together with the forced rejection
/// over Q_2 (the coefficient 1/2 is not a 2-adic integer).
inline CheckList demo_heisenberg_bch(std::uint64_t seed = 0, long prec = kDefaultPrecision) {
  FieldDescriptor q5{FieldKind::padic, 5, 1};
  LieAlgebra heis(q5, 3, {{0, 1, 2, FieldElement::one(q5)}});
  Matrix b(q5, 3, 3);
  b.at(0, 0) = FieldElement::from_integer(q5, 5);
  b.at(1, 1) = FieldElement::from_integer(q5, 5);
  b.at(2, 2) = FieldElement::from_integer(q5, 25);
  auto integ = bch_integrate(heis, b, prec, seed, 30, 50);
  CheckList rep = integ.report;

  FieldDescriptor q2{FieldKind::padic, 2, 1};
  LieAlgebra heis2(q2, 3, {{0, 1, 2, FieldElement::one(q2)}});
  Matrix b2(q2, 3, 3);
  b2.at(0, 0) = FieldElement::from_integer(q2, 2);
  b2.at(1, 1) = FieldElement::from_integer(q2, 2);
  b2.at(2, 2) = FieldElement::from_integer(q2, 4);
  bool rejected = false;
  std::string msg;
  try {
    bch_integrate(heis2, b2, prec, seed);
  } catch (const DenominatorNotUnit& e) {
    rejected = true;
    msg = e.what();
  }
  rep.add("q2-rejected", rejected, msg);
  return rep;
}

}  // namespace ulf
