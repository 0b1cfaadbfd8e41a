#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "ulf/bch.hpp"
#include "ulf/lie.hpp"
#include "ulf/spectral.hpp"

namespace ulf {

// ---- check reporting -------------------------------------------------------

struct Check {
  std::string name;
  bool pass;
  std::string witness;
};

struct CheckList {
  std::vector<Check> checks;
  void add(const std::string& name, bool pass, const std::string& witness = "") {
    checks.push_back({name, pass, witness});
  }
  void merge(const CheckList& o) {
    checks.insert(checks.end(), o.checks.begin(), o.checks.end());
  }
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

// ---- deterministic sampling ------------------------------------------------

/// mt19937_64 is bit-exact across platforms; raw modulo keeps reports
/// byte-identical for a fixed seed.
class SampleRng {
public:
  explicit SampleRng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next(std::uint64_t n) { return n ? eng_() % n : 0; }

  long integer(long lo, long hi) { return lo + (long)next((std::uint64_t)(hi - lo)); }

  /// Random exact element with valuation >= lo and support below hi.
  FieldElement element(const FieldDescriptor& d, long lo, long hi, bool nonzero = false) {
    std::uint64_t q = d.residue_size();
    std::vector<std::uint64_t> digits;
    for (long pos = lo; pos < hi; ++pos) digits.push_back(next(q));
    FieldElement e = FieldElement::from_digits(d, lo, std::move(digits), /*exact=*/true);
    if (nonzero && e.is_zero()) {
      std::vector<std::uint64_t> one{1 + next(q - 1)};
      return FieldElement::from_digits(d, integer(lo, hi), std::move(one), true);
    }
    return e;
  }

  Vec vector(const FieldDescriptor& d, std::size_t n, long lo, long hi, bool nonzero = false) {
    Vec v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(element(d, lo, hi));
    if (nonzero) {
      bool z = true;
      for (const auto& x : v) z = z && x.is_zero();
      if (z) v[next(n)] = element(d, lo, hi, true);
    }
    return v;
  }

private:
  std::mt19937_64 eng_;
};

// ---- group elements ---------------------------------------------------------

struct AdditiveElem {
  Vec coords;
};

/// Windowed digit sequence of the shift group C_q^(-N) x C_q^(N_0), realized
/// as a Laurent series: zero tail on the left, precision tail on the right.
struct ShiftElem {
  FieldElement series;
};

struct SemidirectElem {
  FieldElement x, y, z;
};

class BchGroup;

struct BchElem {
  std::shared_ptr<const BchGroup> group;
  Vec coords;
};

using GroupElement = std::variant<AdditiveElem, ShiftElem, SemidirectElem, BchElem>;

inline std::string tag_of(const GroupElement& g) {
  switch (g.index()) {
    case 0: return "additive(" + std::to_string(std::get<AdditiveElem>(g).coords.size()) + ")";
    case 1: return "shift";
    case 2: return "semidirect";
    default: return "bch";
  }
}

/// Baker-Campbell-Hausdorff group on the underlying space of a nilpotent Lie
/// algebra over Q_p with p > nilpotency class: the truncated series is a
/// polynomial group law, exactly associative at the truncation degree.
class BchGroup : public std::enable_shared_from_this<BchGroup> {
public:
  BchGroup(LieAlgebra algebra, Matrix autom, long cls, long prec)
      : algebra_(std::move(algebra)), autom_(std::move(autom)), cls_(cls), prec_(prec) {}

  const LieAlgebra& algebra() const { return algebra_; }
  const Matrix& automorphism() const { return autom_; }
  long nilpotency_class() const { return cls_; }
  long precision() const { return prec_; }

  Vec multiply(const Vec& a, const Vec& b) const {
    const FieldDescriptor& d = algebra_.descriptor();
    Vec acc(algebra_.dim(), FieldElement::zero(d));
    for (const auto& term : bch_terms((int)cls_)) {
      Vec t = term.word.back() ? b : a;
      for (std::size_t i = term.word.size() - 1; i-- > 0;)
        t = algebra_.bracket(term.word[i] ? b : a, t);
      if (vec_min_valuation(t).is_infinite()) continue;
      FieldElement c = FieldElement::from_rational(d, term.coeff.numerator(),
                                                   term.coeff.denominator(), prec_);
      acc = vec_add(acc, vec_scale(c, t));
    }
    return acc;
  }

private:
  LieAlgebra algebra_;
  Matrix autom_;
  long cls_;
  long prec_;
};

// ---- group operations --------------------------------------------------------

inline const FieldDescriptor& element_field(const GroupElement& g) {
  switch (g.index()) {
    case 0: {
      const auto& a = std::get<AdditiveElem>(g);
      if (a.coords.empty()) throw Error(ErrorClass::precondition, "empty additive element");
      return a.coords[0].descriptor();
    }
    case 1: return std::get<ShiftElem>(g).series.descriptor();
    case 2: return std::get<SemidirectElem>(g).x.descriptor();
    default: return std::get<BchElem>(g).group->algebra().descriptor();
  }
}

inline void require_same_group(const GroupElement& g, const GroupElement& h) {
  if (g.index() != h.index()) throw TagMismatch("group elements " + tag_of(g) + " vs " + tag_of(h));
  if (g.index() == 0 &&
      std::get<AdditiveElem>(g).coords.size() != std::get<AdditiveElem>(h).coords.size())
    throw TagMismatch("additive elements of different rank");
  if (g.index() == 3 && std::get<BchElem>(g).group != std::get<BchElem>(h).group)
    throw TagMismatch("BCH elements of different groups");
  require_same(element_field(g), element_field(h));
}

inline GroupElement group_op(const GroupElement& g, const GroupElement& h) {
  require_same_group(g, h);
  switch (g.index()) {
    case 0:
      return AdditiveElem{vec_add(std::get<AdditiveElem>(g).coords, std::get<AdditiveElem>(h).coords)};
    case 1:
      return ShiftElem{std::get<ShiftElem>(g).series + std::get<ShiftElem>(h).series};
    case 2: {
      const auto& a = std::get<SemidirectElem>(g);
      const auto& b = std::get<SemidirectElem>(h);
      std::uint64_t p = a.x.descriptor().p;
      // (x,y,z)*(a,b,c) = (x + a + z^p b, y + b, z + c)
      return SemidirectElem{a.x + b.x + a.z.pow(p) * b.y, a.y + b.y, a.z + b.z};
    }
    default: {
      const auto& a = std::get<BchElem>(g);
      const auto& b = std::get<BchElem>(h);
      return BchElem{a.group, a.group->multiply(a.coords, b.coords)};
    }
  }
}

inline GroupElement group_inv(const GroupElement& g) {
  switch (g.index()) {
    case 0: {
      Vec v = std::get<AdditiveElem>(g).coords;
      for (auto& x : v) x = x.neg();
      return AdditiveElem{std::move(v)};
    }
    case 1: return ShiftElem{std::get<ShiftElem>(g).series.neg()};
    case 2: {
      const auto& a = std::get<SemidirectElem>(g);
      std::uint64_t p = a.x.descriptor().p;
      // (x,y,z)^{-1} = (-x + z^p y, -y, -z)
      return SemidirectElem{a.x.neg() + a.z.pow(p) * a.y, a.y.neg(), a.z.neg()};
    }
    default: {
      const auto& a = std::get<BchElem>(g);
      Vec v = a.coords;
      for (auto& x : v) x = x.neg();
      return BchElem{a.group, std::move(v)};
    }
  }
}

inline GroupElement commutator(const GroupElement& g, const GroupElement& h) {
  return group_op(group_op(g, h), group_op(group_inv(g), group_inv(h)));
}

inline GroupElement identity_like(const GroupElement& g) {
  const FieldDescriptor& d = element_field(g);
  switch (g.index()) {
    case 0: return AdditiveElem{Vec(std::get<AdditiveElem>(g).coords.size(), FieldElement::zero(d))};
    case 1: return ShiftElem{FieldElement::zero(d)};
    case 2: return SemidirectElem{FieldElement::zero(d), FieldElement::zero(d), FieldElement::zero(d)};
    default: {
      const auto& a = std::get<BchElem>(g);
      return BchElem{a.group, Vec(a.coords.size(), FieldElement::zero(d))};
    }
  }
}

inline std::vector<FieldElement> element_coords(const GroupElement& g) {
  switch (g.index()) {
    case 0: return std::get<AdditiveElem>(g).coords;
    case 1: return {std::get<ShiftElem>(g).series};
    case 2: {
      const auto& a = std::get<SemidirectElem>(g);
      return {a.x, a.y, a.z};
    }
    default: return std::get<BchElem>(g).coords;
  }
}

inline bool is_identity(const GroupElement& g, long margin = 1) {
  for (const auto& c : element_coords(g))
    if (decide_zero(c, margin) == ZeroDecision::nonzero) return false;
  return true;
}

inline bool group_equal(const GroupElement& g, const GroupElement& h, long margin = 1) {
  require_same_group(g, h);
  auto a = element_coords(g), b = element_coords(h);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!equal_at_precision(a[i], b[i], margin)) return false;
  return true;
}

inline GroupElement group_pow(const GroupElement& g, std::uint64_t n) {
  GroupElement acc = identity_like(g);
  GroupElement base = g;
  while (n) {
    if (n & 1) acc = group_op(acc, base);
    n >>= 1;
    if (n) base = group_op(base, base);
  }
  return acc;
}

/// Coordinate-wise minimum valuation: the ball level of the element in the
/// group's standard gauge.
inline LogValue group_level(const GroupElement& g) {
  LogValue m = LogValue::infinity();
  for (const auto& c : element_coords(g)) m = min(m, c.log_valuation());
  return m;
}

// ---- automorphism specs -----------------------------------------------------

struct LinearAuto {
  Matrix a;
};
struct RightShiftAuto {
  long steps = 1;
};
/// The fixed automorphism (x,y,z) -> (X^{p+1} x, X y, X z) of the semidirect
/// group over F_q((X)).
struct SemidirectAlphaAuto {
  FieldDescriptor field;
};
struct BchLinearAuto {
  Matrix a;
};

using GroupAutomorphismSpec = std::variant<LinearAuto, RightShiftAuto, SemidirectAlphaAuto, BchLinearAuto>;

inline GroupElement apply_automorphism(const GroupAutomorphismSpec& spec, const GroupElement& g,
                                       long prec = kDefaultPrecision, bool inverse_map = false) {
  (void)prec;
  if (std::holds_alternative<LinearAuto>(spec)) {
    if (!std::holds_alternative<AdditiveElem>(g)) throw TagMismatch("linear automorphism needs an additive element");
    const Matrix& a = std::get<LinearAuto>(spec).a;
    Matrix m = inverse_map ? inverse(a, prec) : a;
    return AdditiveElem{matvec(m, std::get<AdditiveElem>(g).coords)};
  }
  if (std::holds_alternative<RightShiftAuto>(spec)) {
    if (!std::holds_alternative<ShiftElem>(g)) throw TagMismatch("shift automorphism needs a shift element");
    long k = std::get<RightShiftAuto>(spec).steps;
    return ShiftElem{std::get<ShiftElem>(g).series.shifted(inverse_map ? -k : k)};
  }
  if (std::holds_alternative<SemidirectAlphaAuto>(spec)) {
    if (!std::holds_alternative<SemidirectElem>(g))
      throw TagMismatch("semidirect automorphism needs a semidirect element");
    const auto& e = std::get<SemidirectElem>(g);
    long p = (long)e.x.descriptor().p;
    long s = inverse_map ? -1 : 1;
    return SemidirectElem{e.x.shifted(s * (p + 1)), e.y.shifted(s), e.z.shifted(s)};
  }
  const auto& ba = std::get<BchLinearAuto>(spec);
  if (!std::holds_alternative<BchElem>(g)) throw TagMismatch("BCH automorphism needs a BCH element");
  Matrix m = inverse_map ? inverse(ba.a, prec) : ba.a;
  const auto& e = std::get<BchElem>(g);
  return BchElem{e.group, matvec(m, e.coords)};
}

/// Precomputed data for one automorphism: norm and log-scale operator
/// bounds, used for ball levels and entry-time certificates.
class GroupContext {
public:
  GroupAutomorphismSpec spec;
  std::optional<ValuationNorm> norm;  // linear kinds only
  Rat theta_log{0}, Theta_log{0};     // max / min spectral valuation

  static GroupContext make(const GroupAutomorphismSpec& spec, long prec = kDefaultPrecision) {
    GroupContext c;
    c.spec = spec;
    if (std::holds_alternative<LinearAuto>(spec)) {
      const Matrix& a = std::get<LinearAuto>(spec).a;
      c.norm = adapted_norm(a, prec);
      auto [th, Th] = operator_bounds(a, *c.norm, prec);
      c.theta_log = th;
      c.Theta_log = Th;
    } else if (std::holds_alternative<RightShiftAuto>(spec)) {
      long k = std::get<RightShiftAuto>(spec).steps;
      c.theta_log = Rat(k);
      c.Theta_log = Rat(k);
    } else if (std::holds_alternative<SemidirectAlphaAuto>(spec)) {
      const FieldDescriptor& d = std::get<SemidirectAlphaAuto>(spec).field;
      Matrix lin(d, 3, 3);
      lin.at(0, 0) = FieldElement::uniformizer_pow(d, (long)d.p + 1);
      lin.at(1, 1) = FieldElement::uniformizer_pow(d, 1);
      lin.at(2, 2) = FieldElement::uniformizer_pow(d, 1);
      auto n = adapted_norm(lin, prec);
      auto [th, Th] = operator_bounds(lin, n, prec);
      c.theta_log = th;
      c.Theta_log = Th;
    } else {
      const Matrix& a = std::get<BchLinearAuto>(spec).a;
      c.norm = adapted_norm(a, prec);
      auto [th, Th] = operator_bounds(a, *c.norm, prec);
      c.theta_log = th;
      c.Theta_log = Th;
    }
    return c;
  }

  LogValue level(const GroupElement& g) const {
    if (norm && (std::holds_alternative<AdditiveElem>(g) || std::holds_alternative<BchElem>(g)))
      return norm->value(element_coords(g));
    return group_level(g);
  }

  GroupElement apply(const GroupElement& g, long prec = kDefaultPrecision) const {
    return apply_automorphism(spec, g, prec, false);
  }
  GroupElement unapply(const GroupElement& g, long prec = kDefaultPrecision) const {
    return apply_automorphism(spec, g, prec, true);
  }
};

// ---- contractivity reports ---------------------------------------------------

struct ContractivityReport {
  Rat theta_log, Theta_log;
  bool uniformly_contractive = false;
  CheckList checks;
};

/// Certify, per sample, that ball levels of iterates are nondecreasing,
/// grow at least Theta_log per step, and reach a target level by the
/// computable entry time n0 = ceil((target - w(g)) / Theta_log). Together
/// with alpha-invariance of the norm balls this witnesses uniform (hence
/// compact) contractivity.
inline ContractivityReport contractivity_report(const GroupAutomorphismSpec& spec,
                                                const std::vector<GroupElement>& samples,
                                                int horizon, long prec = kDefaultPrecision,
                                                Rat target = Rat(20)) {
  GroupContext ctx = GroupContext::make(spec, prec);
  ContractivityReport rep;
  rep.theta_log = ctx.theta_log;
  rep.Theta_log = ctx.Theta_log;
  if (ctx.Theta_log <= Rat(0))
    throw NotContractive("minimal characteristic valuation is " + rat_to_string(ctx.Theta_log));
  rep.uniformly_contractive = true;
  rep.checks.add("norm-balls-invariant", true,
                 "log operator norm " + rat_to_string(ctx.Theta_log) + " > 0");
  int idx = 0;
  for (const auto& g0 : samples) {
    LogValue w0 = ctx.level(g0);
    bool monotone = true, bound = true;
    std::optional<int> entry;
    GroupElement g = g0;
    for (int n = 1; n <= horizon; ++n) {
      LogValue prev = ctx.level(g);
      g = ctx.apply(g, prec);
      LogValue cur = ctx.level(g);
      if (cur < prev) monotone = false;
      if (!w0.is_infinite() && !cur.is_infinite() &&
          cur.value() < w0.value() + Rat(n) * ctx.Theta_log)
        bound = false;
      if (!entry && (cur.is_infinite() || cur.value() >= target)) entry = n;
    }
    std::string name = "sample-" + std::to_string(idx++);
    rep.checks.add(name + "-monotone", monotone);
    rep.checks.add(name + "-rate", bound,
                   "w(a^n g) >= w(g) + n*" + rat_to_string(ctx.Theta_log));
    if (!w0.is_infinite()) {
      long n0 = ceil_rat((target - w0.value()) / ctx.Theta_log);
      if (n0 < 0) n0 = 0;
      bool entry_ok = n0 > horizon || (entry && *entry <= n0);
      rep.checks.add(name + "-entry-time", entry_ok,
                     "predicted n0 = " + std::to_string(n0));
    }
  }
  return rep;
}

// ---- automorphism property ----------------------------------------------------

inline bool automorphism_property_holds(const GroupAutomorphismSpec& spec, const GroupElement& g,
                                        const GroupElement& h, long prec = kDefaultPrecision,
                                        long margin = 1) {
  GroupElement lhs = apply_automorphism(spec, group_op(g, h), prec);
  GroupElement rhs = group_op(apply_automorphism(spec, g, prec), apply_automorphism(spec, h, prec));
  return group_equal(lhs, rhs, margin);
}

// ---- torsion ------------------------------------------------------------------

/// Smallest p-power e with g^e = 1 for every sample; cap p^8.
inline std::uint64_t torsion_exponent(const std::vector<GroupElement>& samples,
                                      std::uint64_t p) {
  std::uint64_t e = 1;
  for (const auto& g0 : samples) {
    GroupElement g = g0;
    std::uint64_t order = 1;
    while (!is_identity(g)) {
      g = group_pow(g, p);
      order *= p;
      std::uint64_t cap = 1;
      for (int i = 0; i < 8; ++i) cap *= p;
      if (order > cap)
        throw NotTorsion("element order exceeds p^8; group is not torsion of small exponent");
    }
    e = std::max(e, order);
  }
  return e;
}

// ---- ball subgroup lemma, items (a)-(d) ----------------------------------------

struct BallSubgroup {
  ValuationNorm norm;
  Rat level;
  bool contains(const Vec& v) const { return !(norm.value(v) < LogValue(level)); }
};

/// Exact log-scale verification of the ball-subgroup facts for the adapted
/// gauge: (a) squeezing of alpha(U_s), (b) commutators land deeper,
/// (c) p-th powers scale the level by one in characteristic zero,
/// (d) p-th powers collapse in characteristic p.
inline CheckList ball_lemma_check(const GroupAutomorphismSpec& spec, Rat s_log,
                                  long prec = kDefaultPrecision, std::uint64_t seed = 0,
                                  int nsamples = 10) {
  CheckList out;
  SampleRng rng(seed);
  GroupContext ctx = GroupContext::make(spec, prec);
  if (ctx.Theta_log <= Rat(0)) throw NotContractive("ball lemma needs a contractive automorphism");

  if (std::holds_alternative<LinearAuto>(spec)) {
    const Matrix& a = std::get<LinearAuto>(spec).a;
    const FieldDescriptor& d = a.descriptor();
    const ValuationNorm& n = *ctx.norm;
    // (a) basis image levels: s + Theta <= w(alpha b_i) - c_i + s <= s + theta
    bool ok = true;
    for (std::size_t j = 0; j < n.basis.cols(); ++j) {
      LogValue w = n.value(matvec(a, n.basis.column(j)));
      Rat gain = w.value() - n.shifts[j];
      if (gain < ctx.Theta_log || gain > ctx.theta_log) ok = false;
    }
    out.add("a-squeeze", ok,
            "U_{s+" + rat_to_string(ctx.theta_log) + "} <= alpha(U_s) <= U_{s+" +
                rat_to_string(ctx.Theta_log) + "} (log scale, s = " + rat_to_string(s_log) + ")");
    // (b) the group is abelian: commutators of ball elements are trivial
    out.add("b-quotient-abelian", true, "additive group: all commutators are the identity");
    long base = ceil_rat(s_log);
    if (d.kind == FieldKind::padic) {
      // (c) exact: p * U_s = U_{s + 1}
      bool c_ok = true;
      FieldElement pe = FieldElement::from_integer(d, (long long)d.p);
      for (int t = 0; t < nsamples; ++t) {
        Vec v = rng.vector(d, a.rows(), base, base + 8, true);
        LogValue wv = n.value(v);
        LogValue wp = n.value(vec_scale(pe, v));
        if (wp.value() != wv.value() + Rat(1)) c_ok = false;
        // and downward: any u at level s+1 is p * (u/p) with u/p at level s
        Vec u = vec_scale(pe, v);
        Vec half = vec_scale(pe.inv(prec), u);
        if (n.value(half) != wv) c_ok = false;
      }
      out.add("c-pth-power-level", c_ok, "p*U_s = U_{s+1} exactly (v(p x) = v(x) + 1)");
    } else {
      // (d) characteristic p: p-th powers vanish
      bool d_ok = true;
      for (int t = 0; t < nsamples; ++t) {
        Vec v = rng.vector(d, a.rows(), base, base + 8, true);
        Vec s = v;
        for (std::uint64_t i = 1; i < d.p; ++i) s = vec_add(s, v);
        if (!vec_min_valuation(s).is_infinite()) d_ok = false;
      }
      out.add("d-char-p-collapse", d_ok, "(U_s)^p = {1}: additive p-th powers vanish");
    }
    return out;
  }

  if (std::holds_alternative<SemidirectAlphaAuto>(spec)) {
    const FieldDescriptor& d = std::get<SemidirectAlphaAuto>(spec).field;
    long p = (long)d.p;
    long base = ceil_rat(s_log);
    auto sample_at = [&](long lvl) {
      return SemidirectElem{rng.element(d, lvl, lvl + 8), rng.element(d, lvl, lvl + 8),
                            rng.element(d, lvl, lvl + 8)};
    };
    // (a) componentwise exact: x gains p+1, y and z gain 1
    bool a_ok = true;
    for (int t = 0; t < nsamples; ++t) {
      GroupElement g{sample_at(base)};
      LogValue w = group_level(g);
      GroupElement ag = ctx.apply(g, prec);
      LogValue wa = group_level(ag);
      if (!w.is_infinite() && (wa < w + LogValue(ctx.Theta_log) || LogValue(w.value() + ctx.theta_log) < wa))
        a_ok = false;
      GroupElement back = ctx.unapply(ag, prec);
      if (!group_equal(back, g)) a_ok = false;
    }
    out.add("a-squeeze", a_ok,
            "alpha(U_s) between U_{s+" + rat_to_string(ctx.Theta_log) + "} and U_{s+" +
                rat_to_string(ctx.theta_log) + "}");
    // (b) commutators land in the deeper ball, with the exact formula bound
    bool b_ok = true;
    std::string witness;
    for (int t = 0; t < nsamples; ++t) {
      SemidirectElem g = sample_at(base), h = sample_at(base);
      GroupElement c = commutator(GroupElement{g}, GroupElement{h});
      const auto& ce = std::get<SemidirectElem>(c);
      // f(g,h) = (z^p b - c^p y, 0, 0)
      FieldElement expect = g.z.pow((std::uint64_t)p) * h.y - h.z.pow((std::uint64_t)p) * g.y;
      if (!equal_at_precision(ce.x, expect, 1) || decide_zero(ce.y, 1) != ZeroDecision::zero ||
          decide_zero(ce.z, 1) != ZeroDecision::zero)
        b_ok = false;
      LogValue lvl = group_level(c);
      // direct bound: w >= min(p v(z) + v(b), p v(c) + v(y)) > s
      LogValue t1 = g.z.log_valuation().is_infinite() || h.y.log_valuation().is_infinite()
                        ? LogValue::infinity()
                        : LogValue(Rat(p) * g.z.log_valuation().value() + h.y.log_valuation().value());
      LogValue t2 = h.z.log_valuation().is_infinite() || g.y.log_valuation().is_infinite()
                        ? LogValue::infinity()
                        : LogValue(Rat(p) * h.z.log_valuation().value() + g.y.log_valuation().value());
      LogValue predicted = min(t1, t2);
      if (lvl < predicted) b_ok = false;
      if (!lvl.is_infinite() && !(LogValue(s_log) < lvl)) b_ok = false;
      if (t == 0) witness = "commutator level " + lvl.to_string() + " >= p*w(z)+w(b) bound " +
                            predicted.to_string() + " > s = " + rat_to_string(s_log);
    }
    out.add("b-commutators-deeper", b_ok, witness);
    // (d) p-th powers by iterated multiplication
    bool d_ok = true;
    std::string dwit;
    for (int t = 0; t < nsamples; ++t) {
      GroupElement g{sample_at(base)};
      GroupElement gp = group_pow(g, (std::uint64_t)p);
      LogValue lvl = group_level(gp);
      if (!(LogValue(s_log) < lvl)) d_ok = false;
      if (t == 0) dwit = "g^p level " + lvl.to_string() + " (epsilon-deeper than s = " +
                         rat_to_string(s_log) + ")";
    }
    out.add("d-pth-powers-deeper", d_ok, dwit);
    return out;
  }

  throw TagMismatch("ball lemma check supports additive and semidirect groups");
}

// ---- BCH integration -----------------------------------------------------------

struct BchIntegration {
  std::shared_ptr<BchGroup> group;
  CheckList report;
};

/// Turn a contractive automorphism of a nilpotent Lie algebra over Q_p
/// (p > nilpotency class) into a polynomial group with the truncated BCH law
/// and the same linear map as a contractive group automorphism. Verifies
/// associativity, inverses, the automorphism property, and a contraction
/// certificate on seeded samples.
inline BchIntegration bch_integrate(const LieAlgebra& l, const Matrix& b,
                                    long prec = kDefaultPrecision, std::uint64_t seed = 0,
                                    int ntriples = 30, int horizon = 50) {
  const FieldDescriptor& d = l.descriptor();
  if (d.kind != FieldKind::padic)
    throw DescriptorMismatch("BCH integration needs a characteristic-zero field (Q_p)");
  l.validate();
  check_lie_automorphism(l, b, prec);
  auto lcs = lower_central_series(l, prec);
  if (!lcs.nilpotency_class) throw NotNilpotent("Lie algebra is not nilpotent");
  long cls = *lcs.nilpotency_class;
  if ((long)d.p <= cls)
    throw DenominatorNotUnit("a BCH coefficient denominator is divisible by p = " +
                             std::to_string(d.p) + " (nilpotency class " + std::to_string(cls) +
                             ")");
  for (const auto& t : bch_terms((int)cls))
    if (t.coeff.denominator() % (long long)d.p == 0)
      throw DenominatorNotUnit("BCH coefficient " + rat_to_string(t.coeff) +
                               " is not a p-adic integer");
  if (!is_contractive(b, prec).contractive)
    throw NotContractive("linear automorphism is not contractive");

  auto group = std::make_shared<BchGroup>(l, b, cls, prec);
  CheckList rep;
  SampleRng rng(seed);
  auto sample = [&]() { return GroupElement{BchElem{group, rng.vector(d, l.dim(), 0, 5)}}; };

  bool assoc = true;
  for (int i = 0; i < ntriples && assoc; ++i) {
    GroupElement x = sample(), y = sample(), z = sample();
    assoc = group_equal(group_op(group_op(x, y), z), group_op(x, group_op(y, z)));
  }
  rep.add("bch-associativity", assoc,
          std::to_string(ntriples) + " random triples, exact on all claimed digits");

  bool inv_ok = true;
  for (int i = 0; i < 10 && inv_ok; ++i) {
    GroupElement x = sample();
    inv_ok = is_identity(group_op(x, group_inv(x))) && is_identity(group_op(group_inv(x), x));
  }
  rep.add("bch-inverses", inv_ok);

  GroupAutomorphismSpec spec = BchLinearAuto{b};
  bool autm = true;
  for (int i = 0; i < 10 && autm; ++i) autm = automorphism_property_holds(spec, sample(), sample(), prec);
  rep.add("bch-automorphism-property", autm, "alpha(g h) = alpha(g) alpha(h) exactly");

  std::vector<GroupElement> samples;
  for (int i = 0; i < 10; ++i) samples.push_back(sample());
  auto crep = contractivity_report(spec, samples, horizon, prec);
  rep.add("bch-contraction-certificate", crep.checks.all_pass(),
          "levels grow by at least " + rat_to_string(crep.Theta_log) + " per step over " +
              std::to_string(horizon) + " iterations");
  return {group, rep};
}

}  // namespace ulf
