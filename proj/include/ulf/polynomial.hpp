#pragma once

#include <string>
#include <vector>

#include "ulf/field.hpp"

namespace ulf {

/// Dense polynomial over K, coefficients low-to-high.
struct Poly {
  FieldDescriptor desc;
  std::vector<FieldElement> c;

  static Poly zero(const FieldDescriptor& d) { return Poly{d, {}}; }

  static Poly from_coeffs(const FieldDescriptor& d, std::vector<FieldElement> coeffs) {
    Poly f{d, std::move(coeffs)};
    f.trim();
    return f;
  }

  long degree() const { return (long)c.size() - 1; }

  FieldElement coeff_or_zero(std::size_t i) const {
    return i < c.size() ? c[i] : FieldElement::zero(desc);
  }

  void trim() {
    while (!c.empty() && c.back().is_zero()) c.pop_back();
  }

  bool is_monic() const {
    return !c.empty() && c.back().exact() && equal_at_precision(c.back(), FieldElement::one(desc));
  }

  std::string to_string(const std::string& var = "t") const {
    if (c.empty()) return "0";
    std::string out;
    for (std::size_t i = c.size(); i-- > 0;) {
      if (c[i].is_zero()) continue;
      if (!out.empty()) out += " + ";
      std::string cs = c[i].to_string();
      if (i == 0) {
        out += cs;
      } else {
        std::string xs = i == 1 ? var : var + "^" + std::to_string(i);
        out += (cs == "1") ? xs : "(" + cs + ")*" + xs;
      }
    }
    return out.empty() ? "0" : out;
  }
};

inline Poly operator+(const Poly& f, const Poly& g) {
  require_same(f.desc, g.desc);
  std::vector<FieldElement> c(std::max(f.c.size(), g.c.size()), FieldElement::zero(f.desc));
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = f.coeff_or_zero(i) + g.coeff_or_zero(i);
  return Poly::from_coeffs(f.desc, std::move(c));
}

inline Poly operator-(const Poly& f, const Poly& g) {
  require_same(f.desc, g.desc);
  std::vector<FieldElement> c(std::max(f.c.size(), g.c.size()), FieldElement::zero(f.desc));
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = f.coeff_or_zero(i) - g.coeff_or_zero(i);
  return Poly::from_coeffs(f.desc, std::move(c));
}

inline Poly operator*(const Poly& f, const Poly& g) {
  require_same(f.desc, g.desc);
  if (f.c.empty() || g.c.empty()) return Poly::zero(f.desc);
  std::vector<FieldElement> c(f.c.size() + g.c.size() - 1, FieldElement::zero(f.desc));
  for (std::size_t i = 0; i < f.c.size(); ++i) {
    if (f.c[i].is_zero()) continue;
    for (std::size_t j = 0; j < g.c.size(); ++j) c[i + j] = c[i + j] + f.c[i] * g.c[j];
  }
  return Poly::from_coeffs(f.desc, std::move(c));
}

inline Poly operator*(const FieldElement& a, const Poly& f) {
  std::vector<FieldElement> c;
  c.reserve(f.c.size());
  for (const auto& x : f.c) c.push_back(a * x);
  return Poly::from_coeffs(f.desc, std::move(c));
}

/// Division by a polynomial with exact unit leading coefficient 1; uses only
/// ring operations, so precision follows the ultrametric propagation rules.
inline std::pair<Poly, Poly> divmod_monic(const Poly& f, const Poly& g) {
  require_same(f.desc, g.desc);
  if (g.c.empty() || !g.is_monic())
    throw Error(ErrorClass::precondition, "divmod_monic requires a monic divisor");
  if (f.degree() < g.degree()) return {Poly::zero(f.desc), f};
  std::vector<FieldElement> rem = f.c;
  std::vector<FieldElement> q((std::size_t)(f.degree() - g.degree() + 1),
                              FieldElement::zero(f.desc));
  for (std::size_t k = q.size(); k-- > 0;) {
    FieldElement c = rem[k + (std::size_t)g.degree()];
    q[k] = c;
    if (c.is_zero()) continue;
    for (std::size_t i = 0; i <= (std::size_t)g.degree(); ++i)
      rem[k + i] = rem[k + i] - c * g.c[i];
  }
  rem.resize((std::size_t)g.degree() >= 1 ? (std::size_t)g.degree() : 0);
  return {Poly::from_coeffs(f.desc, std::move(q)), Poly::from_coeffs(f.desc, std::move(rem))};
}

inline FieldElement eval(const Poly& f, const FieldElement& x) {
  FieldElement acc = FieldElement::zero(f.desc);
  for (std::size_t i = f.c.size(); i-- > 0;) acc = acc * x + f.c[i];
  return acc;
}

/// Index of the highest coefficient that is certainly nonzero at the margin;
/// -1 when all coefficients decide to zero.
inline long certain_degree(const Poly& f, long margin = kMinSigDigits) {
  for (std::size_t i = f.c.size(); i-- > 0;)
    if (decide_zero(f.c[i], margin) == ZeroDecision::nonzero) return (long)i;
  return -1;
}

/// Scale to leading coefficient 1 (leading chosen by certain_degree).
inline Poly monicize(const Poly& f, long prec = kDefaultPrecision) {
  long d = certain_degree(f);
  if (d < 0) throw PrecisionExhausted("polynomial is zero at available precision");
  std::vector<FieldElement> c;
  c.reserve((std::size_t)d + 1);
  for (long i = 0; i < d; ++i) c.push_back(FieldElement::div(f.c[(std::size_t)i], f.c[(std::size_t)d], prec));
  c.push_back(FieldElement::one(f.desc));
  return Poly::from_coeffs(f.desc, std::move(c));
}

/// Extended Euclid: returns (s, t) with s*f + t*g = 1 at working precision.
/// Throws PrecisionExhausted when f and g are not coprime at the margin.
inline std::pair<Poly, Poly> bezout_coprime(const Poly& f, const Poly& g,
                                            long prec = kDefaultPrecision) {
  require_same(f.desc, g.desc);
  const FieldDescriptor& d = f.desc;
  Poly r0 = f, r1 = g;
  Poly s0 = Poly::from_coeffs(d, {FieldElement::one(d)}), s1 = Poly::zero(d);
  Poly t0 = Poly::zero(d), t1 = Poly::from_coeffs(d, {FieldElement::one(d)});
  while (true) {
    long d1 = certain_degree(r1);
    if (d1 < 0)
      throw PrecisionExhausted("polynomials are not coprime at available precision");
    if (d1 == 0) {
      FieldElement inv = r1.c[0].inv(prec);
      return {inv * s1, inv * t1};
    }
    // divide r0 by r1 (monicized to keep the division ring-only)
    FieldElement lead = r1.c[(std::size_t)d1];
    Poly r1m = monicize(Poly::from_coeffs(d, {r1.c.begin(), r1.c.begin() + d1 + 1}), prec);
    auto [q, rem] = divmod_monic(r0, r1m);
    // r0 - (q/lead)*r1 = rem, up to the truncation of r1 above
    Poly qs = Poly::zero(d);
    {
      FieldElement linv = lead.inv(prec);
      qs = linv * q;
    }
    Poly r2 = r0 - qs * r1;
    Poly s2 = s0 - qs * s1;
    Poly t2 = t0 - qs * t1;
    r0 = r1;
    r1 = r2;
    s0 = s1;
    s1 = s2;
    t0 = t1;
    t1 = t2;
  }
}

}  // namespace ulf
