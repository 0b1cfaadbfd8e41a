#pragma once

#include <algorithm>
#include <vector>

#include "ulf/polynomial.hpp"

namespace ulf {

/// One segment of a Newton polygon. `slope` is stored as the valuation of
/// the corresponding roots (the negative of the geometric hull slope), so a
/// contractive spectrum means all slopes > 0.
struct NewtonSegment {
  Rat slope;
  long multiplicity;
};

struct NewtonPolygon {
  std::vector<NewtonSegment> segments;  // slopes strictly increasing

  long degree() const {
    long d = 0;
    for (const auto& s : segments) d += s.multiplicity;
    return d;
  }
  bool single_segment() const { return segments.size() == 1; }
  bool all_positive() const {
    for (const auto& s : segments)
      if (s.slope <= Rat(0)) return false;
    return true;
  }
  std::vector<Rat> distinct_slopes() const {
    std::vector<Rat> out;
    for (const auto& s : segments) out.push_back(s.slope);
    return out;
  }
  /// Slopes with multiplicity, ascending.
  std::vector<Rat> slope_multiset() const {
    std::vector<Rat> out;
    for (const auto& s : segments)
      for (long i = 0; i < s.multiplicity; ++i) out.push_back(s.slope);
    return out;
  }
};

/// Lower convex hull of the points (i, v(c_i)) of a monic polynomial.
/// Coefficients that vanish at their precision must have enough precision to
/// be certified above the hull, otherwise PrecisionExhausted.
inline NewtonPolygon newton_polygon(const Poly& f) {
  if (!f.is_monic()) throw Error(ErrorClass::precondition, "newton_polygon requires a monic polynomial");
  long d = f.degree();
  if (d < 1) return NewtonPolygon{};
  if (f.c[0].is_zero()) throw SingularInput("zero constant term (0 is a root)");
  if (f.c[0].is_zero_class())
    throw PrecisionExhausted("constant term indistinguishable from zero");

  struct Pt {
    long x;
    long y;
  };
  std::vector<Pt> pts;
  std::vector<std::pair<long, long>> uncertain;  // (x, lower bound on y)
  for (long i = 0; i <= d; ++i) {
    const FieldElement& c = f.c[(std::size_t)i];
    if (c.is_zero()) continue;
    if (c.is_zero_class()) {
      uncertain.emplace_back(i, c.precision());
      continue;
    }
    pts.push_back({i, *c.valuation()});
  }
  // monotone chain, lower hull (points already sorted by x, distinct)
  std::vector<Pt> hull;
  for (const auto& p : pts) {
    while (hull.size() >= 2) {
      const Pt& a = hull[hull.size() - 2];
      const Pt& b = hull[hull.size() - 1];
      // keep if turn at b is strictly convex downward: (b-a) x (p-a) < 0 keeps b
      __int128 cross = (__int128)(b.x - a.x) * (p.y - a.y) - (__int128)(b.y - a.y) * (p.x - a.x);
      if (cross <= 0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(p);
  }
  // certify uncertain points lie on or above the hull
  auto hull_value = [&](long x) -> Rat {
    for (std::size_t i = 0; i + 1 < hull.size(); ++i)
      if (hull[i].x <= x && x <= hull[i + 1].x) {
        Rat t(x - hull[i].x, hull[i + 1].x - hull[i].x);
        return Rat(hull[i].y) + t * Rat(hull[i + 1].y - hull[i].y);
      }
    return Rat(hull.back().y);
  };
  for (auto& [x, bound] : uncertain)
    if (Rat(bound) < hull_value(x))
      throw PrecisionExhausted("hull vertex undecidable: coefficient of t^" + std::to_string(x) +
                               " only known modulo uniformizer^" + std::to_string(bound));

  NewtonPolygon np;
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
    Rat geom(hull[i + 1].y - hull[i].y, hull[i + 1].x - hull[i].x);
    np.segments.push_back({-geom, hull[i + 1].x - hull[i].x});
  }
  std::reverse(np.segments.begin(), np.segments.end());  // ascending root valuation
  return np;
}

struct SlopeFactor {
  Rat slope;
  Poly factor;  // monic, single-segment polygon of the given slope
};

namespace detail {

/// Reduce a polynomial's coefficients to absolute precision `prec` to keep
/// digit growth bounded during lifting.
inline Poly truncate_coeffs(const Poly& f, long prec) {
  std::vector<FieldElement> c;
  c.reserve(f.c.size());
  for (const auto& x : f.c) c.push_back(x.exact() || x.precision() > prec ? x.truncated(prec) : x);
  return Poly::from_coeffs(f.desc, std::move(c));
}

/// Minimal valuation over the coefficients that certainly carry digits;
/// kExactPrec when all of them vanish at their precision.
inline long min_nonzero_valuation(const Poly& f) {
  long m = kExactPrec;
  for (const auto& x : f.c)
    if (!x.is_zero_class()) m = std::min(m, *x.valuation());
  return m;
}

/// Split a monic f at the first polygon vertex: G carries the k roots of the
/// largest valuation, H the rest. Two-factor Hensel lifting in Newton form:
/// the left factor is corrected by dG = (f mod G) * H^{-1} mod G, with all
/// divisions by the monic G (whose weighted Gauss norm is dominated by its
/// top term, so division never loses weighted precision). T maintains
/// H^{-1} mod G and is refreshed by a Newton inverse update, which keeps the
/// convergence quadratic.
inline std::pair<Poly, Poly> split_at_vertex(const Poly& f, long k, long target, long slack) {
  const FieldDescriptor& d = f.desc;
  long work = target + slack;
  bool exact_input = true;
  for (const auto& c : f.c) exact_input = exact_input && c.exact();

  std::vector<FieldElement> g0((std::size_t)k + 1, FieldElement::zero(d));
  g0[(std::size_t)k] = FieldElement::one(d);
  for (long i = 0; i < k; ++i)
    g0[(std::size_t)i] = FieldElement::div(f.c[(std::size_t)i], f.c[(std::size_t)k], work);
  Poly G = Poly::from_coeffs(d, std::move(g0));
  std::vector<FieldElement> h0(f.c.begin() + k, f.c.end());
  Poly H = Poly::from_coeffs(d, std::move(h0));

  Poly T = bezout_coprime(G, H, work).second;  // T*H = 1 (mod G)
  T = divmod_monic(T, G).second;

  bool done = false;
  long progress = std::numeric_limits<long>::min();
  for (int iter = 0; iter < 40 && !done; ++iter) {
    Poly R = divmod_monic(f, G).second;
    done = true;
    for (const auto& c : R.c)
      if (!c.is_zero_class()) {
        done = false;
        break;
      }
    if (done) break;
    long quality = min_nonzero_valuation(R);
    if (quality <= progress)
      throw PrecisionExhausted("slope factor lifting stalled (factors not separable at precision)");
    progress = quality;

    Poly dG = divmod_monic(T * R, G).second;
    G = detail::truncate_coeffs(G + dG, work);
    // restore the exact monic leading coefficient lost to truncation
    G.c.resize((std::size_t)k + 1, FieldElement::zero(d));
    G.c[(std::size_t)k] = FieldElement::one(d);
    H = divmod_monic(f, G).first;
    // Newton update of the modular inverse: T <- T*(2 - H*T) mod G
    Poly two = Poly::from_coeffs(d, {FieldElement::from_integer(d, 2)});
    T = divmod_monic(T * (two - H * T), G).second;
    T = detail::truncate_coeffs(T, work);
  }
  if (!done) throw PrecisionExhausted("slope factor lifting did not converge in 40 iterations");
  H = divmod_monic(f, G).first;
  if (exact_input) {
    // exact inputs must reconstruct to the full target precision
    Poly R = divmod_monic(f, G).second;
    for (const auto& c : R.c)
      if (!c.is_zero() && c.precision() < target)
        throw PrecisionExhausted("converged remainder falls short of the target precision");
  }
  return {G, H};
}

}  // namespace detail

/// Factor a monic polynomial into monic factors of pure Newton slope,
/// ascending by slope. The product reconstructs f coefficientwise to the
/// target precision; rational slopes are never split below segment level.
inline std::vector<SlopeFactor> slope_factor(const Poly& f, long target_precision = kDefaultPrecision) {
  if (!f.is_monic()) throw Error(ErrorClass::precondition, "slope_factor requires a monic polynomial");
  if (f.degree() >= 1 && f.c[0].is_zero()) throw SingularInput("zero constant term");
  NewtonPolygon np = newton_polygon(f);
  if (np.single_segment() || f.degree() < 1)
    return {SlopeFactor{np.segments.empty() ? Rat(0) : np.segments[0].slope, f}};
  long k = np.segments.back().multiplicity;
  // working slack scales with the polygon height; Euclid on far-apart slopes
  // cancels that deep. Doubled on precision failures, quadratic convergence
  // makes a handful of retries astronomically safe.
  long height = 0;
  for (const auto& c : f.c)
    if (auto v = c.valuation()) height = std::max(height, std::labs(*v));
  long slack = 16 + 2 * height;
  std::pair<Poly, Poly> split;
  for (int attempt = 0;; ++attempt) {
    try {
      split = detail::split_at_vertex(f, k, target_precision, slack);
      break;
    } catch (const PrecisionExhausted&) {
      if (attempt >= 6) throw;
      slack *= 2;
    }
  }
  auto& [G, H] = split;
  NewtonPolygon gnp = newton_polygon(G);
  if (!gnp.single_segment() || gnp.segments[0].slope != np.segments.back().slope)
    throw PrecisionExhausted("split factor is not slope-pure at precision");
  std::vector<SlopeFactor> rest = slope_factor(H, target_precision);
  rest.push_back(SlopeFactor{gnp.segments[0].slope, G});
  return rest;
}

}  // namespace ulf
