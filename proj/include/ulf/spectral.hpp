#pragma once

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "ulf/matrix.hpp"
#include "ulf/newton.hpp"

namespace ulf {

// ---- characteristic-subspace decomposition -------------------------------

struct CharPiece {
  Rat valuation;           // characteristic valuation w; |.| value is q^-w
  std::vector<Vec> basis;  // canonical kernel basis, A-invariant span
};

struct CharDecomposition {
  std::vector<CharPiece> pieces;  // ascending valuation

  std::size_t dim() const {
    std::size_t d = 0;
    for (const auto& p : pieces) d += p.basis.size();
    return d;
  }
  std::vector<Rat> valuation_multiset() const {
    std::vector<Rat> out;
    for (const auto& p : pieces)
      for (std::size_t i = 0; i < p.basis.size(); ++i) out.push_back(p.valuation);
    return out;
  }
  std::vector<Vec> stacked_basis() const {
    std::vector<Vec> out;
    for (const auto& p : pieces) out.insert(out.end(), p.basis.begin(), p.basis.end());
    return out;
  }
};

struct ContractivityResult {
  bool contractive;
  std::vector<Rat> valuations;  // distinct, ascending
  NewtonPolygon polygon;
};

inline ContractivityResult is_contractive(const Matrix& a, long prec = kDefaultPrecision) {
  (void)prec;
  NewtonPolygon np = newton_polygon(char_poly(a));
  return {np.all_positive(), np.distinct_slopes(), np};
}

/// E = direct sum of E_w over the polygon slopes w; E_w is the kernel of the
/// slope-w factor of the characteristic polynomial evaluated at A.
inline CharDecomposition char_subspaces(const Matrix& a, long prec = kDefaultPrecision) {
  if (a.rows() != a.cols()) throw Error(ErrorClass::precondition, "char_subspaces needs a square matrix");
  Poly cp = char_poly(a);
  if (!cp.c.empty() && cp.c[0].is_zero()) throw SingularInput("matrix is singular (zero determinant)");
  auto factors = slope_factor(cp, prec);
  std::sort(factors.begin(), factors.end(),
            [](const SlopeFactor& x, const SlopeFactor& y) { return x.slope < y.slope; });
  CharDecomposition dec;
  for (const auto& sf : factors) {
    Matrix m = eval_matrix(sf.factor, a);
    CharPiece piece;
    piece.valuation = sf.slope;
    piece.basis = kernel(m, prec);
    if ((long)piece.basis.size() != sf.factor.degree())
      throw PrecisionExhausted("characteristic subspace dimension does not match polygon multiplicity");
    dec.pieces.push_back(std::move(piece));
  }
  // invariance and direct-sum certificates
  for (const auto& p : dec.pieces)
    for (const auto& b : p.basis)
      if (!in_span(p.basis, matvec(a, b), prec))
        throw PrecisionExhausted("characteristic subspace is not invariant at working precision");
  Matrix stacked = Matrix::from_columns(a.descriptor(), dec.stacked_basis());
  if (!invertible(stacked, prec))
    throw PrecisionExhausted("characteristic subspaces do not span at working precision");
  return dec;
}

// ---- lattices over the valuation ring ------------------------------------

namespace detail {

/// Canonical representative of x modulo uniformizer^a (the digits at
/// positions below a).
inline FieldElement rep_mod(const FieldElement& x, long a) {
  const FieldDescriptor& d = x.descriptor();
  auto v = x.valuation();
  if (!v || *v >= a) return FieldElement::zero(d);
  std::vector<std::uint64_t> digits;
  long hi = std::min(a, x.exact() ? a : std::min(a, x.precision()));
  for (long pos = *v; pos < hi; ++pos) digits.push_back(x.digit_at(pos));
  bool exact = x.exact() || x.precision() >= a;
  return FieldElement::from_digits(d, *v, std::move(digits), exact,
                                   exact ? kExactPrec : x.precision());
}

/// Floor division by uniformizer^a: (x - rep_mod(x, a)) / uniformizer^a.
inline FieldElement floor_div_pow(const FieldElement& x, long a) {
  return (x - rep_mod(x, a)).shifted(-a);
}

/// Canonical triangular basis of the lattice generated by the given columns:
/// column r has zeros above row r, pivot uniformizer^{a_r} at row r, and the
/// entries below other pivots reduced modulo the pivot power.
inline Matrix lattice_canonical(const FieldDescriptor& d, std::vector<Vec> cols, long prec,
                                long margin = kMinSigDigits) {
  if (cols.empty()) throw SingularInput("empty lattice generator set");
  const std::size_t e = cols[0].size();
  std::vector<Vec> basis;
  for (std::size_t r = 0; r < e; ++r) {
    std::optional<std::size_t> best;
    LogValue bv = LogValue::infinity();
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (decide_zero(cols[j][r], margin) == ZeroDecision::zero) continue;
      LogValue v = cols[j][r].log_valuation();
      if (!best || v < bv) {
        best = j;
        bv = v;
      }
    }
    if (!best) throw SingularInput("lattice generators do not span the space");
    Vec piv = std::move(cols[*best]);
    cols.erase(cols.begin() + (long)*best);
    long av = *piv[r].valuation();
    FieldElement iu = piv[r].shifted(-av).inv(prec);
    piv = vec_scale(iu, piv);
    piv[r] = FieldElement::uniformizer_pow(d, av);
    for (auto& c2 : cols) {
      if (decide_zero(c2[r], margin) == ZeroDecision::zero) {
        c2[r] = FieldElement::zero(d);
        continue;
      }
      FieldElement fac = c2[r].shifted(-av);
      c2 = vec_sub(c2, vec_scale(fac, piv));
      c2[r] = FieldElement::zero(d);
    }
    basis.push_back(std::move(piv));
  }
  // canonical reduction of entries below foreign pivots
  for (std::size_t i = 0; i < e; ++i)
    for (std::size_t j = i + 1; j < e; ++j) {
      long aj = *basis[j][j].valuation();
      FieldElement q = floor_div_pow(basis[i][j], aj);
      if (decide_zero(q, 1) == ZeroDecision::nonzero)
        basis[i] = vec_sub(basis[i], vec_scale(q, basis[j]));
    }
  return Matrix::from_columns(d, basis);
}

inline bool lattice_equal(const Matrix& a, const Matrix& b, long margin = kMinSigDigits) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (!equal_at_precision(a.at(i, j), b.at(i, j), margin)) return false;
  return true;
}

/// Smallest lattice containing O^e stable under C and C^{-1}; terminates
/// because all characteristic valuations of C are zero.
inline Matrix stabilize_lattice(const Matrix& c, long prec, long margin = kMinSigDigits) {
  const FieldDescriptor& d = c.descriptor();
  Matrix ci = inverse(c, prec);
  Matrix l = Matrix::identity(d, c.rows());
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<Vec> cols;
    for (std::size_t j = 0; j < l.cols(); ++j) {
      cols.push_back(l.column(j));
      cols.push_back(matvec(c, l.column(j)));
      cols.push_back(matvec(ci, l.column(j)));
    }
    Matrix l2 = lattice_canonical(d, std::move(cols), prec, margin);
    if (lattice_equal(l, l2, margin)) return l;
    l = std::move(l2);
  }
  throw PrecisionExhausted("lattice stabilization did not terminate");
}

// row echelon over the residue field, for flag splitting
struct FqEchelon {
  const ResidueField& rf;
  std::vector<std::vector<std::uint64_t>> rows;
  std::vector<std::size_t> pivots;

  explicit FqEchelon(const ResidueField& f) : rf(f) {}

  bool try_add(std::vector<std::uint64_t> v) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
      std::uint64_t c = v[pivots[k]];
      if (c == 0) continue;
      for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = rf.sub(v[i], rf.mul(c, rows[k][i]));
    }
    std::size_t piv = v.size();
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] != 0) {
        piv = i;
        break;
      }
    if (piv == v.size()) return false;
    std::uint64_t inv = rf.inv(v[piv]);
    for (auto& x : v) x = rf.mul(inv, x);
    rows.push_back(std::move(v));
    pivots.push_back(piv);
    return true;
  }
};

}  // namespace detail

// ---- adapted valuation norms ----------------------------------------------

/// Ultrametric norm in log scale: the norm of sum x_i b_i is
/// min_i (v(x_i) + shift_i). Basis columns are canonicalized so shifts lie
/// in [0,1) and each leading coordinate is a power of the uniformizer.
struct ValuationNorm {
  Matrix basis;      // columns b_i
  Matrix basis_inv;  // cached at construction precision
  std::vector<Rat> shifts;

  LogValue value(const Vec& v) const {
    Vec coords = matvec(basis_inv, v);
    LogValue out = LogValue::infinity();
    for (std::size_t i = 0; i < coords.size(); ++i)
      out = min(out, coords[i].log_valuation() + LogValue(shifts[i]));
    return out;
  }
};

namespace detail {

struct NormPart {
  Vec vector;  // ambient coordinates
  Rat shift;
  Rat slope;
};

/// Splitting basis for the chain of lattices Lambda_{j/m}; returns piece
/// coordinate vectors with shifts j/m. The chain gauge transforms by exactly
/// s/m under the piece operator because B Lambda_t = Lambda_{t+s/m} by
/// construction.
inline std::vector<std::pair<Vec, Rat>> chain_splitting(const FieldDescriptor& d, const Matrix& bp,
                                                        const Matrix& l, long s, long m,
                                                        long prec) {
  const std::size_t e = l.rows();
  std::vector<Matrix> pow(1, Matrix::identity(d, e));
  for (long j = 1; j < m; ++j) pow.push_back(pow.back() * bp);
  std::vector<Matrix> lambda;
  for (long j = 0; j < m; ++j) {
    std::vector<Vec> cols;
    for (long jp = 0; jp < m; ++jp) {
      long shift = ceil_rat(Rat(j - jp * s, m));
      Matrix scaled = FieldElement::uniformizer_pow(d, shift) * (pow[(std::size_t)jp] * l);
      for (std::size_t cidx = 0; cidx < e; ++cidx) cols.push_back(scaled.column(cidx));
    }
    lambda.push_back(lattice_canonical(d, std::move(cols), prec));
  }
  Matrix l0inv = inverse(lambda[0], prec);
  const auto& rf = ResidueField::get(d.p, d.f);
  FqEchelon ech(rf);
  std::vector<std::pair<Vec, Rat>> out;
  for (long j = m - 1; j >= 0; --j) {
    Matrix mj = l0inv * lambda[(std::size_t)j];
    for (std::size_t cidx = 0; cidx < e; ++cidx) {
      std::vector<std::uint64_t> res(e);
      for (std::size_t i = 0; i < e; ++i) res[i] = mj.at(i, cidx).digit_at(0);
      if (ech.try_add(std::move(res)))
        out.emplace_back(lambda[(std::size_t)j].column(cidx), Rat(j, m));
    }
  }
  if (out.size() != e) throw PrecisionExhausted("chain splitting failed to produce a basis");
  return out;
}

}  // namespace detail

/// An ultrametric norm with w(A v) = w(v) + slope exactly on each
/// characteristic subspace. Per piece: clear the slope denominator via A^m,
/// stabilize the bidirectional orbit lattice of the unit-spectrum operator,
/// then distribute shifts 1/m over the chain of intermediate lattices.
inline ValuationNorm adapted_norm(const Matrix& a, long prec = kDefaultPrecision) {
  const FieldDescriptor& d = a.descriptor();
  CharDecomposition dec = char_subspaces(a, prec);
  std::vector<detail::NormPart> parts;
  for (const auto& piece : dec.pieces) {
    Matrix p = Matrix::from_columns(d, piece.basis);
    const std::size_t e = piece.basis.size();
    Matrix ap = a * p;
    auto bp_opt = solve(p, ap, prec);
    if (!bp_opt) throw PrecisionExhausted("piece operator not expressible in piece basis");
    Matrix bp = *bp_opt;
    Rat u = piece.valuation;
    if (u < Rat(0)) {
      bp = inverse(bp, prec);
      u = -u;
    }
    long s = u.numerator(), m = u.denominator();
    Matrix c = bp;
    if (m > 1 || s != 0) {
      Matrix bm = Matrix::identity(d, e);
      for (long i = 0; i < m; ++i) bm = bm * bp;
      c = FieldElement::uniformizer_pow(d, -s) * bm;
    }
    Matrix l = detail::stabilize_lattice(c, prec);
    if (m == 1) {
      for (std::size_t j = 0; j < e; ++j)
        parts.push_back({matvec(p, l.column(j)), Rat(0), piece.valuation});
    } else {
      for (auto& [vec, shift] : detail::chain_splitting(d, bp, l, s, m, prec))
        parts.push_back({matvec(p, vec), shift, piece.valuation});
    }
  }
  // canonicalize: leading coordinate (first of minimal valuation) scaled to a
  // uniformizer power, shift normalized into [0,1)
  for (auto& part : parts) {
    std::size_t lead = 0;
    LogValue bv = LogValue::infinity();
    for (std::size_t i = 0; i < part.vector.size(); ++i) {
      LogValue v = part.vector[i].log_valuation();
      if (v < bv) {
        bv = v;
        lead = i;
      }
    }
    if (bv.is_infinite()) throw PrecisionExhausted("zero vector in norm basis");
    FieldElement lc = part.vector[lead];
    long lv = *lc.valuation();
    part.vector = vec_scale(lc.inv(prec), part.vector);
    part.vector[lead] = FieldElement::one(d);
    Rat c = part.shift - Rat(lv);
    long t = floor_rat(c);
    c = c - Rat(t);
    if (t != 0) {
      FieldElement scale = FieldElement::uniformizer_pow(d, -t);
      part.vector = vec_scale(scale, part.vector);
    }
    part.shift = c;
  }
  std::stable_sort(parts.begin(), parts.end(), [](const detail::NormPart& x, const detail::NormPart& y) {
    if (x.slope != y.slope) return x.slope < y.slope;
    return x.shift < y.shift;
  });
  ValuationNorm n;
  std::vector<Vec> cols;
  for (auto& part : parts) {
    cols.push_back(part.vector);
    n.shifts.push_back(part.shift);
  }
  n.basis = Matrix::from_columns(d, cols);
  n.basis_inv = inverse(n.basis, prec);
  return n;
}

/// Log-scale operator bounds (theta_log, Theta_log) of A in the given norm:
/// Theta_log is the log operator norm of A (minimal norm gain), theta_log
/// the negative of the same for A^{-1}. For adapted norms these are the
/// extreme characteristic valuations.
inline std::pair<Rat, Rat> operator_bounds(const Matrix& a, const ValuationNorm& n,
                                           long prec = kDefaultPrecision) {
  Matrix ai = inverse(a, prec);
  std::optional<Rat> big, small_inv;
  for (std::size_t j = 0; j < n.basis.cols(); ++j) {
    Vec b = n.basis.column(j);
    LogValue wa = n.value(matvec(a, b));
    LogValue wi = n.value(matvec(ai, b));
    if (wa.is_infinite() || wi.is_infinite()) throw NotInvertible("norm degenerates on a basis image");
    Rat gain_a = wa.value() - n.shifts[j];
    Rat gain_i = wi.value() - n.shifts[j];
    if (!big || gain_a < *big) big = gain_a;
    if (!small_inv || gain_i < *small_inv) small_inv = gain_i;
  }
  if (!big) throw NotInvertible("empty norm basis");
  return {-*small_inv, *big};  // (theta_log, Theta_log)
}

}  // namespace ulf
