#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ulf/errors.hpp"
#include "ulf/rational.hpp"

namespace ulf {

inline constexpr long kDefaultPrecision = 64;
inline constexpr long kMinSigDigits = 8;
inline constexpr long kExactPrec = std::numeric_limits<long>::max();

enum class FieldKind { padic, laurent };

inline bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

/// Which local field we are in: Q_p (kind padic, f = 1) or F_{p^f}((X)).
/// The generator of |K^x| in log-scale convention is a = q = p^f.
struct FieldDescriptor {
  FieldKind kind;
  std::uint64_t p;
  unsigned f = 1;

  std::uint64_t residue_size() const {
    std::uint64_t q = 1;
    for (unsigned i = 0; i < f; ++i) q *= p;
    return q;
  }
  bool operator==(const FieldDescriptor&) const = default;
  std::string uniformizer_symbol() const {
    return kind == FieldKind::laurent ? "X" : std::to_string(p);
  }
  std::string name() const {
    if (kind == FieldKind::padic) return "Q_" + std::to_string(p);
    if (f == 1) return "F_" + std::to_string(p) + "((X))";
    return "F_" + std::to_string(residue_size()) + "((X))";
  }
};

inline void validate(const FieldDescriptor& d) {
  if (!is_prime_u64(d.p) || d.p >= (1u << 20))
    throw ParseError("field characteristic must be a prime < 2^20, got " + std::to_string(d.p));
  if (d.f < 1) throw ParseError("residue extension degree must be >= 1");
  if (d.kind == FieldKind::padic && d.f != 1)
    throw ParseError("p-adic descriptor requires f = 1");
  if (d.kind == FieldKind::laurent) {
    if (d.f > 12) throw ParseError("residue extension degree too large");
    long double q = 1;
    for (unsigned i = 0; i < d.f; ++i) q *= (long double)d.p;
    if (q > (long double)(1u << 20)) throw ParseError("residue field too large (p^f > 2^20)");
  }
}

inline void require_same(const FieldDescriptor& a, const FieldDescriptor& b) {
  if (!(a == b)) throw DescriptorMismatch("operands live in " + a.name() + " and " + b.name());
}

namespace detail {

// ---- polynomials over F_p (plain coefficient vectors), used only to build
// ---- the residue field modulus.

inline void fp_trim(std::vector<std::uint64_t>& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline std::vector<std::uint64_t> fp_mod(std::vector<std::uint64_t> a,
                                         const std::vector<std::uint64_t>& m, std::uint64_t p) {
  fp_trim(a);
  while (a.size() >= m.size()) {
    std::uint64_t c = a.back();
    std::size_t shift = a.size() - m.size();
    for (std::size_t i = 0; i < m.size(); ++i) {
      std::uint64_t sub = (c * m[i]) % p;
      a[shift + i] = (a[shift + i] + p - sub) % p;
    }
    fp_trim(a);
  }
  return a;
}

inline std::uint64_t mod_inverse_u64(std::uint64_t a, std::uint64_t p) {
  // extended Euclid over Z; p prime, 0 < a < p
  long long t = 0, newt = 1, r = (long long)p, newr = (long long)(a % p);
  while (newr != 0) {
    long long q = r / newr;
    std::swap(t, newt);
    newt -= q * t;
    std::swap(r, newr);
    newr -= q * r;
  }
  if (r != 1) throw DivisionByZero("element not invertible modulo " + std::to_string(p));
  return (std::uint64_t)((t % (long long)p + (long long)p) % (long long)p);
}

}  // namespace detail

/// F_{p^f} = F_p[w]/(m(w)), m the monic irreducible of degree f with smallest
/// coefficient tuple (c_{f-1},...,c_0) read as a base-p integer. Elements are
/// packed as sum c_i p^i into one machine word.
class ResidueField {
public:
  std::uint64_t p;
  unsigned f;
  std::vector<std::uint64_t> modulus;  // size f+1, monic; empty when f == 1

  static const ResidueField& get(std::uint64_t p, unsigned f) {
    static std::map<std::pair<std::uint64_t, unsigned>, ResidueField> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(p, f);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    ResidueField rf;
    rf.p = p;
    rf.f = f;
    if (f > 1) rf.modulus = smallest_irreducible(p, f);
    return cache.emplace(key, std::move(rf)).first->second;
  }

  std::uint64_t size() const {
    std::uint64_t q = 1;
    for (unsigned i = 0; i < f; ++i) q *= p;
    return q;
  }

  std::vector<std::uint64_t> decode(std::uint64_t a) const {
    std::vector<std::uint64_t> c(f, 0);
    for (unsigned i = 0; i < f; ++i) {
      c[i] = a % p;
      a /= p;
    }
    return c;
  }
  std::uint64_t encode(const std::vector<std::uint64_t>& c) const {
    std::uint64_t a = 0;
    for (unsigned i = f; i-- > 0;) a = a * p + (c.size() > i ? c[i] % p : 0);
    return a;
  }

  std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
    if (f == 1) return (a + b) % p;
    auto ca = decode(a), cb = decode(b);
    for (unsigned i = 0; i < f; ++i) ca[i] = (ca[i] + cb[i]) % p;
    return encode(ca);
  }
  std::uint64_t neg(std::uint64_t a) const {
    if (f == 1) return a == 0 ? 0 : p - a;
    auto c = decode(a);
    for (auto& x : c) x = x == 0 ? 0 : p - x;
    return encode(c);
  }
  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const { return add(a, neg(b)); }

  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
    if (f == 1) return (a * b) % p;
    auto ca = decode(a), cb = decode(b);
    std::vector<std::uint64_t> prod(2 * f - 1, 0);
    for (unsigned i = 0; i < f; ++i)
      for (unsigned j = 0; j < f; ++j) prod[i + j] = (prod[i + j] + ca[i] * cb[j]) % p;
    prod = detail::fp_mod(std::move(prod), modulus, p);
    prod.resize(f, 0);
    return encode(prod);
  }

  std::uint64_t pow(std::uint64_t a, std::uint64_t e) const {
    std::uint64_t r = 1;
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }

  std::uint64_t inv(std::uint64_t a) const {
    if (a == 0) throw DivisionByZero("inverse of zero residue");
    if (f == 1) return detail::mod_inverse_u64(a, p);
    return pow(a, size() - 2);
  }

  bool in_prime_subfield(std::uint64_t a) const { return a < p; }

private:
  static std::vector<std::uint64_t> smallest_irreducible(std::uint64_t p, unsigned f) {
    std::uint64_t q = 1;
    for (unsigned i = 0; i < f; ++i) q *= p;
    for (std::uint64_t code = 0; code < q; ++code) {
      std::vector<std::uint64_t> m(f + 1, 0);
      std::uint64_t c = code;
      for (unsigned i = 0; i < f; ++i) {
        m[i] = c % p;
        c /= p;
      }
      m[f] = 1;
      if (is_irreducible(m, p, f)) return m;
    }
    throw Error(ErrorClass::precondition, "no irreducible polynomial found");  // unreachable
  }

  static bool is_irreducible(const std::vector<std::uint64_t>& m, std::uint64_t p, unsigned f) {
    if (m[0] == 0) return false;
    for (unsigned d = 1; d <= f / 2; ++d) {
      std::uint64_t qd = 1;
      for (unsigned i = 0; i < d; ++i) qd *= p;
      for (std::uint64_t code = 0; code < qd; ++code) {
        std::vector<std::uint64_t> div(d + 1, 0);
        std::uint64_t c = code;
        for (unsigned i = 0; i < d; ++i) {
          div[i] = c % p;
          c /= p;
        }
        div[d] = 1;
        auto r = detail::fp_mod(m, div, p);
        if (r.empty()) return false;
      }
    }
    return true;
  }
};

namespace detail {

// ---- base-p magnitude helpers for p-adic elements. Little-endian digit
// ---- vectors, no high-end zero padding.

using Mag = std::vector<std::uint64_t>;

inline void mag_trim(Mag& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline int mag_cmp(const Mag& a, const Mag& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (std::size_t i = a.size(); i-- > 0;)
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  return 0;
}

inline Mag mag_add(const Mag& a, const Mag& b, std::uint64_t p) {
  Mag r(std::max(a.size(), b.size()) + 1, 0);
  std::uint64_t carry = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    std::uint64_t s = carry;
    if (i < a.size()) s += a[i];
    if (i < b.size()) s += b[i];
    r[i] = s % p;
    carry = s / p;
  }
  mag_trim(r);
  return r;
}

// requires a >= b
inline Mag mag_sub(const Mag& a, const Mag& b, std::uint64_t p) {
  Mag r(a.size(), 0);
  std::int64_t borrow = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::int64_t s = (std::int64_t)a[i] - borrow - (i < b.size() ? (std::int64_t)b[i] : 0);
    if (s < 0) {
      s += (std::int64_t)p;
      borrow = 1;
    } else {
      borrow = 0;
    }
    r[i] = (std::uint64_t)s;
  }
  mag_trim(r);
  return r;
}

inline Mag mag_mul(const Mag& a, const Mag& b, std::uint64_t p, std::size_t cap = SIZE_MAX) {
  if (a.empty() || b.empty()) return {};
  std::size_t n = std::min(a.size() + b.size(), cap);
  std::vector<unsigned __int128> acc(n, 0);
  for (std::size_t i = 0; i < a.size() && i < n; ++i)
    for (std::size_t j = 0; j < b.size() && i + j < n; ++j)
      acc[i + j] += (unsigned __int128)a[i] * b[j];
  Mag r(n, 0);
  unsigned __int128 carry = 0;
  for (std::size_t k = 0; k < n; ++k) {
    unsigned __int128 s = acc[k] + carry;
    r[k] = (std::uint64_t)(s % p);
    carry = s / p;
  }
  // remaining carry only matters below the cap; when capped we drop it
  while (carry && r.size() < cap) {
    r.push_back((std::uint64_t)(carry % p));
    carry /= p;
  }
  mag_trim(r);
  return r;
}

inline mpz_class mag_to_mpz(const Mag& a, std::uint64_t p) {
  mpz_class z = 0;
  for (std::size_t i = a.size(); i-- > 0;) {
    z *= (unsigned long)p;
    z += (unsigned long)a[i];
  }
  return z;
}

inline Mag mpz_to_mag(mpz_class z, std::uint64_t p) {
  Mag r;
  while (z > 0) {
    mpz_class q, rem;
    mpz_fdiv_qr_ui(q.get_mpz_t(), rem.get_mpz_t(), z.get_mpz_t(), (unsigned long)p);
    r.push_back((std::uint64_t)rem.get_ui());
    z = q;
  }
  return r;
}

}  // namespace detail

/// An element of Q_p or F_{p^f}((X)) with tracked absolute precision.
///
/// Exact elements are finite expansions known at all positions; over Q_p a
/// sign bit keeps +,-,* closed on exact values (|m| p^v with sign). Inexact
/// elements are known modulo uniformizer^precision; over Q_p they are stored
/// as the canonical representative in [0, p^precision).
class FieldElement {
public:
  FieldElement() = default;

  // ---- factories

  static FieldElement zero(const FieldDescriptor& d) {
    FieldElement e;
    e.desc_ = d;
    e.exact_ = true;
    return e;
  }

  static FieldElement one(const FieldDescriptor& d) { return from_integer(d, 1); }

  static FieldElement uniformizer_pow(const FieldDescriptor& d, long k) {
    FieldElement e;
    e.desc_ = d;
    e.exact_ = true;
    e.lead_ = k;
    e.digits_ = {1};
    return e;
  }

  static FieldElement from_integer(const FieldDescriptor& d, long long n) {
    if (n == 0) return zero(d);
    FieldElement e;
    e.desc_ = d;
    e.exact_ = true;
    if (d.kind == FieldKind::padic) {
      e.negative_ = n < 0;
      unsigned long long m = n < 0 ? (unsigned long long)(-(n + 1)) + 1 : (unsigned long long)n;
      while (m) {
        e.digits_.push_back(m % d.p);
        m /= d.p;
      }
      e.lead_ = 0;
    } else {
      long long c = n % (long long)d.p;
      if (c < 0) c += (long long)d.p;
      if (c == 0) return zero(d);
      e.digits_ = {(std::uint64_t)c};
      e.lead_ = 0;
    }
    return e.normalized(kExactPrec);
  }

  /// Construct from digits d_i at positions lead+i. For exact p-adic values
  /// `negative` flags -(sum d_i p^(lead+i)).
  static FieldElement from_digits(const FieldDescriptor& d, long lead,
                                  std::vector<std::uint64_t> digits, bool exact,
                                  long prec = kExactPrec, bool negative = false) {
    FieldElement e;
    e.desc_ = d;
    e.exact_ = exact;
    e.negative_ = negative && d.kind == FieldKind::padic && exact;
    e.lead_ = lead;
    e.digits_ = std::move(digits);
    e.prec_ = exact ? kExactPrec : prec;
    return e.normalized(0);
  }

  static FieldElement from_rational(const FieldDescriptor& d, long long num, long long den,
                                    long prec = kDefaultPrecision);

  // ---- accessors

  const FieldDescriptor& descriptor() const { return desc_; }
  bool exact() const { return exact_; }
  long precision() const { return prec_; }
  bool is_zero() const { return exact_ && digits_.empty(); }
  bool is_zero_class() const { return digits_.empty(); }

  /// nullopt for the zero element and the zero-at-precision class.
  std::optional<long> valuation() const {
    if (digits_.empty()) return std::nullopt;
    return lead_;
  }

  LogValue log_valuation() const {
    if (digits_.empty()) return LogValue::infinity();
    return LogValue((long long)lead_);
  }

  long significant_digits() const {
    if (exact_ || digits_.empty()) return kExactPrec;
    return prec_ - lead_;
  }

  /// One past the last stored nonzero digit position (lead_ when empty).
  long support_end() const { return digits_.empty() ? 0 : lead_ + (long)digits_.size(); }

  /// Claimed digit at a position (0 outside the stored support). For exact
  /// negative p-adic values this is the digit of the canonical complement
  /// expansion, which continues with p-1 above the stored magnitude.
  std::uint64_t digit_at(long pos) const {
    if (digits_.empty()) return 0;
    if (desc_.kind == FieldKind::padic && negative_) {
      if (pos < lead_) return 0;
      std::size_t i = (std::size_t)(pos - lead_);
      if (i == 0) return desc_.p - digits_[0];
      if (i < digits_.size()) return desc_.p - 1 - digits_[i];
      return desc_.p - 1;
    }
    if (pos < lead_ || pos >= lead_ + (long)digits_.size()) return 0;
    return digits_[(std::size_t)(pos - lead_)];
  }

  // ---- arithmetic

  FieldElement neg() const {
    FieldElement r = *this;
    if (digits_.empty()) return r;
    if (desc_.kind == FieldKind::laurent) {
      const auto& rf = ResidueField::get(desc_.p, desc_.f);
      for (auto& x : r.digits_) x = rf.neg(x);
    } else if (exact_) {
      r.negative_ = !negative_;
    } else {
      // complement of the representative mod p^prec
      long len = prec_ - lead_;
      r.digits_.assign((std::size_t)len, 0);
      r.digits_[0] = desc_.p - digits_[0];
      for (long i = 1; i < len; ++i)
        r.digits_[(std::size_t)i] =
            desc_.p - 1 - ((std::size_t)i < digits_.size() ? digits_[(std::size_t)i] : 0);
    }
    return r.normalized(significant_digits());
  }

  friend FieldElement operator+(const FieldElement& x, const FieldElement& y) { return add(x, y); }
  friend FieldElement operator-(const FieldElement& x, const FieldElement& y) {
    return add(x, y.neg());
  }
  friend FieldElement operator*(const FieldElement& x, const FieldElement& y) { return mul(x, y); }

  static FieldElement add(const FieldElement& x, const FieldElement& y);
  static FieldElement mul(const FieldElement& x, const FieldElement& y);
  static FieldElement div(const FieldElement& x, const FieldElement& y,
                          long prec = kDefaultPrecision);

  FieldElement inv(long prec = kDefaultPrecision) const {
    return div(one(desc_), *this, prec);
  }

  /// Multiply by uniformizer^k (exact reindexing).
  FieldElement shifted(long k) const {
    FieldElement r = *this;
    r.lead_ += k;
    if (!exact_) r.prec_ += k;
    return r;
  }

  FieldElement pow(std::uint64_t e) const {
    if (e == 0) return one(desc_);
    if (desc_.kind == FieldKind::laurent && e == desc_.p) return frobenius();
    FieldElement base = *this;
    FieldElement r = one(desc_);
    while (e) {
      if (e & 1) r = mul(r, base);
      e >>= 1;
      if (e) base = mul(base, base);
    }
    return r;
  }

  /// p-th power in characteristic p: digitwise Frobenius, positions scaled
  /// by p. Gains precision (knowledge up to p*prec).
  FieldElement frobenius() const {
    if (desc_.kind != FieldKind::laurent)
      throw Error(ErrorClass::precondition, "frobenius only defined in characteristic p");
    if (digits_.empty()) {
      FieldElement r = *this;
      if (!exact_) r.prec_ = prec_ * (long)desc_.p;
      return r;
    }
    const auto& rf = ResidueField::get(desc_.p, desc_.f);
    FieldElement r;
    r.desc_ = desc_;
    r.exact_ = exact_;
    r.lead_ = lead_ * (long)desc_.p;
    r.digits_.assign(digits_.size() * desc_.p - desc_.p + 1, 0);
    for (std::size_t i = 0; i < digits_.size(); ++i)
      r.digits_[i * desc_.p] = rf.pow(digits_[i], desc_.p);
    r.prec_ = exact_ ? kExactPrec : prec_ * (long)desc_.p;
    return r.normalized(significant_digits());
  }

  /// Forget digits at positions >= prec; result is inexact.
  FieldElement truncated(long prec) const {
    FieldElement r = *this;
    r.exact_ = false;
    r.prec_ = exact_ ? prec : std::min(prec_, prec);
    if (desc_.kind == FieldKind::padic && negative_ && !digits_.empty()) {
      // store the canonical representative
      long len = r.prec_ - lead_;
      if (len <= 0) return zero_class(desc_, r.prec_);
      std::vector<std::uint64_t> rep((std::size_t)len, 0);
      for (long i = 0; i < len; ++i) rep[(std::size_t)i] = digit_at(lead_ + i);
      r.digits_ = std::move(rep);
      r.negative_ = false;
      r.lead_ = lead_;
    }
    return r.normalized(0);
  }

  static FieldElement zero_class(const FieldDescriptor& d, long prec) {
    FieldElement e;
    e.desc_ = d;
    e.exact_ = false;
    e.prec_ = prec;
    return e;
  }

  // ---- strings

  static FieldElement parse(const FieldDescriptor& d, const std::string& s,
                            long prec = kDefaultPrecision);
  std::string to_string() const;

  bool identical(const FieldElement& o) const {
    return desc_ == o.desc_ && exact_ == o.exact_ && negative_ == o.negative_ &&
           digits_ == o.digits_ && (digits_.empty() || lead_ == o.lead_) &&
           (exact_ || prec_ == o.prec_);
  }

private:
  FieldDescriptor desc_{FieldKind::padic, 2, 1};
  bool exact_ = true;
  bool negative_ = false;  // p-adic exact values only
  long lead_ = 0;
  std::vector<std::uint64_t> digits_;
  long prec_ = kExactPrec;

  /// Strip zeros, drop digits beyond precision, enforce the significance
  /// rule: an operation may not fall below kMinSigDigits significant digits
  /// unless an input was already that narrow.
  FieldElement normalized(long input_min_sig) const {
    FieldElement r = *this;
    if (!r.exact_) {
      // drop digits at positions >= prec
      long maxlen = r.prec_ - r.lead_;
      if (maxlen <= 0)
        r.digits_.clear();
      else if ((long)r.digits_.size() > maxlen)
        r.digits_.resize((std::size_t)maxlen);
    }
    std::size_t lo = 0;
    while (lo < r.digits_.size() && r.digits_[lo] == 0) ++lo;
    if (lo) {
      r.digits_.erase(r.digits_.begin(), r.digits_.begin() + (long)lo);
      r.lead_ += (long)lo;
    }
    while (!r.digits_.empty() && r.digits_.back() == 0) r.digits_.pop_back();
    if (r.digits_.empty()) {
      r.lead_ = 0;
      r.negative_ = false;
      if (r.exact_) r.prec_ = kExactPrec;
      return r;
    }
    if (r.exact_) {
      r.prec_ = kExactPrec;
    } else {
      r.negative_ = false;
      long sig = r.prec_ - r.lead_;
      if (sig < kMinSigDigits && input_min_sig >= kMinSigDigits)
        throw PrecisionExhausted("result has only " + std::to_string(sig) +
                                 " significant digits");
    }
    if (r.desc_.kind == FieldKind::padic && !r.exact_) r.negative_ = false;
    return r;
  }

  long eff_prec() const { return exact_ ? kExactPrec : prec_; }

  /// Digits of the canonical representative at positions [lo, hi).
  std::vector<std::uint64_t> rep_digits(long lo, long hi) const {
    std::vector<std::uint64_t> out((std::size_t)std::max(0L, hi - lo), 0);
    for (long pos = std::max(lo, digits_.empty() ? hi : lead_); pos < hi; ++pos)
      out[(std::size_t)(pos - lo)] = digit_at(pos);
    return out;
  }

  static FieldElement exact_padic_add(const FieldElement& x, const FieldElement& y);
  static FieldElement laurent_add(const FieldElement& x, const FieldElement& y, bool exact,
                                  long prec, long min_sig);
};

// ---- add

inline FieldElement FieldElement::add(const FieldElement& x, const FieldElement& y) {
  require_same(x.desc_, y.desc_);
  if (x.is_zero()) return y;
  if (y.is_zero()) return x;
  long min_sig = std::min(x.significant_digits(), y.significant_digits());
  if (x.is_zero_class() || y.is_zero_class()) {
    long N = std::min(x.eff_prec(), y.eff_prec());
    const FieldElement& live = x.is_zero_class() ? y : x;
    if (live.is_zero_class()) return zero_class(x.desc_, N);
    return live.truncated(N).normalized(min_sig);
  }
  long N = std::min(x.eff_prec(), y.eff_prec());
  bool exact = x.exact_ && y.exact_;
  if (x.desc_.kind == FieldKind::laurent)
    return laurent_add(x, y, exact, N, min_sig);
  if (exact) return exact_padic_add(x, y);
  long lo = std::min(x.lead_, y.lead_);
  auto rx = x.rep_digits(lo, N), ry = y.rep_digits(lo, N);
  std::uint64_t p = x.desc_.p, carry = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    std::uint64_t s = rx[i] + ry[i] + carry;
    rx[i] = s % p;
    carry = s / p;
  }
  FieldElement r;
  r.desc_ = x.desc_;
  r.exact_ = false;
  r.lead_ = lo;
  r.digits_ = std::move(rx);
  r.prec_ = N;
  return r.normalized(min_sig);
}

inline FieldElement FieldElement::laurent_add(const FieldElement& x, const FieldElement& y,
                                              bool exact, long prec, long min_sig) {
  const auto& rf = ResidueField::get(x.desc_.p, x.desc_.f);
  long lo = std::min(x.lead_, y.lead_);
  long hi = std::max(x.lead_ + (long)x.digits_.size(), y.lead_ + (long)y.digits_.size());
  if (!exact) hi = std::min(hi, prec);
  std::vector<std::uint64_t> d((std::size_t)std::max(0L, hi - lo), 0);
  for (long pos = lo; pos < hi; ++pos)
    d[(std::size_t)(pos - lo)] = rf.add(x.digit_at(pos), y.digit_at(pos));
  FieldElement r;
  r.desc_ = x.desc_;
  r.exact_ = exact;
  r.lead_ = lo;
  r.digits_ = std::move(d);
  r.prec_ = exact ? kExactPrec : prec;
  return r.normalized(min_sig);
}

inline FieldElement FieldElement::exact_padic_add(const FieldElement& x, const FieldElement& y) {
  std::uint64_t p = x.desc_.p;
  long lo = std::min(x.lead_, y.lead_);
  auto shift_mag = [&](const FieldElement& e) {
    detail::Mag m((std::size_t)(e.lead_ - lo), 0);
    m.insert(m.end(), e.digits_.begin(), e.digits_.end());
    return m;
  };
  detail::Mag mx = shift_mag(x), my = shift_mag(y);
  FieldElement r;
  r.desc_ = x.desc_;
  r.exact_ = true;
  r.lead_ = lo;
  if (x.negative_ == y.negative_) {
    r.digits_ = detail::mag_add(mx, my, p);
    r.negative_ = x.negative_;
  } else {
    int c = detail::mag_cmp(mx, my);
    if (c == 0) return zero(x.desc_);
    if (c > 0) {
      r.digits_ = detail::mag_sub(mx, my, p);
      r.negative_ = x.negative_;
    } else {
      r.digits_ = detail::mag_sub(my, mx, p);
      r.negative_ = y.negative_;
    }
  }
  return r.normalized(kExactPrec);
}

// ---- mul

inline FieldElement FieldElement::mul(const FieldElement& x, const FieldElement& y) {
  require_same(x.desc_, y.desc_);
  if (x.is_zero() || y.is_zero()) return zero(x.desc_);
  long min_sig = std::min(x.significant_digits(), y.significant_digits());
  if (x.is_zero_class() || y.is_zero_class()) {
    long px = x.is_zero_class() ? x.prec_ : *x.valuation();
    long py = y.is_zero_class() ? y.prec_ : *y.valuation();
    return zero_class(x.desc_, px + py);
  }
  bool exact = x.exact_ && y.exact_;
  long N = kExactPrec;
  if (!exact) {
    N = std::numeric_limits<long>::max();
    if (y.eff_prec() != kExactPrec) N = std::min(N, x.lead_ + y.prec_);
    if (x.eff_prec() != kExactPrec) N = std::min(N, y.lead_ + x.prec_);
  }
  FieldElement r;
  r.desc_ = x.desc_;
  r.exact_ = exact;
  r.lead_ = x.lead_ + y.lead_;
  r.prec_ = N;
  if (x.desc_.kind == FieldKind::laurent) {
    const auto& rf = ResidueField::get(x.desc_.p, x.desc_.f);
    std::size_t len = x.digits_.size() + y.digits_.size() - 1;
    if (!exact) len = std::min<std::size_t>(len, (std::size_t)std::max(0L, N - r.lead_));
    std::vector<std::uint64_t> d(len, 0);
    for (std::size_t i = 0; i < x.digits_.size(); ++i) {
      if (x.digits_[i] == 0) continue;
      for (std::size_t j = 0; j < y.digits_.size() && i + j < len; ++j)
        d[i + j] = rf.add(d[i + j], rf.mul(x.digits_[i], y.digits_[j]));
    }
    r.digits_ = std::move(d);
  } else if (exact) {
    r.digits_ = detail::mag_mul(x.digits_, y.digits_, x.desc_.p);
    r.negative_ = x.negative_ != y.negative_;
  } else {
    auto rx = x.exact_ ? x.truncated(N - y.lead_) : x;
    auto ry = y.exact_ ? y.truncated(N - x.lead_) : y;
    if (rx.is_zero_class() || ry.is_zero_class()) return zero_class(x.desc_, N);
    r.lead_ = rx.lead_ + ry.lead_;
    r.digits_ =
        detail::mag_mul(rx.digits_, ry.digits_, x.desc_.p, (std::size_t)std::max(0L, N - r.lead_));
  }
  return r.normalized(min_sig);
}

// ---- div

inline FieldElement FieldElement::div(const FieldElement& x, const FieldElement& y, long prec) {
  require_same(x.desc_, y.desc_);
  if (y.is_zero()) throw DivisionByZero("division by zero");
  if (y.is_zero_class())
    throw PrecisionExhausted("divisor is indistinguishable from zero at precision " +
                             std::to_string(y.prec_));
  if (x.is_zero()) return zero(x.desc_);
  if (x.is_zero_class()) return zero_class(x.desc_, x.prec_ - y.lead_);

  std::uint64_t p = x.desc_.p;
  if (x.exact_ && y.exact_) {
    if (x.desc_.kind == FieldKind::laurent) {
      // polynomial long division from the top; exact iff remainder vanishes
      const auto& rf = ResidueField::get(p, x.desc_.f);
      if (y.digits_.size() <= x.digits_.size()) {
        std::vector<std::uint64_t> rem = x.digits_;
        std::vector<std::uint64_t> q(x.digits_.size() - y.digits_.size() + 1, 0);
        std::uint64_t ylead_inv = rf.inv(y.digits_.back());
        for (std::size_t k = q.size(); k-- > 0;) {
          std::uint64_t c = rf.mul(rem[k + y.digits_.size() - 1], ylead_inv);
          q[k] = c;
          if (c)
            for (std::size_t i = 0; i < y.digits_.size(); ++i)
              rem[k + i] = rf.sub(rem[k + i], rf.mul(c, y.digits_[i]));
        }
        if (std::all_of(rem.begin(), rem.end(), [](std::uint64_t v) { return v == 0; })) {
          FieldElement r;
          r.desc_ = x.desc_;
          r.exact_ = true;
          r.lead_ = x.lead_ - y.lead_;
          r.digits_ = std::move(q);
          return r.normalized(kExactPrec);
        }
      }
    } else {
      mpz_class mx = detail::mag_to_mpz(x.digits_, p), my = detail::mag_to_mpz(y.digits_, p);
      mpz_class q, rem;
      mpz_fdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), mx.get_mpz_t(), my.get_mpz_t());
      if (rem == 0) {
        FieldElement r;
        r.desc_ = x.desc_;
        r.exact_ = true;
        r.lead_ = x.lead_ - y.lead_;
        r.digits_ = detail::mpz_to_mag(q, p);
        r.negative_ = x.negative_ != y.negative_;
        return r.normalized(kExactPrec);
      }
    }
  }

  // digit recurrence at min(significances, prec) significant digits
  long sig = std::min({x.significant_digits(), y.significant_digits(), prec});
  long min_sig = std::min(x.significant_digits(), y.significant_digits());
  long vq = x.lead_ - y.lead_;
  std::vector<std::uint64_t> rx = x.rep_digits(x.lead_, x.lead_ + sig);
  std::vector<std::uint64_t> ry = y.rep_digits(y.lead_, y.lead_ + sig);
  std::vector<std::uint64_t> d((std::size_t)sig, 0);
  if (x.desc_.kind == FieldKind::laurent) {
    const auto& rf = ResidueField::get(p, x.desc_.f);
    std::uint64_t inv0 = rf.inv(ry[0]);
    for (long k = 0; k < sig; ++k) {
      std::uint64_t c = rf.mul(rx[(std::size_t)k], inv0);
      d[(std::size_t)k] = c;
      if (c)
        for (long i = 0; k + i < sig; ++i)
          rx[(std::size_t)(k + i)] = rf.sub(rx[(std::size_t)(k + i)], rf.mul(c, ry[(std::size_t)i]));
    }
  } else {
    std::uint64_t inv0 = detail::mod_inverse_u64(ry[0], p);
    for (long k = 0; k < sig; ++k) {
      std::uint64_t c = (rx[(std::size_t)k] * inv0) % p;
      d[(std::size_t)k] = c;
      if (c) {
        std::int64_t borrow = 0;
        for (long i = 0; k + i < sig; ++i) {
          unsigned __int128 sub = (unsigned __int128)c * ry[(std::size_t)i] + (std::uint64_t)borrow;
          std::uint64_t sub_lo = (std::uint64_t)(sub % p);
          borrow = (std::int64_t)(sub / p);
          if (rx[(std::size_t)(k + i)] >= sub_lo) {
            rx[(std::size_t)(k + i)] -= sub_lo;
          } else {
            rx[(std::size_t)(k + i)] += p - sub_lo;
            ++borrow;
          }
        }
      }
    }
  }
  FieldElement r;
  r.desc_ = x.desc_;
  r.exact_ = false;
  r.lead_ = vq;
  r.digits_ = std::move(d);
  r.prec_ = vq + sig;
  return r.normalized(min_sig);
}

// ---- rationals

inline FieldElement FieldElement::from_rational(const FieldDescriptor& d, long long num,
                                                long long den, long prec) {
  if (den == 0) throw DivisionByZero("rational with zero denominator");
  if (num == 0) return zero(d);
  if (d.kind == FieldKind::laurent) {
    FieldElement n = from_integer(d, num);
    FieldElement m = from_integer(d, den);
    if (m.is_zero())
      throw ParseError("denominator " + std::to_string(den) + " is zero in characteristic " +
                       std::to_string(d.p));
    return div(n, m, prec);  // residue constants divide exactly
  }
  long v = 0;
  while (num % (long long)d.p == 0) {
    num /= (long long)d.p;
    ++v;
  }
  while (den % (long long)d.p == 0) {
    den /= (long long)d.p;
    --v;
  }
  FieldElement q = std::llabs(den) == 1 ? from_integer(d, num * (den < 0 ? -1 : 1))
                                        : div(from_integer(d, num), from_integer(d, den), prec);
  return q.shifted(v);
}

// ---- zero decisions with the margin rule

enum class ZeroDecision { zero, nonzero };

/// Decide whether an element is zero at its available precision. A nonzero
/// leading digit within `margin` digits of the precision horizon is not
/// trusted and raises PrecisionExhausted instead of answering.
inline ZeroDecision decide_zero(const FieldElement& e, long margin = kMinSigDigits) {
  if (e.exact()) return e.is_zero() ? ZeroDecision::zero : ZeroDecision::nonzero;
  if (e.is_zero_class()) return ZeroDecision::zero;
  if (e.significant_digits() < margin)
    throw PrecisionExhausted("nonzero digits only " + std::to_string(e.significant_digits()) +
                             " places above the precision horizon");
  return ZeroDecision::nonzero;
}

inline bool equal_at_precision(const FieldElement& a, const FieldElement& b,
                               long margin = kMinSigDigits) {
  return decide_zero(a - b, margin) == ZeroDecision::zero;
}

// ---- parsing / printing ------------------------------------------------

namespace detail {

struct Cursor {
  const std::string& s;
  std::size_t i = 0;
  void skip_ws() {
    while (i < s.size() && std::isspace((unsigned char)s[i])) ++i;
  }
  bool eat(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return i < s.size() ? s[i] : '\0';
  }
  long long integer() {
    skip_ws();
    std::size_t start = i;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
    while (i < s.size() && std::isdigit((unsigned char)s[i])) ++i;
    if (i == start || (i == start + 1 && !std::isdigit((unsigned char)s[start])))
      throw ParseError("expected integer", start);
    try {
      return std::stoll(s.substr(start, i - start));
    } catch (...) {
      throw ParseError("integer out of range", start);
    }
  }
};

// wexpr := wterm (('+'|'-') wterm)*, wterm := n | n*w^k | w^k
inline std::uint64_t parse_wexpr(Cursor& c, const ResidueField& rf) {
  std::uint64_t acc = 0;
  bool first = true;
  while (true) {
    c.skip_ws();
    bool neg = false;
    if (!first) {
      if (c.eat('+')) {
      } else if (c.eat('-')) {
        neg = true;
      } else {
        break;
      }
    } else if (c.eat('-')) {
      neg = true;
    }
    first = false;
    long long coeff = 1;
    bool saw_coeff = false;
    if (std::isdigit((unsigned char)c.peek())) {
      coeff = c.integer();
      saw_coeff = true;
    }
    unsigned wdeg = 0;
    c.skip_ws();
    if (c.peek() == '*' || c.peek() == 'w') {
      if (saw_coeff) c.eat('*');
      if (!c.eat('w')) throw ParseError("expected 'w'", c.i);
      wdeg = 1;
      if (c.eat('^')) {
        long long e = c.integer();
        if (e < 0 || e >= (long long)rf.f) throw ParseError("w exponent out of range", c.i);
        wdeg = (unsigned)e;
      }
    } else if (!saw_coeff) {
      throw ParseError("expected residue coefficient", c.i);
    }
    std::uint64_t cm = (std::uint64_t)(((coeff % (long long)rf.p) + (long long)rf.p) % (long long)rf.p);
    if (neg) cm = rf.neg(cm);
    std::vector<std::uint64_t> mono(rf.f, 0);
    if (wdeg >= rf.f) throw ParseError("w exponent out of range", c.i);
    mono[wdeg] = 1;
    acc = rf.add(acc, rf.mul(cm, rf.encode(mono)));
  }
  return acc;
}

}  // namespace detail

inline FieldElement FieldElement::parse(const FieldDescriptor& d, const std::string& s,
                                        long prec) {
  validate(d);
  detail::Cursor c{s};
  c.skip_ws();
  if (c.i >= s.size()) throw ParseError("empty field element");
  if (d.kind == FieldKind::padic) {
    long long num = c.integer();
    long long den = 1;
    if (c.eat('/')) den = c.integer();
    c.skip_ws();
    if (c.i != s.size()) throw ParseError("trailing characters in p-adic literal", c.i);
    return from_rational(d, num, den, prec);
  }

  const auto& rf = ResidueField::get(d.p, d.f);
  std::map<long, std::uint64_t> coeffs;
  bool first = true;
  while (true) {
    c.skip_ws();
    if (c.i >= s.size()) {
      if (first) throw ParseError("empty field element");
      break;
    }
    bool neg = false;
    if (!first) {
      if (c.eat('+')) {
      } else if (c.eat('-')) {
        neg = true;
      } else {
        throw ParseError("expected '+' between terms", c.i);
      }
    } else if (c.eat('-')) {
      neg = true;
    }
    first = false;

    std::uint64_t coeff = 1;
    bool saw_coeff = false;
    char pk = c.peek();
    if (pk == '(') {
      c.eat('(');
      coeff = detail::parse_wexpr(c, rf);
      if (!c.eat(')')) throw ParseError("expected ')'", c.i);
      saw_coeff = true;
    } else if (std::isdigit((unsigned char)pk)) {
      long long n = c.integer();
      coeff = (std::uint64_t)((n % (long long)d.p + (long long)d.p) % (long long)d.p);
      saw_coeff = true;
    } else if (pk == 'w') {
      if (d.f == 1) throw ParseError("'w' only valid for extension residue fields", c.i);
      coeff = detail::parse_wexpr(c, rf);
      saw_coeff = true;
    }
    long exp = 0;
    c.skip_ws();
    bool saw_x = false;
    if (c.peek() == '*' || c.peek() == 'X') {
      if (saw_coeff) c.eat('*');
      if (!c.eat('X')) throw ParseError("expected 'X'", c.i);
      saw_x = true;
      exp = 1;
      if (c.eat('^')) exp = (long)c.integer();
    }
    if (!saw_coeff && !saw_x) throw ParseError("expected term", c.i);
    if (neg) coeff = rf.neg(coeff);
    auto [it, inserted] = coeffs.emplace(exp, coeff);
    if (!inserted) it->second = rf.add(it->second, coeff);
  }
  if (coeffs.empty()) return zero(d);
  long lo = coeffs.begin()->first, hi = coeffs.rbegin()->first;
  std::vector<std::uint64_t> digits((std::size_t)(hi - lo + 1), 0);
  for (auto& [pos, v] : coeffs) digits[(std::size_t)(pos - lo)] = v;
  return from_digits(d, lo, std::move(digits), /*exact=*/true);
}

namespace detail {

inline std::string residue_str(const ResidueField& rf, std::uint64_t a) {
  if (rf.f == 1 || rf.in_prime_subfield(a)) return std::to_string(a);
  auto c = rf.decode(a);
  std::string out = "(";
  bool first = true;
  for (unsigned i = 0; i < rf.f; ++i) {
    if (c[i] == 0) continue;
    if (!first) out += "+";
    first = false;
    std::string mono;
    if (i == 0) {
      mono = std::to_string(c[i]);
    } else {
      if (c[i] != 1) mono = std::to_string(c[i]) + "*";
      mono += "w";
      if (i > 1) mono += "^" + std::to_string(i);
    }
    out += mono;
  }
  out += ")";
  return out;
}

}  // namespace detail

inline std::string FieldElement::to_string() const {
  if (digits_.empty()) return "0";
  if (desc_.kind == FieldKind::laurent) {
    const auto& rf = ResidueField::get(desc_.p, desc_.f);
    std::string out;
    for (std::size_t i = 0; i < digits_.size(); ++i) {
      if (digits_[i] == 0) continue;
      if (!out.empty()) out += " + ";
      long pos = lead_ + (long)i;
      std::string cs = detail::residue_str(rf, digits_[i]);
      if (pos == 0) {
        out += cs;
      } else {
        std::string xs = pos == 1 ? "X" : "X^" + std::to_string(pos);
        if (cs == "1")
          out += xs;
        else
          out += cs + "*" + xs;
      }
    }
    return out;
  }
  mpz_class m = detail::mag_to_mpz(digits_, desc_.p);
  bool neg = exact_ && negative_;
  if (lead_ >= 0) {
    mpz_class full = m;
    for (long i = 0; i < lead_; ++i) full *= (unsigned long)desc_.p;
    return (neg ? "-" : "") + full.get_str();
  }
  mpz_class den = 1;
  for (long i = 0; i < -lead_; ++i) den *= (unsigned long)desc_.p;
  return (neg ? "-" : "") + m.get_str() + "/" + den.get_str();
}

// ---- residue subfield embedding (F_p((X)) inside F_{p^f}((X))) ----------

/// Ring embedding of the prime-subfield Laurent series into the extension.
inline FieldElement embed_into_extension(const FieldElement& x, unsigned f) {
  const auto& d = x.descriptor();
  if (d.kind != FieldKind::laurent || d.f != 1)
    throw DescriptorMismatch("embedding is defined on F_p((X)) elements");
  FieldDescriptor target{FieldKind::laurent, d.p, f};
  validate(target);
  std::optional<long> v = x.valuation();
  if (!v) return x.exact() ? FieldElement::zero(target)
                           : FieldElement::zero_class(target, x.precision());
  // digits are already prime-subfield residues; packed codes coincide
  std::vector<std::uint64_t> digits;
  for (long pos = *v; pos < x.support_end(); ++pos) digits.push_back(x.digit_at(pos));
  return FieldElement::from_digits(target, *v, std::move(digits), x.exact(), x.precision());
}

/// Coordinates of an F_{p^f}((X)) element in the basis (1, w, ..., w^{f-1})
/// as a rank-f module over F_p((X)).
inline std::vector<FieldElement> module_coordinates(const FieldElement& x) {
  const auto& d = x.descriptor();
  if (d.kind != FieldKind::laurent || d.f < 2)
    throw DescriptorMismatch("module coordinates need an extension Laurent field");
  const auto& rf = ResidueField::get(d.p, d.f);
  FieldDescriptor base{FieldKind::laurent, d.p, 1};
  std::vector<FieldElement> out;
  std::optional<long> v = x.valuation();
  if (!v) {
    for (unsigned i = 0; i < d.f; ++i)
      out.push_back(x.exact() ? FieldElement::zero(base)
                              : FieldElement::zero_class(base, x.precision()));
    return out;
  }
  for (unsigned i = 0; i < d.f; ++i) {
    std::vector<std::uint64_t> digits;
    for (long pos = *v; pos < x.support_end(); ++pos)
      digits.push_back(rf.decode(x.digit_at(pos))[i]);
    out.push_back(FieldElement::from_digits(base, *v, std::move(digits), x.exact(), x.precision()));
  }
  return out;
}

inline FieldElement from_module_coordinates(const FieldDescriptor& target,
                                            const std::vector<FieldElement>& coords) {
  if (target.kind != FieldKind::laurent || coords.size() != target.f)
    throw DescriptorMismatch("coordinate count must match extension degree");
  const auto& rf = ResidueField::get(target.p, target.f);
  FieldElement acc = FieldElement::zero(target);
  for (unsigned i = 0; i < target.f; ++i) {
    FieldElement lift = embed_into_extension(coords[i], target.f);
    std::vector<std::uint64_t> mono(target.f, 0);
    mono[i] = 1;
    FieldElement wi =
        FieldElement::from_digits(target, 0, {rf.encode(mono)}, /*exact=*/true);
    acc = acc + lift * wi;
  }
  return acc;
}

}  // namespace ulf
