#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ulf/field.hpp"
#include "ulf/polynomial.hpp"

namespace ulf {

using Vec = std::vector<FieldElement>;

/// Dense square-or-rectangular matrix over K, row major.
class Matrix {
public:
  Matrix() = default;
  Matrix(const FieldDescriptor& d, std::size_t rows, std::size_t cols)
      : desc_(d), rows_(rows), cols_(cols), e_(rows * cols, FieldElement::zero(d)) {}

  static Matrix identity(const FieldDescriptor& d, std::size_t n) {
    Matrix m(d, n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = FieldElement::one(d);
    return m;
  }

  static Matrix from_rows(const FieldDescriptor& d, const std::vector<Vec>& rows) {
    Matrix m(d, rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_)
        throw Error(ErrorClass::precondition, "ragged rows in matrix literal");
      for (std::size_t j = 0; j < m.cols_; ++j) m.at(i, j) = rows[i][j];
    }
    return m;
  }

  static Matrix from_columns(const FieldDescriptor& d, const std::vector<Vec>& cols) {
    Matrix m(d, cols.empty() ? 0 : cols[0].size(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j].size() != m.rows_)
        throw Error(ErrorClass::precondition, "ragged columns in matrix literal");
      for (std::size_t i = 0; i < m.rows_; ++i) m.at(i, j) = cols[j][i];
    }
    return m;
  }

  const FieldDescriptor& descriptor() const { return desc_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  FieldElement& at(std::size_t i, std::size_t j) { return e_[i * cols_ + j]; }
  const FieldElement& at(std::size_t i, std::size_t j) const { return e_[i * cols_ + j]; }

  Vec column(std::size_t j) const {
    Vec v;
    v.reserve(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v.push_back(at(i, j));
    return v;
  }
  Vec row(std::size_t i) const {
    return Vec(e_.begin() + (long)(i * cols_), e_.begin() + (long)((i + 1) * cols_));
  }

  Matrix transpose() const {
    Matrix t(desc_, cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
    return t;
  }

  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    a.check_shape(b);
    Matrix r(a.desc_, a.rows_, a.cols_);
    for (std::size_t k = 0; k < a.e_.size(); ++k) r.e_[k] = a.e_[k] + b.e_[k];
    return r;
  }
  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    a.check_shape(b);
    Matrix r(a.desc_, a.rows_, a.cols_);
    for (std::size_t k = 0; k < a.e_.size(); ++k) r.e_[k] = a.e_[k] - b.e_[k];
    return r;
  }
  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    require_same(a.desc_, b.desc_);
    if (a.cols_ != b.rows_) throw Error(ErrorClass::precondition, "matrix shape mismatch");
    Matrix r(a.desc_, a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        if (a.at(i, k).is_zero()) continue;
        for (std::size_t j = 0; j < b.cols_; ++j)
          r.at(i, j) = r.at(i, j) + a.at(i, k) * b.at(k, j);
      }
    return r;
  }
  friend Matrix operator*(const FieldElement& s, const Matrix& a) {
    Matrix r(a.desc_, a.rows_, a.cols_);
    for (std::size_t k = 0; k < a.e_.size(); ++k) r.e_[k] = s * a.e_[k];
    return r;
  }

  std::string to_string() const {
    std::string out = "[";
    for (std::size_t i = 0; i < rows_; ++i) {
      out += i ? "; " : "";
      for (std::size_t j = 0; j < cols_; ++j) out += (j ? ", " : "") + at(i, j).to_string();
    }
    return out + "]";
  }

private:
  void check_shape(const Matrix& o) const {
    require_same(desc_, o.desc_);
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw Error(ErrorClass::precondition, "matrix shape mismatch");
  }

  FieldDescriptor desc_{FieldKind::padic, 2, 1};
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<FieldElement> e_;
};

inline Vec matvec(const Matrix& a, const Vec& v) {
  if (a.cols() != v.size()) throw Error(ErrorClass::precondition, "matvec shape mismatch");
  Vec r(a.rows(), FieldElement::zero(a.descriptor()));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (!a.at(i, j).is_zero() && !v[j].is_zero()) r[i] = r[i] + a.at(i, j) * v[j];
  return r;
}

inline Vec vec_add(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}
inline Vec vec_sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}
inline Vec vec_scale(const FieldElement& s, const Vec& a) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

/// Minimum valuation over the coordinates (infinite for the zero vector).
inline LogValue vec_min_valuation(const Vec& v) {
  LogValue m = LogValue::infinity();
  for (const auto& x : v) m = min(m, x.log_valuation());
  return m;
}

// ---- elimination with valuation pivoting --------------------------------
//
// Pivot choice is the entry of minimal valuation among those certainly
// nonzero at the margin; this is the ultrametric analogue of partial
// pivoting and controls precision loss.

namespace detail {

struct EliminationResult {
  Matrix m;                       // reduced augmented matrix
  std::vector<std::size_t> pivot_col;  // per pivot row, the column index (in A-part)
  std::vector<std::size_t> col_perm;   // identity-sized permutation of A columns
  std::size_t rank = 0;
};

/// Bring [A | B] to reduced row-echelon form in the A-part with full
/// (valuation) pivoting on A columns.
inline EliminationResult eliminate(Matrix m, std::size_t acols, long prec, long margin) {
  EliminationResult res;
  res.col_perm.resize(acols);
  for (std::size_t j = 0; j < acols; ++j) res.col_perm[j] = j;
  std::size_t r = 0;
  const std::size_t rows = m.rows();
  for (std::size_t pc = 0; pc < acols && r < rows; ++pc) {
    // find the minimal-valuation certainly-nonzero entry in m[r.., pc..acols)
    std::optional<std::pair<std::size_t, std::size_t>> best;
    LogValue best_val = LogValue::infinity();
    for (std::size_t i = r; i < rows; ++i)
      for (std::size_t j = pc; j < acols; ++j) {
        const FieldElement& x = m.at(i, j);
        if (decide_zero(x, margin) == ZeroDecision::zero) continue;
        LogValue v = x.log_valuation();
        if (!best || v < best_val) {
          best = {i, j};
          best_val = v;
        }
      }
    if (!best) break;
    auto [bi, bj] = *best;
    // swap row bi -> r, column bj -> pc
    if (bi != r)
      for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m.at(bi, j), m.at(r, j));
    if (bj != pc) {
      for (std::size_t i = 0; i < rows; ++i) std::swap(m.at(i, bj), m.at(i, pc));
      std::swap(res.col_perm[bj], res.col_perm[pc]);
    }
    FieldElement inv = m.at(r, pc).inv(prec);
    for (std::size_t j = pc; j < m.cols(); ++j) m.at(r, j) = inv * m.at(r, j);
    m.at(r, pc) = FieldElement::one(m.descriptor());
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r) continue;
      FieldElement f = m.at(i, pc);
      if (f.is_zero()) continue;
      for (std::size_t j = pc; j < m.cols(); ++j) m.at(i, j) = m.at(i, j) - f * m.at(r, j);
      m.at(i, pc) = FieldElement::zero(m.descriptor());
    }
    res.pivot_col.push_back(pc);
    ++r;
  }
  res.rank = r;
  res.m = std::move(m);
  return res;
}

}  // namespace detail

inline std::size_t rank(const Matrix& a, long prec = kDefaultPrecision,
                        long margin = kMinSigDigits) {
  return detail::eliminate(a, a.cols(), prec, margin).rank;
}

inline bool invertible(const Matrix& a, long prec = kDefaultPrecision,
                       long margin = kMinSigDigits) {
  return a.rows() == a.cols() && rank(a, prec, margin) == a.rows();
}

/// Solve A X = B; nullopt when inconsistent at the margin.
inline std::optional<Matrix> solve(const Matrix& a, const Matrix& b,
                                   long prec = kDefaultPrecision, long margin = kMinSigDigits) {
  require_same(a.descriptor(), b.descriptor());
  if (a.rows() != b.rows()) throw Error(ErrorClass::precondition, "solve shape mismatch");
  Matrix aug(a.descriptor(), a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) aug.at(i, j) = a.at(i, j);
    for (std::size_t j = 0; j < b.cols(); ++j) aug.at(i, a.cols() + j) = b.at(i, j);
  }
  auto res = detail::eliminate(std::move(aug), a.cols(), prec, margin);
  // consistency: rows below rank must have zero B-part
  for (std::size_t i = res.rank; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      if (decide_zero(res.m.at(i, a.cols() + j), margin) == ZeroDecision::nonzero)
        return std::nullopt;
  // underdetermined systems get the particular solution with free vars = 0
  Matrix x(a.descriptor(), a.cols(), b.cols());
  for (std::size_t r = 0; r < res.rank; ++r) {
    std::size_t permuted = res.pivot_col[r];
    std::size_t orig = res.col_perm[permuted];
    for (std::size_t j = 0; j < b.cols(); ++j) x.at(orig, j) = res.m.at(r, a.cols() + j);
  }
  return x;
}

inline std::optional<Vec> solve(const Matrix& a, const Vec& b, long prec = kDefaultPrecision,
                                long margin = kMinSigDigits) {
  Matrix bm(a.descriptor(), b.size(), 1);
  for (std::size_t i = 0; i < b.size(); ++i) bm.at(i, 0) = b[i];
  auto x = solve(a, bm, prec, margin);
  if (!x) return std::nullopt;
  return x->column(0);
}

inline Matrix inverse(const Matrix& a, long prec = kDefaultPrecision,
                      long margin = kMinSigDigits) {
  if (a.rows() != a.cols()) throw NotInvertible("inverse of non-square matrix");
  auto x = solve(a, Matrix::identity(a.descriptor(), a.rows()), prec, margin);
  if (!x || rank(a, prec, margin) != a.rows())
    throw NotInvertible("matrix is singular at working precision");
  return *x;
}

/// Canonical kernel basis (reduced column echelon, sorted by pivot row).
inline std::vector<Vec> kernel(const Matrix& a, long prec = kDefaultPrecision,
                               long margin = kMinSigDigits) {
  auto res = detail::eliminate(a, a.cols(), prec, margin);
  std::vector<bool> is_pivot(a.cols(), false);
  for (std::size_t r = 0; r < res.rank; ++r) is_pivot[res.pivot_col[r]] = true;
  std::vector<std::pair<std::size_t, Vec>> tagged;
  for (std::size_t jc = 0; jc < a.cols(); ++jc) {
    if (is_pivot[jc]) continue;
    Vec v(a.cols(), FieldElement::zero(a.descriptor()));
    v[res.col_perm[jc]] = FieldElement::one(a.descriptor());
    for (std::size_t r = 0; r < res.rank; ++r)
      v[res.col_perm[res.pivot_col[r]]] = res.m.at(r, jc).neg();
    tagged.emplace_back(res.col_perm[jc], std::move(v));
  }
  std::sort(tagged.begin(), tagged.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<Vec> out;
  out.reserve(tagged.size());
  for (auto& [tag, v] : tagged) out.push_back(std::move(v));
  return out;
}

/// Is v in the column span of basis (margin-checked)?
inline bool in_span(const std::vector<Vec>& basis, const Vec& v, long prec = kDefaultPrecision,
                    long margin = kMinSigDigits) {
  if (vec_min_valuation(v).is_infinite()) return true;
  if (basis.empty()) return false;
  FieldDescriptor d = v[0].descriptor();
  Matrix b = Matrix::from_columns(d, basis);
  return solve(b, v, prec, margin).has_value();
}

/// Characteristic polynomial by the Berkowitz method: division free, so exact
/// inputs give exact coefficients. Returns a monic polynomial of degree n.
inline Poly char_poly(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorClass::precondition, "char_poly of non-square matrix");
  const FieldDescriptor& d = a.descriptor();
  std::size_t n = a.rows();
  if (n == 0) return Poly::from_coeffs(d, {FieldElement::one(d)});
  // p holds the characteristic polynomial of the leading r x r principal
  // submatrix, highest coefficient first.
  std::vector<FieldElement> p = {FieldElement::one(d), a.at(0, 0).neg()};
  for (std::size_t r = 2; r <= n; ++r) {
    // s_k = R * M^k * C for the bordering row R, column C of the r x r block
    std::vector<FieldElement> s;
    Vec c(r - 1);
    for (std::size_t i = 0; i < r - 1; ++i) c[i] = a.at(i, r - 1);
    Vec acc = c;
    for (std::size_t k = 0; k + 1 < r; ++k) {
      FieldElement dot = FieldElement::zero(d);
      for (std::size_t j = 0; j < r - 1; ++j) dot = dot + a.at(r - 1, j) * acc[j];
      s.push_back(dot);
      if (k + 2 < r) {
        Vec next(r - 1, FieldElement::zero(d));
        for (std::size_t i = 0; i < r - 1; ++i)
          for (std::size_t j = 0; j < r - 1; ++j) next[i] = next[i] + a.at(i, j) * acc[j];
        acc = std::move(next);
      }
    }
    // first column of the Toeplitz operator: (1, -a_rr, -s_0, -s_1, ...)
    std::vector<FieldElement> t;
    t.push_back(FieldElement::one(d));
    t.push_back(a.at(r - 1, r - 1).neg());
    for (auto& sk : s) t.push_back(sk.neg());
    std::vector<FieldElement> q(r + 1, FieldElement::zero(d));
    for (std::size_t i = 0; i <= r; ++i)
      for (std::size_t j = 0; j < p.size() && j <= i; ++j)
        if (i - j < t.size()) q[i] = q[i] + t[i - j] * p[j];
    p = std::move(q);
  }
  std::vector<FieldElement> low_to_high(p.rbegin(), p.rend());
  return Poly::from_coeffs(d, std::move(low_to_high));
}

/// Evaluate a polynomial at a matrix argument (Horner).
inline Matrix eval_matrix(const Poly& f, const Matrix& a) {
  const FieldDescriptor& d = a.descriptor();
  Matrix acc(d, a.rows(), a.cols());
  for (std::size_t i = f.c.size(); i-- > 0;) {
    acc = acc * a;
    for (std::size_t k = 0; k < a.rows(); ++k) acc.at(k, k) = acc.at(k, k) + f.c[i];
  }
  return acc;
}

}  // namespace ulf
