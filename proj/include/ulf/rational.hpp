#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <string>
#include <vector>

#include "ulf/errors.hpp"

namespace ulf {

/// Exact rational number used for all log-scale bookkeeping (valuations,
/// Newton polygon slopes, norm shifts, BCH coefficients). Never a float.
using Rat = boost::rational<long long>;

inline long long floor_rat(const Rat& r) {
  long long q = r.numerator() / r.denominator();
  if (r.numerator() % r.denominator() != 0 && r.numerator() < 0) --q;
  return q;
}

inline long long ceil_rat(const Rat& r) { return -floor_rat(-r); }

inline std::string rat_to_string(const Rat& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline Rat rat_from_string(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rat(std::stoll(s), 1);
    long long num = std::stoll(s.substr(0, slash));
    long long den = std::stoll(s.substr(slash + 1));
    if (den == 0) throw ParseError("zero denominator in rational '" + s + "'");
    return Rat(num, den);
  } catch (const std::invalid_argument&) {
    throw ParseError("malformed rational '" + s + "'");
  } catch (const std::out_of_range&) {
    throw ParseError("rational out of range '" + s + "'");
  }
}

/// Valuation-scale surrogate of an absolute value or norm value.
/// +infinity encodes the value at 0. Ordering is the usual rational order;
/// it is *reversed* relative to absolute values (larger = smaller |.|).
class LogValue {
public:
  LogValue() : inf_(true) {}
  LogValue(Rat v) : inf_(false), v_(v) {}
  LogValue(long long v) : inf_(false), v_(v, 1) {}
  static LogValue infinity() { return LogValue(); }

  bool is_infinite() const { return inf_; }
  const Rat& value() const {
    if (inf_) throw Error(ErrorClass::precondition, "LogValue: infinite value has no rational part");
    return v_;
  }

  friend bool operator==(const LogValue& a, const LogValue& b) {
    if (a.inf_ || b.inf_) return a.inf_ == b.inf_;
    return a.v_ == b.v_;
  }
  friend bool operator<(const LogValue& a, const LogValue& b) {
    if (a.inf_) return false;
    if (b.inf_) return true;
    return a.v_ < b.v_;
  }
  friend bool operator<=(const LogValue& a, const LogValue& b) { return a < b || a == b; }
  friend bool operator>(const LogValue& a, const LogValue& b) { return b < a; }
  friend bool operator>=(const LogValue& a, const LogValue& b) { return b <= a; }
  friend bool operator!=(const LogValue& a, const LogValue& b) { return !(a == b); }

  friend LogValue operator+(const LogValue& a, const LogValue& b) {
    if (a.inf_ || b.inf_) return infinity();
    return LogValue(a.v_ + b.v_);
  }

  std::string to_string() const { return inf_ ? "inf" : rat_to_string(v_); }

private:
  bool inf_;
  Rat v_{0, 1};
};

inline LogValue min(const LogValue& a, const LogValue& b) { return a < b ? a : b; }

/// lcm of the denominators of a list of rationals (the gradation scale m).
inline long long denominator_lcm(const std::vector<Rat>& rs) {
  long long m = 1;
  for (const auto& r : rs) m = std::lcm(m, r.denominator());
  return m;
}

}  // namespace ulf
