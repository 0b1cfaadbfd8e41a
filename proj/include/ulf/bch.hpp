#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <vector>

#include "ulf/rational.hpp"

namespace ulf {

/// One merged term of the truncated Baker-Campbell-Hausdorff series:
/// coeff * [l_1, [l_2, [..., [l_{w-1}, l_w]...]]] with letters 0 = x, 1 = y.
/// A length-1 word stands for the letter itself.
struct BchTerm {
  Rat coeff;
  std::vector<std::uint8_t> word;
};

namespace detail {

inline long long factorial_ll(int n) {
  long long r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

inline void bch_blocks(int cls, int remaining, int nblocks, Rat denom_acc,
                       std::vector<std::uint8_t>& word, std::map<std::vector<std::uint8_t>, Rat>& acc) {
  if (!word.empty()) {
    // close the current sequence of blocks: coefficient (-1)^(n-1) / (n * W * prod r_i! s_i!)
    int w = (int)word.size();
    Rat coeff = Rat((nblocks % 2 == 1) ? 1 : -1) / (Rat(nblocks) * Rat(w) * denom_acc);
    // words ending in a repeated letter evaluate to zero; the innermost
    // bracket is normalized to [x,y] so mirror words merge
    if (!(w >= 2 && word[(std::size_t)w - 1] == word[(std::size_t)w - 2])) {
      std::vector<std::uint8_t> key = word;
      if (w >= 2 && key[(std::size_t)w - 2] > key[(std::size_t)w - 1]) {
        std::swap(key[(std::size_t)w - 2], key[(std::size_t)w - 1]);
        coeff = -coeff;
      }
      auto [it, fresh] = acc.emplace(std::move(key), coeff);
      if (!fresh) it->second += coeff;
    }
  }
  if (remaining == 0) return;
  // append one more block (r x's followed by s y's, r + s >= 1)
  for (int r = 0; r <= remaining; ++r)
    for (int s = 0; r + s <= remaining; ++s) {
      if (r + s == 0) continue;
      std::size_t before = word.size();
      word.insert(word.end(), (std::size_t)r, 0);
      word.insert(word.end(), (std::size_t)s, 1);
      bch_blocks(cls, remaining - r - s, nblocks + 1,
                 denom_acc * Rat(factorial_ll(r)) * Rat(factorial_ll(s)), word, acc);
      word.resize(before);
    }
}

}  // namespace detail

/// Terms of the BCH series truncated at total degree cls (the nilpotency
/// class), generated by the Dynkin formula with exact rational coefficients
/// and merged by bracket word. Cached per class.
inline const std::vector<BchTerm>& bch_terms(int cls) {
  if (cls < 1 || cls > 8)
    throw Error(ErrorClass::precondition, "BCH truncation class out of supported range [1,8]");
  static std::map<int, std::vector<BchTerm>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(cls);
  if (it != cache.end()) return it->second;
  std::map<std::vector<std::uint8_t>, Rat> acc;
  std::vector<std::uint8_t> word;
  detail::bch_blocks(cls, cls, 0, Rat(1), word, acc);
  std::vector<BchTerm> terms;
  for (auto& [w, c] : acc)
    if (c != Rat(0)) terms.push_back({c, w});
  return cache.emplace(cls, std::move(terms)).first->second;
}

}  // namespace ulf
