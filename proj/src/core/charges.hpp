#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "core/errors.hpp"

namespace bandloop {

/// Resolvent charge: Plus evaluates G at z, Minus at conj(z).
enum class Charge : std::int8_t { Plus = 0, Minus = 1 };

using SignWord = std::vector<Charge>;

inline Charge flip(Charge c) { return c == Charge::Plus ? Charge::Minus : Charge::Plus; }

/// m(sigma): the boundary value for Plus, its conjugate for Minus.
inline std::complex<double> charge_m(std::complex<double> m, Charge c) {
  return c == Charge::Plus ? m : std::conj(m);
}

/// Parses words like "+-+-". Throws on anything else.
inline SignWord parse_sign_word(const std::string& text) {
  SignWord word;
  word.reserve(text.size());
  for (char ch : text) {
    if (ch == '+')
      word.push_back(Charge::Plus);
    else if (ch == '-')
      word.push_back(Charge::Minus);
    else
      throw InvalidArgument("sign word: expected only '+' or '-', got '" + std::string(1, ch) + "'");
  }
  require(!word.empty(), "sign word: must be nonempty");
  return word;
}

inline std::string to_string(const SignWord& word) {
  std::string s;
  s.reserve(word.size());
  for (Charge c : word) s.push_back(c == Charge::Plus ? '+' : '-');
  return s;
}

/// Alternating word (+,-,+,-,...) of length n.
inline SignWord alternating_word(int n) {
  SignWord word(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) word[i] = (i % 2 == 0) ? Charge::Plus : Charge::Minus;
  return word;
}

}  // namespace bandloop
