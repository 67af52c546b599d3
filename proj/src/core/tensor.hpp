#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "core/errors.hpp"

namespace bandloop {

/// Dense complex tensor over Z_L^n (n = number of legs). Flat row-major
/// storage; leg 0 is the slowest index. Sized for desk-scale L and n <= ~4.
class BlockTensor {
 public:
  BlockTensor() = default;

  BlockTensor(int legs, int L)
      : legs_(legs), L_(L), values_(flat_size(legs, L), std::complex<double>(0.0, 0.0)) {
    require(legs >= 1, "tensor: need at least one leg");
    require(L >= 1, "tensor: need L >= 1");
  }

  static std::size_t flat_size(int legs, int L) {
    std::size_t n = 1;
    for (int i = 0; i < legs; ++i) n *= static_cast<std::size_t>(L);
    return n;
  }

  int legs() const { return legs_; }
  int size() const { return L_; }
  std::size_t flat_size() const { return values_.size(); }

  std::complex<double>& flat(std::size_t i) { return values_[i]; }
  const std::complex<double>& flat(std::size_t i) const { return values_[i]; }

  std::size_t index(const std::vector<int>& word) const {
    std::size_t idx = 0;
    for (int leg = 0; leg < legs_; ++leg) idx = idx * L_ + static_cast<std::size_t>(word[leg]);
    return idx;
  }

  std::complex<double>& at(const std::vector<int>& word) { return values_[index(word)]; }
  const std::complex<double>& at(const std::vector<int>& word) const { return values_[index(word)]; }

  /// Advances `word` through Z_L^n in row-major order; false after the last.
  bool next_word(std::vector<int>& word) const {
    for (int leg = legs_ - 1; leg >= 0; --leg) {
      if (++word[leg] < L_) return true;
      word[leg] = 0;
    }
    return false;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  std::vector<std::complex<double>>& raw() { return values_; }
  const std::vector<std::complex<double>>& raw() const { return values_; }

 private:
  int legs_ = 0;
  int L_ = 0;
  std::vector<std::complex<double>> values_;
};

}  // namespace bandloop
