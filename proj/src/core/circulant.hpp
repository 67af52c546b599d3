#pragma once

#include <Eigen/Dense>
#include <complex>

#include "core/charges.hpp"
#include "core/errors.hpp"
#include "core/tensor.hpp"

namespace bandloop {

/// Translation-invariant kernel on the block ring Z_L. Holds both the Fourier
/// symbol and the realization k(d); the dense matrix view is M(x,y) = k(x-y).
/// Conversions use one fixed DFT so repeated conversions are idempotent up to
/// round-off.
class CirculantKernel {
 public:
  CirculantKernel() = default;

  /// Builds from Fourier multipliers; the realization is filled immediately.
  static CirculantKernel from_symbol(Eigen::VectorXcd symbol);

  int size() const { return static_cast<int>(symbol_.size()); }

  std::complex<double> symbol(int k) const { return symbol_(k); }
  const Eigen::VectorXcd& symbols() const { return symbol_; }

  /// Kernel value at displacement d (any integer, reduced mod L).
  std::complex<double> at(long d) const;

  /// Dense entry M(x, y) = k(x - y mod L).
  std::complex<double> entry(int x, int y) const { return at(static_cast<long>(x) - y); }

  /// Row sum; equals symbol(0) exactly.
  std::complex<double> row_sum() const { return symbol_(0); }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
  Eigen::MatrixXcd dense() const;

 private:
  Eigen::VectorXcd symbol_;
  Eigen::VectorXcd realization_;
};

/// Eigenvalue of the block profile S_B at frequency k: (1 + 2 cos(2 pi k / L)) / 3.
double block_profile_symbol(int k, int L);

/// The block profile S_B itself as a circulant.
CirculantKernel block_profile_kernel(int L);

/// Propagator (1 - xi S_B)^{-1}. Requires |xi| < 1 with a 1e-8 margin.
CirculantKernel theta_kernel(std::complex<double> xi, int L);

/// Evolution factor (1 - s xi S_B)(1 - t xi S_B)^{-1} for 0 <= s <= t < 1.
/// |xi| <= 1 is allowed as long as |t xi| stays away from 1.
CirculantKernel evolution_factor(double s, double t, std::complex<double> xi, int L);

/// Applies the evolution factor legwise to an n-leg tensor, with leg i using
/// xi_i = m(sigma_i) m(sigma_{i+1}) (cyclic, m from the boundary value).
BlockTensor apply_evolution(double s, double t, const SignWord& word, const BlockTensor& tensor,
                            std::complex<double> boundary_m_value);

/// vartheta_{t,a} = (1-t)^{n-1} prod_{i>=2} Theta_t(a_1 - a_i). Normalized so
/// that summing over a_2..a_n gives exactly 1.
std::complex<double> vartheta(double t, int n, int L, const std::vector<int>& word);

/// Tensor whose total mass over the trailing n-1 legs vanishes for every a_1.
struct SumZeroTensor {
  BlockTensor values;
  bool verified = false;
  double max_residual = 0.0;  // max_a1 |sum_{a2..an}| / max(1, max |A|)
};

/// Q_t: subtracts (P o A) * vartheta so that P o (Q_t o A) = 0 identically.
SumZeroTensor remove_zero_mode(double t, const BlockTensor& tensor);

}  // namespace bandloop
