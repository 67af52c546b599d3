#include "core/circulant.hpp"

#include <cmath>
#include <numbers>

namespace bandloop {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Inverse DFT of the symbol: k(d) = L^{-1} sum_k symbol(k) e^{+2 pi i k d / L}.
Eigen::VectorXcd symbol_to_realization(const Eigen::VectorXcd& symbol) {
  const int L = static_cast<int>(symbol.size());
  Eigen::VectorXcd out(L);
  for (int d = 0; d < L; ++d) {
    std::complex<double> acc(0.0, 0.0);
    for (int k = 0; k < L; ++k) {
      const double phase = kTwoPi * k * d / L;
      acc += symbol(k) * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    out(d) = acc / static_cast<double>(L);
  }
  return out;
}

}  // namespace

CirculantKernel CirculantKernel::from_symbol(Eigen::VectorXcd symbol) {
  require(symbol.size() >= 1, "circulant: empty symbol");
  CirculantKernel k;
  k.symbol_ = std::move(symbol);
  k.realization_ = symbol_to_realization(k.symbol_);
  return k;
}

std::complex<double> CirculantKernel::at(long d) const {
  const long L = symbol_.size();
  long r = d % L;
  if (r < 0) r += L;
  return realization_(r);
}

Eigen::VectorXcd CirculantKernel::apply(const Eigen::VectorXcd& v) const {
  const int L = size();
  require(static_cast<int>(v.size()) == L, "circulant apply: size mismatch");
  Eigen::VectorXcd out(L);
  for (int x = 0; x < L; ++x) {
    std::complex<double> acc(0.0, 0.0);
    for (int y = 0; y < L; ++y) acc += at(static_cast<long>(x) - y) * v(y);
    out(x) = acc;
  }
  return out;
}

Eigen::MatrixXcd CirculantKernel::dense() const {
  const int L = size();
  Eigen::MatrixXcd M(L, L);
  for (int x = 0; x < L; ++x)
    for (int y = 0; y < L; ++y) M(x, y) = at(static_cast<long>(x) - y);
  return M;
}

double block_profile_symbol(int k, int L) {
  return (1.0 + 2.0 * std::cos(kTwoPi * k / L)) / 3.0;
}

CirculantKernel block_profile_kernel(int L) {
  require(L >= 3, "block profile: L must be >= 3");
  Eigen::VectorXcd symbol(L);
  for (int k = 0; k < L; ++k) symbol(k) = block_profile_symbol(k, L);
  return CirculantKernel::from_symbol(std::move(symbol));
}

CirculantKernel theta_kernel(std::complex<double> xi, int L) {
  require(L >= 3, "theta kernel: L must be >= 3");
  require(std::abs(xi) < 1.0 - 1e-8, "theta kernel: need |xi| < 1 (with 1e-8 margin)");
  Eigen::VectorXcd symbol(L);
  for (int k = 0; k < L; ++k) symbol(k) = 1.0 / (1.0 - xi * block_profile_symbol(k, L));
  return CirculantKernel::from_symbol(std::move(symbol));
}

CirculantKernel evolution_factor(double s, double t, std::complex<double> xi, int L) {
  require(L >= 3, "evolution factor: L must be >= 3");
  require(0.0 <= s && s <= t && t < 1.0, "evolution factor: need 0 <= s <= t < 1");
  require(std::abs(xi) <= 1.0, "evolution factor: need |xi| <= 1");
  require(std::abs(t * xi) < 1.0 - 1e-8, "evolution factor: |t xi| too close to 1");
  Eigen::VectorXcd symbol(L);
  for (int k = 0; k < L; ++k) {
    const double sk = block_profile_symbol(k, L);
    symbol(k) = (1.0 - s * xi * sk) / (1.0 - t * xi * sk);
  }
  return CirculantKernel::from_symbol(std::move(symbol));
}

BlockTensor apply_evolution(double s, double t, const SignWord& word, const BlockTensor& tensor,
                            std::complex<double> boundary_m_value) {
  const int n = tensor.legs();
  require(static_cast<int>(word.size()) == n, "apply_evolution: sign word / tensor leg mismatch");
  const int L = tensor.size();

  BlockTensor current = tensor;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (int leg = 0; leg < n; ++leg) {
    const std::complex<double> xi = charge_m(boundary_m_value, word[leg]) *
                                    charge_m(boundary_m_value, word[(leg + 1) % n]);
    const CirculantKernel factor = evolution_factor(s, t, xi, L);
    BlockTensor next(n, L);
    std::fill(idx.begin(), idx.end(), 0);
    // Contract the factor into one leg at a time.
    do {
      std::complex<double> acc(0.0, 0.0);
      std::vector<int> src = idx;
      for (int b = 0; b < L; ++b) {
        src[leg] = b;
        acc += factor.at(static_cast<long>(idx[leg]) - b) * current.at(src);
      }
      next.at(idx) = acc;
    } while (next.next_word(idx));
    current = std::move(next);
  }
  return current;
}

std::complex<double> vartheta(double t, int n, int L, const std::vector<int>& word) {
  require(n >= 2, "vartheta: need n >= 2");
  require(static_cast<int>(word.size()) == n, "vartheta: word length mismatch");
  require(t >= 0.0 && t < 1.0, "vartheta: t must lie in [0, 1)");
  if (t == 0.0) {
    for (int i = 1; i < n; ++i)
      if (word[i] != word[0]) return 0.0;
    return 1.0;
  }
  const CirculantKernel theta = theta_kernel(t, L);
  std::complex<double> prod = std::pow(1.0 - t, n - 1);
  for (int i = 1; i < n; ++i) prod *= theta.at(static_cast<long>(word[0]) - word[i]);
  return prod;
}

SumZeroTensor remove_zero_mode(double t, const BlockTensor& tensor) {
  const int n = tensor.legs();
  require(n >= 2, "remove_zero_mode: need n >= 2");
  const int L = tensor.size();

  // P o A: total mass over the trailing legs for each a_1.
  Eigen::VectorXcd mass = Eigen::VectorXcd::Zero(L);
  const std::size_t trailing = BlockTensor::flat_size(n - 1, L);
  for (int a1 = 0; a1 < L; ++a1) {
    std::complex<double> acc(0.0, 0.0);
    const std::size_t base = static_cast<std::size_t>(a1) * trailing;
    for (std::size_t r = 0; r < trailing; ++r) acc += tensor.flat(base + r);
    mass(a1) = acc;
  }

  require(t >= 0.0 && t < 1.0, "remove_zero_mode: t must lie in [0, 1)");
  const CirculantKernel theta = theta_kernel(t, L);
  const std::complex<double> prefactor = std::pow(1.0 - t, n - 1);
  SumZeroTensor out;
  out.values = tensor;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  do {
    std::complex<double> vt = prefactor;
    for (int i = 1; i < n; ++i) vt *= theta.at(static_cast<long>(idx[0]) - idx[i]);
    out.values.at(idx) -= mass(idx[0]) * vt;
  } while (out.values.next_word(idx));

  // Verify the defining property.
  const double scale = std::max(1.0, tensor.max_abs());
  double worst = 0.0;
  for (int a1 = 0; a1 < L; ++a1) {
    std::complex<double> acc(0.0, 0.0);
    const std::size_t base = static_cast<std::size_t>(a1) * trailing;
    for (std::size_t r = 0; r < trailing; ++r) acc += out.values.flat(base + r);
    worst = std::max(worst, std::abs(acc));
  }
  out.max_residual = worst / scale;
  out.verified = out.max_residual < 1e-10;
  return out;
}

}  // namespace bandloop
