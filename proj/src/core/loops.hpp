#pragma once

#include <Eigen/Dense>
#include <complex>
#include <deque>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "core/band_model.hpp"
#include "core/charges.hpp"
#include "core/spectral.hpp"

namespace bandloop {

/// A signed index word: charges and block indices. For loops |blocks| == n,
/// for chains |blocks| == n-1. Block values are 0-based; the positions k, l
/// fed to the cut/glue operators are 1-based, matching the usual convention
/// for cyclic words.
struct LoopSpec {
  SignWord sigma;
  std::vector<int> blocks;

  int length() const { return static_cast<int>(sigma.size()); }
};

/// Rotates (sigma, blocks) left by r positions; loop values are invariant.
LoopSpec rotate(const LoopSpec& spec, int r);

/// Cut the k-th resolvent edge and glue with a new block b:
///   sigma' = (s_1..s_k, s_k, s_{k+1}..s_n), blocks' = (a_1..a_{k-1}, b, a_k..a_n).
LoopSpec cut_glue_first(const LoopSpec& spec, int k, int b);

/// Cut edges k < l and keep the side carrying a_n (glued with b):
///   sigma' = (s_1..s_k, s_l..s_n), blocks' = (a_1..a_{k-1}, b, a_l..a_n).
LoopSpec cut_glue_left(const LoopSpec& spec, int k, int l, int b);

/// Cut edges k < l and keep the other side (glued with b):
///   sigma' = (s_k..s_l), blocks' = (a_k..a_{l-1}, b).
LoopSpec cut_glue_right(const LoopSpec& spec, int k, int l, int b);

/// Eigendecomposition of one sampled Hamiltonian, giving the resolvent at any
/// spectral parameter. Immutable and shareable after construction; assembled
/// resolvents are memoized per z behind a small bounded cache (FIFO eviction)
/// guarded by a mutex, so concurrent loop evaluations are safe.
class ResolventCache {
 public:
  ResolventCache(const BandModel& model, const HermitianSample& sample);

  const BandModel& model() const { return model_; }
  double sample_time() const { return time_; }
  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t sample_index() const { return sample_index_; }

  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXcd& eigenvectors() const { return eigenvectors_; }

  /// Full G(z) = U diag(1/(lambda - z)) U^*. Requires Im z != 0. The matrix
  /// for conj(z) is the adjoint of this one; callers use that instead of
  /// assembling a second matrix.
  std::shared_ptr<const Eigen::MatrixXcd> resolvent(Complex z) const;

  /// W x W sub-block (rows I_a, cols I_b) of G(z); works for either sign of
  /// Im z, using the adjoint relation for Im z < 0.
  Eigen::MatrixXcd resolvent_block(Complex z, int a, int b) const;

 private:
  BandModel model_;
  double time_;
  std::uint64_t master_seed_;
  std::uint64_t sample_index_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXcd eigenvectors_;

  mutable std::mutex cache_mutex_;
  mutable std::deque<std::pair<Complex, std::shared_ptr<const Eigen::MatrixXcd>>> assembled_;
  static constexpr std::size_t kMaxAssembled = 4;
};

/// Loop value W^{-n} tr prod_k G(sigma_k)[I_{a_{k-1}}, I_{a_k}] evaluated by
/// W x W block products; G(+) at point.z, G(-) at conj(point.z).
Complex g_loop(const ResolventCache& cache, const SpectralPoint& point, const LoopSpec& spec);

/// Entry (i, j) of the open chain G(s_1) E_{a_1} ... E_{a_{n-1}} G(s_n).
Complex g_chain_entry(const ResolventCache& cache, const SpectralPoint& point,
                      const LoopSpec& spec, long i, long j);

}  // namespace bandloop
