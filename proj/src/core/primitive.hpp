#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "core/band_model.hpp"
#include "core/charges.hpp"
#include "core/circulant.hpp"
#include "core/noncrossing.hpp"
#include "core/spectral.hpp"
#include "core/tensor.hpp"

namespace bandloop {

/// Evaluator for the deterministic loop calculus at fixed (model, E, t).
/// Caches the three propagator kernels (xi = t m^2, t, t conj(m)^2) and the
/// partition trees per word length, so per-word evaluations stay cheap.
/// All evaluation methods are const and safe to call concurrently.
class PrimitiveEvaluator {
 public:
  PrimitiveEvaluator(const BandModel& model, double E, double t);

  const BandModel& model() const { return model_; }
  double energy() const { return E_; }
  double time() const { return t_; }
  Complex boundary() const { return m_; }

  /// Weight of one partition tree: product of boundary kernels
  /// Theta_{t m_v m_{v+1}} and chord kernels (Theta_{t m_i m_j} - 1), summed
  /// over the face variables. The two-vertex loop has a single boundary
  /// curve and no branch point, so its weight is Theta_{t m_1 m_2}(a_1-a_2).
  Complex tree_weight(const PartitionTree& tree, const SignWord& sigma,
                      const std::vector<int>& blocks) const;

  /// Primitive loop value. n = 1 is the constant m(sigma_1); n = 2, 3 use the
  /// closed propagator forms; n >= 4 sums tree weights over all non-crossing
  /// chord sets, with the m_sigma W^{-n+1} prefactor.
  Complex k_loop(const SignWord& sigma, const std::vector<int>& blocks) const;

  /// Same value as k_loop for n >= 2, but evaluated through the tree sum on
  /// every length. Cross-check path for the closed forms.
  Complex k_loop_tree_sum(const SignWord& sigma, const std::vector<int>& blocks) const;

  /// Partial sum over trees whose set of opposite-charge chords equals pi,
  /// in the W-free normalization (no m_sigma W^{-n+1} prefactor).
  Complex k_loop_pi(const SignWord& sigma, const std::vector<int>& blocks,
                    const ChordSet& pi) const;

  /// Self-energy with no opposite-charge chord: the tree sum with boundary
  /// kernels stripped, as a function of the attachment word d. Faces pin
  /// their d-values equal; vertex-free faces are summed out. n <= 6.
  Complex self_energy_empty(const SignWord& sigma, const std::vector<int>& d) const;

  /// Propagator for the charge product m(a) m(b) at this (t, E).
  const CirculantKernel& theta(Charge a, Charge b) const;

 private:
  const std::vector<PartitionTree>& trees_for(int n) const;

  BandModel model_;
  double E_;
  double t_;
  Complex m_;
  std::vector<CirculantKernel> kernels_;  // [++, +-, --]
  mutable std::mutex tree_mutex_;
  mutable std::map<int, std::vector<PartitionTree>> trees_;
};

/// One-shot wrappers around PrimitiveEvaluator.
Complex k_loop(const BandModel& model, double E, double t, const SignWord& sigma,
               const std::vector<int>& blocks);
Complex k_loop_pi(const BandModel& model, double E, double t, const SignWord& sigma,
                  const std::vector<int>& blocks, const ChordSet& pi);
Complex self_energy_empty(double E, double t, const SignWord& sigma,
                          const std::vector<int>& d, int L);

/// Joint integration of the quadratic loop hierarchy for all charge words of
/// lengths 2..n_max, from the delta initial data, with fixed-step RK4. The
/// result stores the half-step rerun gap; `converged` requires it below
/// 1e-6 in the sup norm, per tensor.
struct PrimitiveOdeResult {
  int n_max = 0;
  int L = 0;
  double E = 0.0;
  double t_final = 0.0;
  double step = 0.0;
  bool converged = false;
  double convergence_gap = 0.0;
  /// tensors.at({n, mask}): mask bit p set means charge Minus at position p.
  std::map<std::pair<int, unsigned>, BlockTensor> tensors;

  const BlockTensor& tensor(const SignWord& sigma) const;
};

unsigned sign_word_mask(const SignWord& sigma);
SignWord sign_word_from_mask(int n, unsigned mask);

PrimitiveOdeResult primitive_ode_solve(const BandModel& model, double E, double t_final,
                                       int n_max, double step);

}  // namespace bandloop
