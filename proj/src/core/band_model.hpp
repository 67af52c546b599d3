#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

#include "core/errors.hpp"

namespace bandloop {

/// Block band geometry: L blocks of width W on a ring, N = W*L.
///
/// The variance profile is S = S_B (x) S_W with
///   S_B(a,b) = 1/3 for |a-b| <= 1 mod L,   S_W(i,j) = 1/W,
/// so every row of S sums to 1. Entries are never materialized unless a
/// dense view is requested; variance queries are computed from (W, L).
/// Blocks are 0-based internally (reports print them 1-based).
class BandModel {
 public:
  BandModel(int W, int L);

  int block_size() const { return W_; }
  int block_count() const { return L_; }
  long dimension() const { return N_; }

  /// Block containing matrix index i (0-based both ways).
  int block_of(long i) const { return static_cast<int>(i / W_); }

  /// True when blocks a and b coincide or are adjacent mod L.
  bool blocks_adjacent(int a, int b) const;

  /// S_B(a,b): 1/3 on the tridiagonal ring, else 0.
  double block_profile(int a, int b) const;

  /// S_ij = S_B([i],[j]) / W.
  double variance(long i, long j) const;

  /// Dense S, for small-model tests only.
  Eigen::MatrixXd dense_variance() const;

 private:
  int W_;
  int L_;
  long N_;
};

/// One draw of the Gaussian band Hamiltonian, together with the stream it
/// came from. `time` records the flow scaling applied (1 for a plain draw).
struct HermitianSample {
  Eigen::MatrixXcd H;
  std::uint64_t master_seed = 0;
  std::uint64_t sample_index = 0;
  double time = 1.0;
};

/// Draws H with independent complex Gaussian entries of variance S_ij
/// (diagonal real, off-diagonal circularly symmetric), Hermitian by
/// construction and identically zero outside the band. Deterministic in
/// (model, master_seed, sample_index).
HermitianSample sample_hamiltonian(const BandModel& model, std::uint64_t master_seed,
                                   std::uint64_t sample_index = 0);

/// Fixed-time marginal of the matrix Brownian motion: sqrt(t) * H.
HermitianSample scale_to_time(const HermitianSample& sample, double t);

}  // namespace bandloop
