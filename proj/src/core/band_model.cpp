#include "core/band_model.hpp"

#include <cmath>

#include "core/rng.hpp"

namespace bandloop {

BandModel::BandModel(int W, int L) : W_(W), L_(L), N_(static_cast<long>(W) * L) {
  require(W >= 1, "band model: block size W must be >= 1");
  require(L >= 3, "band model: block count L must be >= 3 (nearest-neighbor ring degenerates)");
}

bool BandModel::blocks_adjacent(int a, int b) const {
  int d = std::abs(a - b) % L_;
  if (d > L_ / 2) d = L_ - d;
  return d <= 1;
}

double BandModel::block_profile(int a, int b) const {
  require(a >= 0 && a < L_ && b >= 0 && b < L_, "block index out of range");
  return blocks_adjacent(a, b) ? 1.0 / 3.0 : 0.0;
}

double BandModel::variance(long i, long j) const {
  require(i >= 0 && i < N_ && j >= 0 && j < N_, "matrix index out of range");
  return block_profile(block_of(i), block_of(j)) / W_;
}

Eigen::MatrixXd BandModel::dense_variance() const {
  Eigen::MatrixXd S(N_, N_);
  for (long i = 0; i < N_; ++i)
    for (long j = 0; j < N_; ++j) S(i, j) = variance(i, j);
  return S;
}

HermitianSample sample_hamiltonian(const BandModel& model, std::uint64_t master_seed,
                                   std::uint64_t sample_index) {
  const long N = model.dimension();
  HermitianSample out;
  out.master_seed = master_seed;
  out.sample_index = sample_index;
  out.H = Eigen::MatrixXcd::Zero(N, N);

  GaussianStream stream(master_seed, sample_index);
  // Fixed draw order (upper triangle, row-major, band entries only) keeps the
  // sample independent of how callers traverse it later.
  for (long i = 0; i < N; ++i) {
    for (long j = i; j < N; ++j) {
      const double s = model.variance(i, j);
      if (s == 0.0) continue;
      if (i == j) {
        out.H(i, i) = std::sqrt(s) * stream.next();
      } else {
        const double amp = std::sqrt(s / 2.0);
        const std::complex<double> v(amp * stream.next(), amp * stream.next());
        out.H(i, j) = v;
        out.H(j, i) = std::conj(v);
      }
    }
  }
  return out;
}

HermitianSample scale_to_time(const HermitianSample& sample, double t) {
  require(t > 0.0 && t <= 1.0, "scale_to_time: t must lie in (0, 1]");
  HermitianSample out;
  out.master_seed = sample.master_seed;
  out.sample_index = sample.sample_index;
  out.time = sample.time * t;
  out.H = std::sqrt(t) * sample.H;
  return out;
}

}  // namespace bandloop
