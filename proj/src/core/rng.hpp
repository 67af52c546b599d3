#pragma once

#include <cstdint>
#include <random>

namespace bandloop {

/// SplitMix64 step (Steele/Lea/Flood). Used both as a mixer and to derive
/// independent per-sample streams from (master seed, sample index).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Stream seed for sample `index` under `master`. Documented contract: the
/// stream depends only on (master, index), never on draw order across
/// samples, so parallel and serial runs agree.
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s = a ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
  std::uint64_t b = splitmix64(s);
  return b;
}

/// Deterministic Gaussian stream backed by mt19937_64 seeded via SplitMix64.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t stream_seed) : engine_(stream_seed) {}

  GaussianStream(std::uint64_t master, std::uint64_t index)
      : engine_(derive_stream_seed(master, index)) {}

  double next() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace bandloop
