#include "core/loops.hpp"

#include <algorithm>
#include <cmath>

namespace bandloop {

LoopSpec rotate(const LoopSpec& spec, int r) {
  const int n = spec.length();
  require(n > 0, "rotate: empty spec");
  require(static_cast<int>(spec.blocks.size()) == n, "rotate: loops only");
  LoopSpec out;
  out.sigma.resize(n);
  out.blocks.resize(n);
  for (int i = 0; i < n; ++i) {
    const int src = (i + r) % n;
    out.sigma[i] = spec.sigma[src];
    out.blocks[i] = spec.blocks[src];
  }
  return out;
}

LoopSpec cut_glue_first(const LoopSpec& spec, int k, int b) {
  const int n = spec.length();
  require(1 <= k && k <= n, "cut_glue_first: k out of range");
  LoopSpec out;
  out.sigma.reserve(n + 1);
  out.blocks.reserve(n + 1);
  for (int i = 1; i <= n; ++i) {
    out.sigma.push_back(spec.sigma[i - 1]);
    if (i == k) {
      out.sigma.push_back(spec.sigma[i - 1]);
      out.blocks.push_back(b);
    }
    out.blocks.push_back(spec.blocks[i - 1]);
  }
  return out;
}

LoopSpec cut_glue_left(const LoopSpec& spec, int k, int l, int b) {
  const int n = spec.length();
  require(1 <= k && k < l && l <= n, "cut_glue_left: need 1 <= k < l <= n");
  LoopSpec out;
  for (int i = 1; i <= k; ++i) out.sigma.push_back(spec.sigma[i - 1]);
  for (int i = l; i <= n; ++i) out.sigma.push_back(spec.sigma[i - 1]);
  for (int i = 1; i <= k - 1; ++i) out.blocks.push_back(spec.blocks[i - 1]);
  out.blocks.push_back(b);
  for (int i = l; i <= n; ++i) out.blocks.push_back(spec.blocks[i - 1]);
  return out;
}

LoopSpec cut_glue_right(const LoopSpec& spec, int k, int l, int b) {
  const int n = spec.length();
  require(1 <= k && k < l && l <= n, "cut_glue_right: need 1 <= k < l <= n");
  LoopSpec out;
  for (int i = k; i <= l; ++i) out.sigma.push_back(spec.sigma[i - 1]);
  for (int i = k; i <= l - 1; ++i) out.blocks.push_back(spec.blocks[i - 1]);
  out.blocks.push_back(b);
  return out;
}

ResolventCache::ResolventCache(const BandModel& model, const HermitianSample& sample)
    : model_(model),
      time_(sample.time),
      master_seed_(sample.master_seed),
      sample_index_(sample.sample_index) {
  require(sample.H.rows() == model.dimension() && sample.H.cols() == model.dimension(),
          "resolvent cache: sample dimension does not match model");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sample.H);
  if (solver.info() != Eigen::Success) {
    throw NumericError("resolvent cache: Hermitian eigendecomposition failed");
  }
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
}

std::shared_ptr<const Eigen::MatrixXcd> ResolventCache::resolvent(Complex z) const {
  require(z.imag() != 0.0, "resolvent: z must not be real");
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    for (const auto& [key, mat] : assembled_) {
      if (key == z) return mat;
    }
  }
  const long N = model_.dimension();
  Eigen::VectorXcd weights(N);
  for (long k = 0; k < N; ++k) weights(k) = 1.0 / (eigenvalues_(k) - z);
  auto G = std::make_shared<Eigen::MatrixXcd>(eigenvectors_ * weights.asDiagonal() *
                                              eigenvectors_.adjoint());
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    for (const auto& [key, mat] : assembled_) {
      if (key == z) return mat;  // lost a race; reuse the first assembly
    }
    assembled_.emplace_back(z, G);
    if (assembled_.size() > kMaxAssembled) assembled_.pop_front();
  }
  return G;
}

Eigen::MatrixXcd ResolventCache::resolvent_block(Complex z, int a, int b) const {
  const int W = model_.block_size();
  const int L = model_.block_count();
  require(a >= 0 && a < L && b >= 0 && b < L, "resolvent block: block index out of range");
  if (z.imag() > 0.0) {
    auto G = resolvent(z);
    return G->block(static_cast<long>(a) * W, static_cast<long>(b) * W, W, W);
  }
  // G(conj z) = G(z)^dagger, so the (a, b) block is the adjoint of (b, a).
  auto G = resolvent(std::conj(z));
  return G->block(static_cast<long>(b) * W, static_cast<long>(a) * W, W, W).adjoint();
}

namespace {

Complex charge_parameter(const SpectralPoint& point, Charge c) {
  return c == Charge::Plus ? point.z : std::conj(point.z);
}

}  // namespace

Complex g_loop(const ResolventCache& cache, const SpectralPoint& point, const LoopSpec& spec) {
  const int n = spec.length();
  require(n >= 1, "g_loop: empty word");
  require(static_cast<int>(spec.blocks.size()) == n, "g_loop: block word length mismatch");
  const int W = cache.model().block_size();
  const int L = cache.model().block_count();
  for (int a : spec.blocks) require(a >= 0 && a < L, "g_loop: block index out of range");

  if (n == 1) {
    // Partial trace of G over one block.
    const Eigen::MatrixXcd blockM =
        cache.resolvent_block(charge_parameter(point, spec.sigma[0]), spec.blocks[0], spec.blocks[0]);
    return blockM.trace() / static_cast<double>(W);
  }

  // Chain of W x W blocks; B_k connects block a_{k-1} to a_k (a_0 = a_n).
  Eigen::MatrixXcd prod = cache.resolvent_block(charge_parameter(point, spec.sigma[0]),
                                                spec.blocks[n - 1], spec.blocks[0]);
  for (int k = 1; k < n; ++k) {
    prod = prod * cache.resolvent_block(charge_parameter(point, spec.sigma[k]),
                                        spec.blocks[k - 1], spec.blocks[k]);
  }
  return prod.trace() * std::pow(static_cast<double>(W), -n);
}

Complex g_chain_entry(const ResolventCache& cache, const SpectralPoint& point,
                      const LoopSpec& spec, long i, long j) {
  const int n = spec.length();
  require(n >= 1, "g_chain_entry: empty word");
  require(static_cast<int>(spec.blocks.size()) == n - 1, "g_chain_entry: chain needs n-1 blocks");
  const long N = cache.model().dimension();
  require(i >= 0 && i < N && j >= 0 && j < N, "g_chain_entry: entry index out of range");
  const int W = cache.model().block_size();

  if (n == 1) {
    auto G = cache.resolvent(point.z);
    return spec.sigma[0] == Charge::Plus ? (*G)(i, j) : std::conj((*G)(j, i));
  }

  auto entry_of = [&](const Eigen::MatrixXcd& G, Charge c, long r, long col) {
    return c == Charge::Plus ? G(r, col) : std::conj(G(col, r));
  };
  auto G = cache.resolvent(point.z);

  // Row of the first resolvent restricted to I_{a_1}.
  Eigen::RowVectorXcd vec(W);
  long base = static_cast<long>(spec.blocks[0]) * W;
  for (int c = 0; c < W; ++c) vec(c) = entry_of(*G, spec.sigma[0], i, base + c);

  for (int k = 1; k + 1 < n; ++k) {
    const long rbase = static_cast<long>(spec.blocks[k - 1]) * W;
    const long cbase = static_cast<long>(spec.blocks[k]) * W;
    Eigen::RowVectorXcd next = Eigen::RowVectorXcd::Zero(W);
    for (int c = 0; c < W; ++c) {
      Complex acc(0.0, 0.0);
      for (int r = 0; r < W; ++r)
        acc += vec(r) * entry_of(*G, spec.sigma[k], rbase + r, cbase + c);
      next(c) = acc;
    }
    vec = next;
  }

  const long rbase = static_cast<long>(spec.blocks[n - 2]) * W;
  Complex acc(0.0, 0.0);
  for (int r = 0; r < W; ++r) acc += vec(r) * entry_of(*G, spec.sigma[n - 1], rbase + r, j);
  return acc * std::pow(static_cast<double>(W), -(n - 1));
}

}  // namespace bandloop
