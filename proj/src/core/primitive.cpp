#include "core/primitive.hpp"

#include <algorithm>
#include <cmath>

#include "core/loops.hpp"

namespace bandloop {

namespace {

int kernel_slot(Charge a, Charge b) {
  if (a == b) return a == Charge::Plus ? 0 : 2;
  return 1;
}

}  // namespace

PrimitiveEvaluator::PrimitiveEvaluator(const BandModel& model, double E, double t)
    : model_(model), E_(E), t_(t), m_(boundary_m(E)) {
  require(t >= 0.0 && t < 1.0, "primitive evaluator: t must lie in [0, 1)");
  const int L = model.block_count();
  // Charge products take three values: m^2, |m|^2 = 1, conj(m)^2.
  const Complex products[3] = {m_ * m_, Complex(1.0, 0.0), std::conj(m_) * std::conj(m_)};
  for (const Complex& p : products) kernels_.push_back(theta_kernel(t * p, L));
}

const CirculantKernel& PrimitiveEvaluator::theta(Charge a, Charge b) const {
  return kernels_[kernel_slot(a, b)];
}

const std::vector<PartitionTree>& PrimitiveEvaluator::trees_for(int n) const {
  std::lock_guard<std::mutex> lock(tree_mutex_);
  auto it = trees_.find(n);
  if (it != trees_.end()) return it->second;
  std::vector<PartitionTree> built;
  for (const ChordSet& chords : enumerate_noncrossing(n)) {
    built.push_back(build_partition_tree(n, chords));
  }
  return trees_.emplace(n, std::move(built)).first->second;
}

Complex PrimitiveEvaluator::tree_weight(const PartitionTree& tree, const SignWord& sigma,
                                        const std::vector<int>& blocks) const {
  const int n = tree.n;
  require(static_cast<int>(sigma.size()) == n && static_cast<int>(blocks.size()) == n,
          "tree_weight: word lengths must match the tree");
  const int L = model_.block_count();

  if (n == 2) {
    // Two regions share one boundary curve between the two vertices.
    return theta(sigma[0], sigma[1]).at(static_cast<long>(blocks[0]) - blocks[1]);
  }

  std::vector<std::vector<PartitionTree::InternalEdge>> children(tree.face_count);
  for (const auto& e : tree.internal_edges) children[e.outer_face].push_back(e);

  // Bottom-up messages over the face tree; faces are vectors over Z_L.
  auto message = [&](auto&& self, int face) -> Eigen::VectorXcd {
    Eigen::VectorXcd M = Eigen::VectorXcd::Ones(L);
    for (int v = 1; v <= n; ++v) {
      if (tree.face_of_vertex[v - 1] != face) continue;
      const CirculantKernel& th = theta(sigma[v - 1], sigma[v % n]);
      for (int x = 0; x < L; ++x) M(x) *= th.at(static_cast<long>(blocks[v - 1]) - x);
    }
    for (const auto& e : children[face]) {
      const Eigen::VectorXcd child = self(self, e.inner_face);
      const Chord& c = tree.chords[e.chord_index];
      const CirculantKernel& th = theta(sigma[c.i - 1], sigma[c.j - 1]);
      for (int x = 0; x < L; ++x) {
        Complex acc(0.0, 0.0);
        for (int y = 0; y < L; ++y) {
          long d = (static_cast<long>(x) - y) % L;
          if (d < 0) d += L;
          acc += (th.at(d) - (d == 0 ? 1.0 : 0.0)) * child(y);
        }
        M(x) *= acc;
      }
    }
    return M;
  };

  return message(message, 0).sum();
}

Complex PrimitiveEvaluator::k_loop(const SignWord& sigma, const std::vector<int>& blocks) const {
  const int n = static_cast<int>(sigma.size());
  require(n >= 1, "k_loop: empty word");
  require(static_cast<int>(blocks.size()) == n, "k_loop: block word length mismatch");
  const int L = model_.block_count();
  for (int a : blocks) require(a >= 0 && a < L, "k_loop: block index out of range");
  const double W = model_.block_size();

  if (n == 1) return charge_m(m_, sigma[0]);

  auto mval = [&](int i) { return charge_m(m_, sigma[i]); };

  if (n == 2) {
    return mval(0) * mval(1) / W * theta(sigma[0], sigma[1]).at(static_cast<long>(blocks[0]) - blocks[1]);
  }
  if (n == 3) {
    const CirculantKernel& t12 = theta(sigma[0], sigma[1]);
    const CirculantKernel& t23 = theta(sigma[1], sigma[2]);
    const CirculantKernel& t31 = theta(sigma[2], sigma[0]);
    Complex acc(0.0, 0.0);
    for (int b = 0; b < L; ++b) {
      acc += t12.at(static_cast<long>(blocks[0]) - b) * t23.at(static_cast<long>(blocks[1]) - b) *
             t31.at(static_cast<long>(blocks[2]) - b);
    }
    return mval(0) * mval(1) * mval(2) / (W * W) * acc;
  }
  return k_loop_tree_sum(sigma, blocks);
}

Complex PrimitiveEvaluator::k_loop_tree_sum(const SignWord& sigma,
                                            const std::vector<int>& blocks) const {
  const int n = static_cast<int>(sigma.size());
  require(n >= 2, "k_loop_tree_sum: need n >= 2");
  require(static_cast<int>(blocks.size()) == n, "k_loop_tree_sum: block word length mismatch");
  Complex prefactor(1.0, 0.0);
  for (int i = 0; i < n; ++i) prefactor *= charge_m(m_, sigma[i]);
  prefactor *= std::pow(model_.block_size(), -(n - 1));
  Complex acc(0.0, 0.0);
  for (const PartitionTree& tree : trees_for(n)) acc += tree_weight(tree, sigma, blocks);
  return prefactor * acc;
}

namespace {

ChordSet long_chords(const PartitionTree& tree, const SignWord& sigma) {
  ChordSet out;
  for (const Chord& c : tree.chords) {
    if (sigma[c.i - 1] != sigma[c.j - 1]) out.push_back(c);
  }
  return out;
}

}  // namespace

Complex PrimitiveEvaluator::k_loop_pi(const SignWord& sigma, const std::vector<int>& blocks,
                                      const ChordSet& pi) const {
  const int n = static_cast<int>(sigma.size());
  require(n >= 2, "k_loop_pi: need n >= 2");
  require(static_cast<int>(blocks.size()) == n, "k_loop_pi: block word length mismatch");
  require(is_noncrossing(pi), "k_loop_pi: pi contains a crossing pair");
  ChordSet want = pi;
  std::sort(want.begin(), want.end());
  Complex acc(0.0, 0.0);
  for (const PartitionTree& tree : trees_for(n)) {
    if (long_chords(tree, sigma) == want) acc += tree_weight(tree, sigma, blocks);
  }
  return acc;
}

Complex PrimitiveEvaluator::self_energy_empty(const SignWord& sigma,
                                              const std::vector<int>& d) const {
  const int n = static_cast<int>(sigma.size());
  require(n >= 2 && n <= 6, "self_energy_empty: implemented for 2 <= n <= 6");
  require(static_cast<int>(d.size()) == n, "self_energy_empty: attachment word length mismatch");
  const int L = model_.block_count();

  Complex total(0.0, 0.0);
  for (const PartitionTree& tree : trees_for(n)) {
    if (!long_chords(tree, sigma).empty()) continue;

    // Face deltas: vertices of a face share one attachment value.
    bool compatible = true;
    std::vector<int> face_value(static_cast<std::size_t>(tree.face_count), -1);
    for (int v = 1; v <= n && compatible; ++v) {
      int& fv = face_value[tree.face_of_vertex[v - 1]];
      if (fv < 0)
        fv = d[v - 1];
      else if (fv != d[v - 1])
        compatible = false;
    }
    if (!compatible) continue;

    if (tree.chords.empty()) {
      total += 1.0;
      continue;
    }

    std::vector<std::vector<PartitionTree::InternalEdge>> children(tree.face_count);
    for (const auto& e : tree.internal_edges) children[e.outer_face].push_back(e);

    // Same message passing as tree_weight, but boundary kernels are stripped:
    // a face with vertices is pinned to its attachment value, a vertex-free
    // face is summed out.
    auto message = [&](auto&& self, int face) -> Eigen::VectorXcd {
      Eigen::VectorXcd M;
      if (face_value[face] >= 0) {
        M = Eigen::VectorXcd::Zero(L);
        M(face_value[face]) = 1.0;
      } else {
        M = Eigen::VectorXcd::Ones(L);
      }
      for (const auto& e : children[face]) {
        const Eigen::VectorXcd child = self(self, e.inner_face);
        const Chord& c = tree.chords[e.chord_index];
        const CirculantKernel& th = theta(sigma[c.i - 1], sigma[c.j - 1]);
        for (int x = 0; x < L; ++x) {
          Complex acc(0.0, 0.0);
          for (int y = 0; y < L; ++y) {
            long dd = (static_cast<long>(x) - y) % L;
            if (dd < 0) dd += L;
            acc += (th.at(dd) - (dd == 0 ? 1.0 : 0.0)) * child(y);
          }
          M(x) *= acc;
        }
      }
      return M;
    };

    total += message(message, 0).sum();
  }
  return total;
}

Complex k_loop(const BandModel& model, double E, double t, const SignWord& sigma,
               const std::vector<int>& blocks) {
  return PrimitiveEvaluator(model, E, t).k_loop(sigma, blocks);
}

Complex k_loop_pi(const BandModel& model, double E, double t, const SignWord& sigma,
                  const std::vector<int>& blocks, const ChordSet& pi) {
  return PrimitiveEvaluator(model, E, t).k_loop_pi(sigma, blocks, pi);
}

Complex self_energy_empty(double E, double t, const SignWord& sigma, const std::vector<int>& d,
                          int L) {
  BandModel model(1, L);
  return PrimitiveEvaluator(model, E, t).self_energy_empty(sigma, d);
}

unsigned sign_word_mask(const SignWord& sigma) {
  unsigned mask = 0;
  for (std::size_t p = 0; p < sigma.size(); ++p) {
    if (sigma[p] == Charge::Minus) mask |= (1u << p);
  }
  return mask;
}

SignWord sign_word_from_mask(int n, unsigned mask) {
  SignWord sigma(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) sigma[p] = (mask >> p) & 1u ? Charge::Minus : Charge::Plus;
  return sigma;
}

const BlockTensor& PrimitiveOdeResult::tensor(const SignWord& sigma) const {
  const auto key = std::make_pair(static_cast<int>(sigma.size()), sign_word_mask(sigma));
  auto it = tensors.find(key);
  require(it != tensors.end(), "ode result: word length outside the solved range");
  return it->second;
}

namespace {

/// Precomputed index algebra for one (k, l) cut of one charge word.
struct PairPlan {
  int nL = 0, nR = 0;
  unsigned maskL = 0, maskR = 0;
  std::vector<int> gatherL;  // per left leg: source leg in the target word, -1 = summed leg
  std::vector<int> gatherR;
};

struct WordPlan {
  int n = 0;
  unsigned mask = 0;
  std::vector<PairPlan> pairs;
};

struct Layout {
  int n_max = 0, L = 0;
  std::vector<std::pair<int, unsigned>> keys;  // (n, mask) in deterministic order
  std::map<std::pair<int, unsigned>, std::size_t> offset;
  std::size_t total = 0;
};

Layout make_layout(int n_max, int L) {
  Layout lay;
  lay.n_max = n_max;
  lay.L = L;
  for (int n = 2; n <= n_max; ++n) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      lay.keys.emplace_back(n, mask);
      lay.offset[{n, mask}] = lay.total;
      lay.total += BlockTensor::flat_size(n, L);
    }
  }
  return lay;
}

std::vector<WordPlan> make_plans(int n_max) {
  std::vector<WordPlan> plans;
  for (int n = 2; n <= n_max; ++n) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      WordPlan wp;
      wp.n = n;
      wp.mask = mask;
      LoopSpec probe;
      probe.sigma = sign_word_from_mask(n, mask);
      probe.blocks.resize(static_cast<std::size_t>(n));
      for (int p = 0; p < n; ++p) probe.blocks[p] = p;  // positions as block values
      for (int k = 1; k < n; ++k) {
        for (int l = k + 1; l <= n; ++l) {
          const LoopSpec left = cut_glue_left(probe, k, l, -1);
          const LoopSpec right = cut_glue_right(probe, k, l, -1);
          PairPlan pp;
          pp.nL = left.length();
          pp.nR = right.length();
          // The cut-and-glue algebra never produces words shorter than 2.
          require(pp.nL >= 2 && pp.nR >= 2, "ode plan: unexpected short word");
          require(pp.nL <= n && pp.nR <= n, "ode plan: unexpected long word");
          pp.maskL = sign_word_mask(left.sigma);
          pp.maskR = sign_word_mask(right.sigma);
          pp.gatherL = left.blocks;
          pp.gatherR = right.blocks;
          require(pp.gatherR.back() == -1, "ode plan: right glue leg must be last");
          wp.pairs.push_back(std::move(pp));
        }
      }
      plans.push_back(std::move(wp));
    }
  }
  return plans;
}

using State = std::vector<Complex>;

/// Nearest-neighbor averaging (the block profile) applied to one leg.
void apply_profile_on_leg(const Complex* in, Complex* out, int legs, int leg, int L) {
  const std::size_t size = BlockTensor::flat_size(legs, L);
  std::size_t stride = 1;
  for (int p = legs - 1; p > leg; --p) stride *= static_cast<std::size_t>(L);
  const std::size_t span = stride * static_cast<std::size_t>(L);
  for (std::size_t base = 0; base < size; base += span) {
    for (std::size_t inner = 0; inner < stride; ++inner) {
      for (int x = 0; x < L; ++x) {
        const int xm = (x + L - 1) % L;
        const int xp = (x + 1) % L;
        out[base + inner + stride * static_cast<std::size_t>(x)] =
            (in[base + inner + stride * static_cast<std::size_t>(xm)] +
             in[base + inner + stride * static_cast<std::size_t>(x)] +
             in[base + inner + stride * static_cast<std::size_t>(xp)]) /
            3.0;
      }
    }
  }
}

class HierarchyRhs {
 public:
  HierarchyRhs(const Layout& lay, const std::vector<WordPlan>& plans, double W)
      : lay_(lay), plans_(plans), W_(W) {
    // Scratch for the profile-contracted left tensors.
    std::size_t largest = 0;
    for (int n = 2; n <= lay.n_max; ++n)
      largest = std::max(largest, BlockTensor::flat_size(n, lay.L));
    scratch_.resize(largest);
  }

  void operator()(const State& y, State& dy) {
    const int L = lay_.L;
    std::fill(dy.begin(), dy.end(), Complex(0.0, 0.0));
    for (const WordPlan& wp : plans_) {
      const int n = wp.n;
      Complex* out = dy.data() + lay_.offset.at({n, wp.mask});
      std::vector<int> word(static_cast<std::size_t>(n), 0);
      for (const PairPlan& pp : wp.pairs) {
        const Complex* KL = y.data() + lay_.offset.at({pp.nL, pp.maskL});
        const Complex* KR = y.data() + lay_.offset.at({pp.nR, pp.maskR});
        int legL = 0;
        while (pp.gatherL[static_cast<std::size_t>(legL)] != -1) ++legL;
        apply_profile_on_leg(KL, scratch_.data(), pp.nL, legL, L);

        // Strides of the summed leg and bases gathered from the target word.
        std::size_t strideL = 1;
        for (int p = pp.nL - 1; p > legL; --p) strideL *= static_cast<std::size_t>(L);

        std::fill(word.begin(), word.end(), 0);
        std::size_t flat = 0;
        const std::size_t total = BlockTensor::flat_size(n, L);
        for (; flat < total; ++flat) {
          std::size_t baseL = 0;
          for (int p = 0; p < pp.nL; ++p) {
            const int g = pp.gatherL[static_cast<std::size_t>(p)];
            baseL = baseL * L + (g < 0 ? 0 : static_cast<std::size_t>(word[g]));
          }
          std::size_t baseR = 0;
          for (int p = 0; p < pp.nR; ++p) {
            const int g = pp.gatherR[static_cast<std::size_t>(p)];
            baseR = baseR * L + (g < 0 ? 0 : static_cast<std::size_t>(word[g]));
          }
          Complex acc(0.0, 0.0);
          for (int x = 0; x < L; ++x) {
            acc += scratch_[baseL + strideL * static_cast<std::size_t>(x)] *
                   KR[baseR + static_cast<std::size_t>(x)];
          }
          out[flat] += W_ * acc;

          for (int p = n - 1; p >= 0; --p) {
            if (++word[p] < L) break;
            word[p] = 0;
          }
        }
      }
    }
  }

 private:
  const Layout& lay_;
  const std::vector<WordPlan>& plans_;
  double W_;
  std::vector<Complex> scratch_;
};

State initial_state(const Layout& lay, double W, Complex m) {
  State y(lay.total, Complex(0.0, 0.0));
  for (const auto& key : lay.keys) {
    const int n = key.first;
    const SignWord sigma = sign_word_from_mask(n, key.second);
    Complex value = std::pow(W, -(n - 1));
    for (Charge c : sigma) value *= charge_m(m, c);
    const std::size_t off = lay.offset.at(key);
    // Delta initial data: all block indices equal.
    std::size_t stride_sum = 0;
    std::size_t stride = 1;
    for (int p = 0; p < n; ++p) {
      stride_sum += stride;
      stride *= static_cast<std::size_t>(lay.L);
    }
    for (int a = 0; a < lay.L; ++a) y[off + stride_sum * static_cast<std::size_t>(a)] = value;
  }
  return y;
}

State integrate(const Layout& lay, const std::vector<WordPlan>& plans, double W, Complex m,
                double t_final, double h) {
  HierarchyRhs rhs(lay, plans, W);
  State y = initial_state(lay, W, m);
  State k1(lay.total), k2(lay.total), k3(lay.total), k4(lay.total), tmp(lay.total);

  double t = 0.0;
  while (t < t_final - 1e-13) {
    const double step = std::min(h, t_final - t);
    rhs(y, k1);
    for (std::size_t i = 0; i < lay.total; ++i) tmp[i] = y[i] + 0.5 * step * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < lay.total; ++i) tmp[i] = y[i] + 0.5 * step * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < lay.total; ++i) tmp[i] = y[i] + step * k3[i];
    rhs(tmp, k4);
    for (std::size_t i = 0; i < lay.total; ++i) {
      y[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    t += step;
  }
  return y;
}

}  // namespace

PrimitiveOdeResult primitive_ode_solve(const BandModel& model, double E, double t_final,
                                       int n_max, double step) {
  require(t_final > 0.0 && t_final <= 1.0 - 1e-3, "ode: t_final must lie in (0, 1 - 1e-3]");
  require(step > 0.0 && step <= 0.1, "ode: step must lie in (0, 0.1]");
  require(n_max >= 2 && n_max <= 5, "ode: n_max must lie in [2, 5]");
  const int L = model.block_count();
  const double budget = std::pow(static_cast<double>(L), n_max + 1) * std::pow(2.0, n_max);
  require(budget <= 5e7, "ode: L^(n_max+1) 2^n_max too large for the oracle");

  const Layout lay = make_layout(n_max, L);
  const std::vector<WordPlan> plans = make_plans(n_max);
  const Complex m = boundary_m(E);
  const double W = model.block_size();

  const State full = integrate(lay, plans, W, m, t_final, step);
  const State half = integrate(lay, plans, W, m, t_final, step / 2.0);

  PrimitiveOdeResult result;
  result.n_max = n_max;
  result.L = L;
  result.E = E;
  result.t_final = t_final;
  result.step = step;

  double worst_gap = 0.0;
  for (const auto& key : lay.keys) {
    const std::size_t off = lay.offset.at(key);
    const std::size_t size = BlockTensor::flat_size(key.first, L);
    BlockTensor tensor(key.first, L);
    double gap = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
      tensor.flat(i) = half[off + i];
      gap = std::max(gap, std::abs(full[off + i] - half[off + i]));
      scale = std::max(scale, std::abs(half[off + i]));
    }
    worst_gap = std::max(worst_gap, gap / std::max(scale, 1e-300));
    result.tensors.emplace(key, std::move(tensor));
  }
  result.convergence_gap = worst_gap;
  result.converged = worst_gap < 1e-6;
  return result;
}

}  // namespace bandloop
