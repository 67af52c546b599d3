#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/circulant.hpp"
#include "core/diagnostics.hpp"
#include "core/primitive.hpp"

using namespace bandloop;

TEST_CASE("tree weights at t = 0: star is a delta, chords kill the weight") {
  BandModel model(1, 6);
  PrimitiveEvaluator eval(model, 0.3, 0.0);
  const SignWord sigma = parse_sign_word("+-+-");
  const PartitionTree star = build_partition_tree(4, {});
  CHECK(std::abs(eval.tree_weight(star, sigma, {2, 2, 2, 2}) - 1.0) < 1e-12);
  CHECK(std::abs(eval.tree_weight(star, sigma, {2, 2, 3, 2})) < 1e-12);
  const PartitionTree chord = build_partition_tree(4, {{1, 3}});
  CHECK(std::abs(eval.tree_weight(chord, sigma, {1, 1, 4, 4})) < 1e-12);
}

TEST_CASE("closed forms and the tree sum agree for n = 2 and 3") {
  BandModel model(3, 5);
  for (double E : {0.0, 0.8}) {
    for (double t : {0.2, 0.6}) {
      PrimitiveEvaluator eval(model, E, t);
      for (int n : {2, 3}) {
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
          const SignWord sigma = sign_word_from_mask(n, mask);
          std::vector<int> word(n, 0);
          BlockTensor probe(n, 5);
          do {
            const Complex closed = eval.k_loop(sigma, word);
            const Complex tree = eval.k_loop_tree_sum(sigma, word);
            CHECK(std::abs(closed - tree) < 1e-12 * std::max(1.0, std::abs(closed)));
          } while (probe.next_word(word));
        }
      }
    }
  }
}

TEST_CASE("primitive loop at t = 0 is the normalized delta") {
  BandModel model(4, 6);
  PrimitiveEvaluator eval(model, 0.5, 0.0);
  const SignWord sigma = parse_sign_word("+-+");
  Complex prod(1.0, 0.0);
  for (Charge c : sigma) prod *= charge_m(eval.boundary(), c);
  const Complex equal = eval.k_loop(sigma, {3, 3, 3});
  CHECK(std::abs(equal - prod / 16.0) < 1e-12);  // W^{-n+1} = 1/16
  CHECK(std::abs(eval.k_loop(sigma, {3, 3, 4})) < 1e-12);
}

TEST_CASE("n = 2 closed value at L = 3 from the all-ones propagator") {
  BandModel model(5, 3);
  PrimitiveEvaluator eval(model, 0.0, 0.5);
  const Complex diag = eval.k_loop(parse_sign_word("+-"), {1, 1});
  CHECK(std::abs(diag - Complex(4.0 / 3.0 / 5.0, 0.0)) < 1e-12);
}

TEST_CASE("n = 1 loops are the boundary constants") {
  BandModel model(4, 6);
  PrimitiveEvaluator eval(model, 0.7, 0.9);
  CHECK(std::abs(eval.k_loop(parse_sign_word("+"), {0}) - boundary_m(0.7)) < 1e-15);
  CHECK(std::abs(eval.k_loop(parse_sign_word("-"), {5}) - std::conj(boundary_m(0.7))) < 1e-15);
}

TEST_CASE("primitive loops are translation invariant") {
  BandModel model(2, 7);
  PrimitiveEvaluator eval(model, 0.4, 0.65);
  const SignWord sigma = parse_sign_word("++-+");
  const std::vector<int> base = {0, 3, 5, 1};
  const Complex v = eval.k_loop(sigma, base);
  for (int c = 1; c < 7; ++c) {
    std::vector<int> shifted(base);
    for (int& a : shifted) a = (a + c) % 7;
    CHECK(std::abs(eval.k_loop(sigma, shifted) - v) < 1e-13);
  }
}

TEST_CASE("partial tree sums over long-chord classes recombine into the loop") {
  BandModel model(3, 6);
  for (const char* word : {"+-+-", "++--", "++++", "+--+"}) {
    const SignWord sigma = parse_sign_word(word);
    PrimitiveEvaluator eval(model, 0.3, 0.55);
    Complex prefactor(1.0, 0.0);
    for (Charge c : sigma) prefactor *= charge_m(eval.boundary(), c);
    prefactor /= 9.0;  // W^{-n+1} = 3^{-3} * ... keep explicit below

    const std::vector<int> blocks = {0, 2, 3, 5};
    Complex total(0.0, 0.0);
    for (const ChordSet& pi : enumerate_noncrossing(4)) {
      total += eval.k_loop_pi(sigma, blocks, pi);
    }
    const Complex expected = eval.k_loop(sigma, blocks);
    const Complex recombined =
        total * prefactor / 3.0;  // together: m_sigma W^{-3} with W = 3
    CHECK(std::abs(recombined - expected) < 1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("long-chord classes vanish when the charges cannot pair") {
  BandModel model(3, 6);
  PrimitiveEvaluator eval(model, 0.3, 0.55);
  // Same-charge words have no long chords at all.
  CHECK(std::abs(eval.k_loop_pi(parse_sign_word("++++"), {0, 1, 2, 3}, {{1, 3}})) == 0.0);
  // For the alternating word the chord {1,3} joins equal charges: short.
  CHECK(std::abs(eval.k_loop_pi(parse_sign_word("+-+-"), {0, 1, 2, 3}, {{1, 3}})) == 0.0);
  CHECK_THROWS_AS(eval.k_loop_pi(parse_sign_word("+-+-"), {0, 1, 2, 3}, {{1, 3}, {2, 4}}),
                  InvalidArgument);
}

TEST_CASE("self-energy with no long chords: worked length-4 values") {
  const double t = 0.45;
  const double E = 0.3;
  const int L = 8;
  const SignWord alt = alternating_word(4);
  const Complex m = boundary_m(E);
  const CirculantKernel theta_pp = theta_kernel(t * m * m, L);
  const CirculantKernel theta_mm = theta_kernel(t * std::conj(m) * std::conj(m), L);

  // Split attachments: only the {1,3} chord survives the face deltas.
  const Complex split = self_energy_empty(E, t, alt, {0, 0, 1, 1}, L);
  CHECK(std::abs(split - (theta_pp.at(1) - 0.0)) < 1e-12);

  // Equal attachments: star and both short chords contribute.
  const Complex equal = self_energy_empty(E, t, alt, {2, 2, 2, 2}, L);
  const Complex expected = 1.0 + (theta_pp.at(0) - 1.0) + (theta_mm.at(0) - 1.0);
  CHECK(std::abs(equal - expected) < 1e-12);
}

TEST_CASE("self-energy reconstructs the no-long-chord class through propagators") {
  const double t = 0.5;
  const double E = 0.0;
  const int L = 6;
  BandModel model(1, L);
  PrimitiveEvaluator eval(model, E, t);
  const SignWord alt = alternating_word(4);

  // K^(empty)(a) = sum_d Sigma^(empty)(d) prod_i Theta_{t m_i m_{i+1}}(a_i - d_i);
  // alternating charges make every boundary product equal t.
  const CirculantKernel theta_t = theta_kernel(Complex(t, 0.0), L);
  const std::vector<std::vector<int>> words = {{0, 0, 0, 0}, {0, 1, 2, 3}, {2, 5, 1, 4}};
  for (const auto& a : words) {
    Complex recon(0.0, 0.0);
    std::vector<int> d(4, 0);
    BlockTensor probe(4, L);
    do {
      Complex boundary(1.0, 0.0);
      for (int i = 0; i < 4; ++i) boundary *= theta_t.at(a[i] - d[i]);
      recon += eval.self_energy_empty(alt, d) * boundary;
    } while (probe.next_word(d));
    const Complex direct = eval.k_loop_pi(alt, a, {});
    CHECK(std::abs(recon - direct) < 1e-10 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("alternating self-energy mass reduces to the geometric closed form") {
  std::vector<double> grid;
  for (int i = 1; i <= 9; ++i) grid.push_back(0.1 * i);
  for (double E : {0.0, 1.0}) {
    const auto scan = sum_zero_scan(E, grid, 16);
    for (const auto& p : scan) {
      CHECK(p.abs_error < 1e-12);
      if (E == 0.0) CHECK(std::abs(p.value) <= 2.0 * (1.0 - p.t));
      // Normalized form equals one across the grid.
      const Complex m2 = boundary_m(E) * boundary_m(E);
      const Complex normalized = p.value * std::norm(1.0 - p.t * m2) / (1.0 - p.t * p.t);
      CHECK(std::abs(normalized - 1.0) < 1e-10);
    }
  }
  // Spot value from the closed reduction at t = 0.9, E = 0.
  const auto spot = sum_zero_scan(0.0, {0.9}, 16);
  CHECK(spot[0].value.real() == doctest::Approx(0.19 / 3.61).epsilon(1e-10));
  // t = 0 keeps only the all-equal delta.
  const auto zero = sum_zero_scan(0.0, {0.0}, 16);
  CHECK(std::abs(zero[0].value - 1.0) < 1e-12);
}

TEST_CASE("Ward identity for primitive loops") {
  BandModel model(4, 8);
  for (double t : {0.3, 0.7}) {
    PrimitiveEvaluator eval(model, 0.0, t);

    // n = 2: the summed loop has the exact closed value 1/(W(1-t)).
    const WardCheck two = ward_check_k(eval, parse_sign_word("+-"), {3});
    CHECK(two.residual < 1e-12);
    CHECK(std::abs(two.lhs - 1.0 / (4.0 * (1.0 - t))) < 1e-12);

    // n = 3 and 4, all interior charge choices, a few prefixes.
    for (const char* word : {"+--", "++-", "+-+-", "++--", "+++-"}) {
      const SignWord sigma = parse_sign_word(word);
      const int n = static_cast<int>(sigma.size());
      const std::vector<std::vector<int>> prefixes =
          n == 3 ? std::vector<std::vector<int>>{{0, 0}, {1, 5}, {3, 2}}
                 : std::vector<std::vector<int>>{{0, 0, 0}, {1, 4, 6}, {7, 2, 2}};
      for (const auto& prefix : prefixes) {
        CHECK(ward_check_k(eval, sigma, prefix).residual < 1e-10);
      }
    }
  }
}

TEST_CASE("pure loops decay exponentially in the block spread") {
  BandModel model(1, 32);
  PrimitiveEvaluator eval(model, 0.0, 0.9);
  const SignWord sigma = parse_sign_word("++++");
  std::vector<double> xs, ys;
  for (int d = 0; d <= 8; ++d) {
    const Complex v = eval.k_loop(sigma, {0, 0, 0, d});
    xs.push_back(double(d));
    ys.push_back(std::log(std::abs(v)));
  }
  const LineFit fit = fit_line(xs, ys);
  CHECK(fit.slope <= -0.2);
}

TEST_CASE("magnitude bound against the loop scale") {
  const int L = 32;
  BandModel model(1, L);
  for (double t : {0.9, 0.99}) {
    const double eta = 1.0 - t;  // E = 0
    const double ell = std::min(1.0 / std::sqrt(1.0 - t), double(L));
    PrimitiveEvaluator eval(model, 0.0, t);
    for (int n : {2, 3, 4}) {
      const SignWord sigma = alternating_word(n);
      double worst = 0.0;
      // Translation invariance: pin the first block.
      std::vector<int> word(n, 0);
      BlockTensor probe(n - 1, L);
      std::vector<int> tail(n - 1, 0);
      do {
        for (int i = 1; i < n; ++i) word[i] = tail[i - 1];
        worst = std::max(worst, std::abs(eval.k_loop(sigma, word)));
      } while (probe.next_word(tail));
      CHECK(worst <= 10.0 * std::pow(ell * eta, -(n - 1)));
    }
  }
}

TEST_CASE("block-averaged alternating loops obey the eta-only bound") {
  const int L = 8;
  BandModel model(1, L);
  for (double t : {0.5, 0.9}) {
    for (double E : {0.0, 0.5}) {
      PrimitiveEvaluator eval(model, E, t);
      const double eta = (1.0 - t) * boundary_m(E).imag();
      const SignWord sigma = alternating_word(4);
      Complex sum(0.0, 0.0);
      std::vector<int> word(4, 0);
      BlockTensor probe(4, L);
      do {
        sum += eval.k_loop(sigma, word);
      } while (probe.next_word(word));
      CHECK(std::abs(sum) / L <= 10.0 * std::pow(eta, -3.0));
    }
  }
}

TEST_CASE("hierarchy oracle matches the closed forms and the tree sum") {
  BandModel model(2, 4);
  const double E = 0.2;
  const PrimitiveOdeResult ode = primitive_ode_solve(model, E, 0.5, 4, 2e-3);
  CHECK(ode.converged);
  CHECK(ode.convergence_gap < 1e-6);

  const PrimitiveEvaluator eval(model, E, 0.5);
  for (int n = 2; n <= 4; ++n) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      const SignWord sigma = sign_word_from_mask(n, mask);
      const BlockTensor& got = ode.tensor(sigma);
      double diff = 0.0, scale = 0.0;
      std::vector<int> word(n, 0);
      do {
        const Complex ref = eval.k_loop(sigma, word);
        diff = std::max(diff, std::abs(got.at(word) - ref));
        scale = std::max(scale, std::abs(ref));
      } while (got.next_word(word));
      CHECK(diff / scale < (n == 4 ? 1e-5 : 1e-6));
    }
  }
}

TEST_CASE("oracle rejects out-of-range requests") {
  BandModel model(2, 4);
  CHECK_THROWS_AS(primitive_ode_solve(model, 0.0, 1.0, 4, 1e-3), InvalidArgument);
  CHECK_THROWS_AS(primitive_ode_solve(model, 0.0, 0.5, 1, 1e-3), InvalidArgument);
  CHECK_THROWS_AS(primitive_ode_solve(model, 0.0, 0.5, 4, 0.5), InvalidArgument);
}
