#include "core/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "core/circulant.hpp"

namespace bandloop {

namespace {

double relative_residual(Complex lhs, Complex rhs) {
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  return std::abs(lhs - rhs) / scale;
}

void check_ward_word(const SignWord& sigma, const std::vector<int>& prefix) {
  const int n = static_cast<int>(sigma.size());
  require(n >= 2, "ward check: need word length >= 2");
  require(sigma.front() == Charge::Plus && sigma.back() == Charge::Minus,
          "ward check: requires sigma_1 = + and sigma_n = -");
  require(static_cast<int>(prefix.size()) == n - 1, "ward check: prefix must have n-1 blocks");
}

SignWord reduced_word(const SignWord& sigma, Charge first) {
  SignWord out(sigma.begin(), sigma.end() - 1);
  out.front() = first;
  return out;
}

}  // namespace

WardCheck ward_check_k(const PrimitiveEvaluator& eval, const SignWord& sigma,
                       const std::vector<int>& prefix) {
  check_ward_word(sigma, prefix);
  const int L = eval.model().block_count();
  const double W = eval.model().block_size();
  const double eta_t = (1.0 - eval.time()) * eval.boundary().imag();

  std::vector<int> blocks = prefix;
  blocks.push_back(0);
  Complex lhs(0.0, 0.0);
  for (int an = 0; an < L; ++an) {
    blocks.back() = an;
    lhs += eval.k_loop(sigma, blocks);
  }
  const Complex plus = eval.k_loop(reduced_word(sigma, Charge::Plus), prefix);
  const Complex minus = eval.k_loop(reduced_word(sigma, Charge::Minus), prefix);
  const Complex rhs = (plus - minus) / Complex(0.0, 2.0 * W * eta_t);
  return {lhs, rhs, relative_residual(lhs, rhs)};
}

WardCheck ward_check_loop(const ResolventCache& cache, const SpectralPoint& point,
                          const SignWord& sigma, const std::vector<int>& prefix) {
  check_ward_word(sigma, prefix);
  const int L = cache.model().block_count();
  const double W = cache.model().block_size();

  LoopSpec spec{sigma, prefix};
  spec.blocks.push_back(0);
  Complex lhs(0.0, 0.0);
  for (int an = 0; an < L; ++an) {
    spec.blocks.back() = an;
    lhs += g_loop(cache, point, spec);
  }
  const Complex plus = g_loop(cache, point, {reduced_word(sigma, Charge::Plus), prefix});
  const Complex minus = g_loop(cache, point, {reduced_word(sigma, Charge::Minus), prefix});
  const Complex rhs = (plus - minus) / Complex(0.0, 2.0 * W * point.eta);
  return {lhs, rhs, relative_residual(lhs, rhs)};
}

std::vector<SumZeroPoint> sum_zero_scan(double E, const std::vector<double>& t_grid, int L) {
  const SignWord sigma = alternating_word(4);
  const Complex m = boundary_m(E);
  std::vector<SumZeroPoint> out;
  out.reserve(t_grid.size());
  BandModel model(1, L);
  for (double t : t_grid) {
    PrimitiveEvaluator eval(model, E, t);
    Complex total(0.0, 0.0);
    std::vector<int> d(4, 0);
    // L^{-1} sum_d: translation invariance lets us pin d_1 = 0.
    for (d[1] = 0; d[1] < L; ++d[1])
      for (d[2] = 0; d[2] < L; ++d[2])
        for (d[3] = 0; d[3] < L; ++d[3]) total += eval.self_energy_empty(sigma, d);
    const Complex m2 = m * m;
    const Complex closed = (1.0 - t * t) / std::norm(1.0 - t * m2);
    out.push_back({t, total, closed, std::abs(total - closed)});
  }
  return out;
}

LocalLawSample local_law_residuals(const ResolventCache& cache, const SpectralPoint& point) {
  const auto G = cache.resolvent(point.z);
  const long N = cache.model().dimension();
  const int W = cache.model().block_size();
  const int L = cache.model().block_count();
  const Complex m = point.m;

  LocalLawSample out;
  for (long x = 0; x < N; ++x) {
    for (long y = 0; y < N; ++y) {
      const Complex d = (*G)(x, y) - (x == y ? m : Complex(0.0, 0.0));
      out.entry_max = std::max(out.entry_max, std::abs(d));
    }
  }
  for (int a = 0; a < L; ++a) {
    Complex tr(0.0, 0.0);
    for (int r = 0; r < W; ++r) tr += (*G)(static_cast<long>(a) * W + r, static_cast<long>(a) * W + r);
    out.partial_trace_max = std::max(out.partial_trace_max, std::abs(tr / static_cast<double>(W) - m));
  }
  const double wle = W * point.ell_t * point.eta;
  out.entry_scale = 1.0 / std::sqrt(wle);
  out.trace_scale = 1.0 / wle;
  return out;
}

double one_loop_error(const ResolventCache& cache, const SpectralPoint& point) {
  const auto G = cache.resolvent(point.z);
  const int W = cache.model().block_size();
  const int L = cache.model().block_count();
  double worst = 0.0;
  for (int a = 0; a < L; ++a) {
    Complex tr(0.0, 0.0);
    for (int r = 0; r < W; ++r) tr += (*G)(static_cast<long>(a) * W + r, static_cast<long>(a) * W + r);
    worst = std::max(worst, std::abs(tr / static_cast<double>(W) - point.m));
  }
  return worst;
}

double two_loop_error(const ResolventCache& cache, const SpectralPoint& point) {
  const auto G = cache.resolvent(point.z);
  const int W = cache.model().block_size();
  const int L = cache.model().block_count();
  // Block sums of |G|^2 give every (+,-) two-loop at once.
  Eigen::MatrixXd loop2 = Eigen::MatrixXd::Zero(L, L);
  for (long x = 0; x < cache.model().dimension(); ++x) {
    const int bx = cache.model().block_of(x);
    for (long y = 0; y < cache.model().dimension(); ++y) {
      loop2(cache.model().block_of(y), bx) += std::norm((*G)(x, y));
    }
  }
  loop2 /= static_cast<double>(W) * W;

  const CirculantKernel theta = theta_kernel(point.t, L);
  double worst = 0.0;
  for (int a = 0; a < L; ++a) {
    for (int b = 0; b < L; ++b) {
      const double K = theta.at(static_cast<long>(a) - b).real() / W;
      worst = std::max(worst, std::abs(loop2(a, b) - K));
    }
  }
  return worst;
}

DiffusionLoops diffusion_loops(const ResolventCache& cache, Complex z) {
  const auto G = cache.resolvent(z);
  const int W = cache.model().block_size();
  const int L = cache.model().block_count();
  const long N = cache.model().dimension();

  DiffusionLoops out;
  out.gg_dagger = Eigen::MatrixXcd::Zero(L, L);
  out.gg = Eigen::MatrixXcd::Zero(L, L);
  for (long x = 0; x < N; ++x) {
    const int bx = cache.model().block_of(x);
    for (long y = 0; y < N; ++y) {
      const int by = cache.model().block_of(y);
      // tr G E_a G^dag E_b collects x in I_b, y in I_a; same for tr G E_a G E_b.
      out.gg_dagger(by, bx) += std::norm((*G)(x, y));
      out.gg(by, bx) += (*G)(x, y) * (*G)(y, x);
    }
  }
  out.gg_dagger /= static_cast<double>(W) * W;
  out.gg /= static_cast<double>(W) * W;
  return out;
}

Eigen::MatrixXcd diffusion_prediction(Complex m, bool conjugated_pair, int W, int L) {
  const Complex xi = conjugated_pair ? Complex(std::norm(m), 0.0) : m * m;
  const CirculantKernel theta = theta_kernel(xi, L);
  Eigen::MatrixXcd out(L, L);
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b) out(a, b) = xi * theta.at(static_cast<long>(a) - b) / static_cast<double>(W);
  return out;
}

DiffusionResidual quantum_diffusion_residual(const ResolventCache& cache, Complex z) {
  const int W = cache.model().block_size();
  const int L = cache.model().block_count();
  const Complex m = stieltjes_semicircle(z);
  const DiffusionLoops loops = diffusion_loops(cache, z);
  const Eigen::MatrixXcd pred_dagger = diffusion_prediction(m, true, W, L);
  const Eigen::MatrixXcd pred_plain = diffusion_prediction(m, false, W, L);
  DiffusionResidual out;
  out.residual_gg_dagger = (loops.gg_dagger - pred_dagger).cwiseAbs();
  out.residual_gg = (loops.gg - pred_plain).cwiseAbs();
  out.max_residual =
      std::max(out.residual_gg_dagger.maxCoeff(), out.residual_gg.maxCoeff());
  return out;
}

EigenvectorStats eigenvector_stats(const ResolventCache& cache, double kappa, double E,
                                   double window_constant) {
  require(kappa > 0.0 && kappa < 1.0, "eigenvector stats: kappa must lie in (0, 1)");
  const long N = cache.model().dimension();
  const int W = cache.model().block_size();
  const int L = cache.model().block_count();
  const auto& lambda = cache.eigenvalues();
  const auto& U = cache.eigenvectors();

  EigenvectorStats out;
  for (long k = 0; k < N; ++k) {
    if (std::abs(lambda(k)) <= 2.0 - kappa) out.bulk_indices.push_back(static_cast<int>(k));
  }
  const std::size_t B = out.bulk_indices.size();
  out.sup_norms.resize(B);
  out.block_mass = Eigen::MatrixXd::Zero(static_cast<long>(B), L);
  for (std::size_t kk = 0; kk < B; ++kk) {
    const long k = out.bulk_indices[kk];
    double sup = 0.0;
    for (long x = 0; x < N; ++x) {
      const double p = std::norm(U(x, k));
      sup = std::max(sup, p);
      out.block_mass(static_cast<long>(kk), cache.model().block_of(x)) += p;
    }
    out.sup_norms[kk] = N * sup;
  }

  // Diagonal concentration observable: N psi* (E_a - 1/N) psi = L m_a - 1
  // with m_a the block mass; variance over bulk eigenvectors, averaged over a.
  if (B >= 2) {
    double var_sum = 0.0;
    for (int a = 0; a < L; ++a) {
      double mean = 0.0, sq = 0.0;
      for (std::size_t kk = 0; kk < B; ++kk) {
        const double v = L * out.block_mass(static_cast<long>(kk), a) - 1.0;
        mean += v;
        sq += v * v;
      }
      mean /= static_cast<double>(B);
      var_sum += sq / static_cast<double>(B) - mean * mean;
    }
    out.que_diag_variance = var_sum / L;
  }

  // Spectral window around E, widened until it holds at least 5 eigenvalues.
  const double base_width =
      window_constant * std::pow(static_cast<double>(W) * W / N, 1.0 / 3.0) / static_cast<double>(N);
  double widening = 1.0;
  for (;;) {
    out.window_indices.clear();
    for (long k = 0; k < N; ++k) {
      if (std::abs(lambda(k) - E) <= base_width * widening)
        out.window_indices.push_back(static_cast<int>(k));
    }
    if (out.window_indices.size() >= 5 || out.window_indices.size() >= static_cast<std::size_t>(N))
      break;
    widening *= 2.0;
  }
  out.window_widening = widening;

  double worst = 0.0;
  for (int a = 0; a < L; ++a) {
    for (int i : out.window_indices) {
      for (int j : out.window_indices) {
        Complex acc(0.0, 0.0);
        for (int r = 0; r < W; ++r) {
          const long x = static_cast<long>(a) * W + r;
          acc += std::conj(U(x, i)) * U(x, j);
        }
        acc /= static_cast<double>(W);
        if (i == j) acc -= 1.0 / static_cast<double>(N);
        worst = std::max(worst, static_cast<double>(N) * std::abs(acc));
      }
    }
  }
  out.que_window_max = worst;
  return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "fit_line: need >= 2 matched points");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit fit;
  const double denom = n * sxx - sx * sx;
  require(std::abs(denom) > 1e-300, "fit_line: degenerate abscissae");
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    rss += r * r;
  }
  fit.rms_residual = std::sqrt(rss / n);
  return fit;
}

}  // namespace bandloop
