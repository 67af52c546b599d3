#pragma once

#include <Eigen/Dense>
#include <vector>

#include "core/band_model.hpp"
#include "core/charges.hpp"
#include "core/loops.hpp"
#include "core/primitive.hpp"
#include "core/spectral.hpp"

namespace bandloop {

/// Result of one Ward-identity check: lhs = sum over the last block index,
/// rhs = (2i W eta_t)^{-1} (X with the last charge dropped and the first set
/// to +, minus the same with -), residual relative to their magnitude. The
/// imaginary unit comes from G(+) - G(-) = 2i eta G(+)G(-); with it the
/// length-2 sum takes the real value 1/(W(1-t)).
struct WardCheck {
  Complex lhs;
  Complex rhs;
  double residual = 0.0;
};

/// Ward identity for the primitive loop. Requires sigma_1 = +, sigma_n = -;
/// `prefix` holds the first n-1 block indices.
WardCheck ward_check_k(const PrimitiveEvaluator& eval, const SignWord& sigma,
                       const std::vector<int>& prefix);

/// Ward identity for a sampled loop; exact resolvent algebra per sample.
WardCheck ward_check_loop(const ResolventCache& cache, const SpectralPoint& point,
                          const SignWord& sigma, const std::vector<int>& prefix);

/// One point of the alternating self-energy mass scan, with the geometric
/// closed form it must equal.
struct SumZeroPoint {
  double t = 0.0;
  Complex value;        // L^{-1} sum_d Sigma^(empty)
  Complex closed_form;  // (1 - t^2) / |1 - t m^2|^2
  double abs_error = 0.0;
};

/// Scans L^{-1} sum_d of the no-long-chord self-energy for the length-4
/// alternating word over a t grid.
std::vector<SumZeroPoint> sum_zero_scan(double E, const std::vector<double>& t_grid, int L);

/// Entrywise and partial-trace local-law residuals at a flow point, with the
/// predicted scales attached.
struct LocalLawSample {
  double entry_max = 0.0;          // max_xy |G - m delta|
  double partial_trace_max = 0.0;  // max_a |W^{-1} tr_a G - m|
  double entry_scale = 0.0;        // (W ell_t eta_t)^{-1/2}
  double trace_scale = 0.0;        // (W ell_t eta_t)^{-1}
};
LocalLawSample local_law_residuals(const ResolventCache& cache, const SpectralPoint& point);

/// max_a |W^{-1} tr_a G - m|: the length-1 loop error against its constant.
double one_loop_error(const ResolventCache& cache, const SpectralPoint& point);

/// max_{a,b} |L_{(+,-),(a,b)} - W^{-1} Theta_t(a-b)|: the length-2 loop error
/// against the closed deterministic value. O(N^2) from the assembled G.
double two_loop_error(const ResolventCache& cache, const SpectralPoint& point);

/// Both block-level second-order traces of the plain resolvent at z:
/// gg_dagger(a,b) = tr G E_a G^dagger E_b and gg(a,b) = tr G E_a G E_b.
struct DiffusionLoops {
  Eigen::MatrixXcd gg_dagger;
  Eigen::MatrixXcd gg;
};
DiffusionLoops diffusion_loops(const ResolventCache& cache, Complex z);

/// Diffusion predictions W^{-1} [xi / (1 - xi S_B)]_{ab} for xi = |m|^2 and
/// xi = m^2 with m = m_sc(z).
Eigen::MatrixXcd diffusion_prediction(Complex m, bool conjugated_pair, int W, int L);

/// One-sample residuals of both second-order traces against the predictions.
struct DiffusionResidual {
  double max_residual = 0.0;
  Eigen::MatrixXd residual_gg_dagger;  // |tr G E_a G^dag E_b - prediction|
  Eigen::MatrixXd residual_gg;
};
DiffusionResidual quantum_diffusion_residual(const ResolventCache& cache, Complex z);

/// Per-eigenvector observables from one decomposition.
struct EigenvectorStats {
  std::vector<int> bulk_indices;      // k with |lambda_k| <= 2 - kappa
  std::vector<double> sup_norms;      // N * max_x |psi_k(x)|^2 per bulk k
  Eigen::MatrixXd block_mass;         // bulk k x L, rows sum to 1
  double que_diag_variance = 0.0;     // mean over a of Var_k N psi_k*(E_a - 1/N) psi_k
  std::vector<int> window_indices;    // |lambda_k - E| within the QUE window
  double window_widening = 1.0;       // factor applied to reach >= 5 members
  double que_window_max = 0.0;        // max |N psi_i*(E_a - 1/N) psi_j| over window
};
EigenvectorStats eigenvector_stats(const ResolventCache& cache, double kappa, double E,
                                   double window_constant);

/// Least-squares line fit of y against x; slope plus rms residual.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace bandloop
