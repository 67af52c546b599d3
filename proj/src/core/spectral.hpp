#pragma once

#include <complex>

#include "core/errors.hpp"

namespace bandloop {

using Complex = std::complex<double>;

/// Default bulk margin kappa: energies are restricted to |E| <= 2 - kappa.
inline constexpr double kDefaultBulkMargin = 0.1;

/// Stieltjes transform of the semicircle density: the root of m(m+z) = -1
/// with Im m > 0. Branch chosen by the sign of the imaginary part of the
/// result, valid across sign changes of Re z. Requires Im z > 0.
Complex stieltjes_semicircle(Complex z);

/// Boundary value m^(E) = (-E + i sqrt(4 - E^2)) / 2, |m^(E)| = 1. |E| < 2.
Complex boundary_m(double E);

/// One point of the spectral flow: z_t = E + (1-t) m^(E), with the derived
/// scales used throughout (eta_t = Im z_t, ell_t = min(|1-t|^{-1/2}, L)).
/// ell_z = min(eta_t^{-1/2}, L) + 1 is carried alongside for reports; all
/// fits standardize on ell_t.
struct SpectralPoint {
  double E = 0.0;
  double t = 0.0;
  Complex z;       // z_t
  Complex m;       // m^(E)
  double eta = 0.0;    // Im z_t
  double ell_t = 0.0;  // min(|1-t|^{-1/2}, L)
  double ell_z = 0.0;  // min(eta^{-1/2}, L) + 1
  int L = 0;
};

/// Builds the flow point for (E, t). Requires |E| < 2 and 0 < t < 1.
SpectralPoint flow_to_z(double E, double t, int L);

/// Flow point with a prescribed eta_t: solves eta = (1-t) Im m^(E) for t.
SpectralPoint point_from_eta(double E, double eta, int L);

struct FlowCoordinates {
  double E = 0.0;
  double t = 0.0;
  SpectralPoint point;
};

/// Inverts z = t^{-1/2} z_t^(E): sqrt(t) = |m_sc(z)|, E = -2 Re m_sc(z)/|m_sc(z)|.
/// Valid for Im z > 0 with |Re z| <= 2 - kappa; both the recovered E and the
/// defining identities are checked (to 1e-12) before returning.
FlowCoordinates z_to_flow(Complex z, int L, double kappa = kDefaultBulkMargin);

}  // namespace bandloop
