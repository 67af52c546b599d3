#include "core/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace bandloop {

Complex stieltjes_semicircle(Complex z) {
  require(z.imag() > 0.0, "stieltjes_semicircle: Im z must be positive");
  const Complex w = std::sqrt(z * z - 4.0);
  Complex m = 0.5 * (-z + w);
  if (m.imag() <= 0.0) m = 0.5 * (-z - w);
  return m;
}

Complex boundary_m(double E) {
  require(std::abs(E) < 2.0, "boundary_m: |E| must be < 2");
  return Complex(-E / 2.0, std::sqrt(4.0 - E * E) / 2.0);
}

static double ell_t_scale(double t, int L) {
  const double gap = std::abs(1.0 - t);
  if (gap == 0.0) return static_cast<double>(L);
  return std::min(1.0 / std::sqrt(gap), static_cast<double>(L));
}

SpectralPoint flow_to_z(double E, double t, int L) {
  require(std::abs(E) < 2.0, "flow_to_z: |E| must be < 2");
  require(t > 0.0 && t < 1.0, "flow_to_z: t must lie in (0, 1)");
  require(L >= 3, "flow_to_z: L must be >= 3");
  SpectralPoint p;
  p.E = E;
  p.t = t;
  p.m = boundary_m(E);
  p.z = E + (1.0 - t) * p.m;
  p.eta = p.z.imag();
  p.ell_t = ell_t_scale(t, L);
  p.ell_z = std::min(1.0 / std::sqrt(p.eta), static_cast<double>(L)) + 1.0;
  p.L = L;
  return p;
}

SpectralPoint point_from_eta(double E, double eta, int L) {
  require(eta > 0.0, "point_from_eta: eta must be positive");
  const double im_m = boundary_m(E).imag();
  const double t = 1.0 - eta / im_m;
  require(t > 0.0 && t < 1.0, "point_from_eta: eta too large for this energy");
  return flow_to_z(E, t, L);
}

FlowCoordinates z_to_flow(Complex z, int L, double kappa) {
  require(z.imag() > 0.0, "z_to_flow: need Im z > 0");
  require(std::abs(z.real()) <= 2.0 - kappa, "z_to_flow: Re z outside the bulk strip");
  const Complex msc = stieltjes_semicircle(z);
  const double root_t = std::abs(msc);
  const double t = root_t * root_t;
  require(t > 0.0 && t < 1.0, "z_to_flow: recovered t outside (0, 1)");
  const double E = -2.0 * msc.real() / root_t;
  require(std::abs(E) <= 2.0 - kappa, "z_to_flow: recovered E outside the bulk strip");

  FlowCoordinates out;
  out.E = E;
  out.t = t;
  out.point = flow_to_z(E, t, L);

  const double scale_residual = std::abs(z - out.point.z / root_t);
  const double m_residual = std::abs(msc - root_t * out.point.m);
  if (scale_residual > 1e-12 * std::max(1.0, std::abs(z)) || m_residual > 1e-12) {
    throw NumericError("z_to_flow: flow identities violated beyond 1e-12");
  }
  return out;
}

}  // namespace bandloop
