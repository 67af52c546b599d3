#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/spectral.hpp"

using namespace bandloop;

TEST_CASE("stieltjes transform solves m(m+z) = -1 on the Herglotz branch") {
  CHECK(std::abs(stieltjes_semicircle(Complex(0.0, 2.0)) -
                 Complex(0.0, std::sqrt(2.0) - 1.0)) < 1e-14);
  CHECK(std::abs(stieltjes_semicircle(Complex(0.0, 1.5)) - Complex(0.0, 0.5)) < 1e-14);

  // Self-consistency and Herglotz property on a bulk grid.
  for (int i = 0; i < 100; ++i) {
    const double E = -1.9 + 3.8 * i / 99.0;
    for (double eta : {1e-3, 0.1, 1.0}) {
      const Complex z(E, eta);
      const Complex m = stieltjes_semicircle(z);
      CHECK(std::abs(m * (m + z) + 1.0) < 1e-12);
      CHECK(m.imag() > 0.0);
    }
  }
  CHECK_THROWS_AS(stieltjes_semicircle(Complex(0.0, -1.0)), InvalidArgument);
}

TEST_CASE("boundary value has unit modulus and solves the fixed-point equation") {
  CHECK(std::abs(boundary_m(0.0) - Complex(0.0, 1.0)) < 1e-15);
  CHECK(std::abs(boundary_m(1.0) - Complex(-0.5, std::sqrt(3.0) / 2.0)) < 1e-15);
  CHECK(std::abs(boundary_m(-1.0) - Complex(0.5, std::sqrt(3.0) / 2.0)) < 1e-15);
  for (double E : {-1.5, -0.3, 0.0, 0.7, 1.9}) {
    const Complex m = boundary_m(E);
    CHECK(std::abs(std::abs(m) - 1.0) < 1e-14);
    CHECK(std::abs(m * (m + E) + 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(boundary_m(2.0), InvalidArgument);
}

TEST_CASE("flow points carry the derived scales") {
  const SpectralPoint p = flow_to_z(0.0, 0.5, 16);
  CHECK(std::abs(p.z - Complex(0.0, 0.5)) < 1e-15);
  CHECK(p.eta == doctest::Approx(0.5));
  CHECK(p.ell_t == doctest::Approx(std::sqrt(2.0)));

  const SpectralPoint q = flow_to_z(0.0, 0.25, 16);
  CHECK(std::abs(q.z - Complex(0.0, 0.75)) < 1e-15);

  const SpectralPoint r = flow_to_z(0.0, 1.0 - 1e-4, 16);
  CHECK(r.ell_t == doctest::Approx(16.0));  // capped at L

  CHECK_THROWS_AS(flow_to_z(0.0, 0.0, 16), InvalidArgument);
  CHECK_THROWS_AS(flow_to_z(0.0, 1.0, 16), InvalidArgument);
}

TEST_CASE("eta decreases and ell_t does not decrease along the flow") {
  double prev_eta = 1e9, prev_ell = 0.0;
  for (int i = 1; i < 99; ++i) {
    const SpectralPoint p = flow_to_z(0.5, i / 99.0, 32);
    CHECK(p.eta < prev_eta);
    CHECK(p.ell_t >= prev_ell);
    prev_eta = p.eta;
    prev_ell = p.ell_t;
  }
}

TEST_CASE("z_to_flow inverts the flow map") {
  const FlowCoordinates f = z_to_flow(Complex(0.0, 1.5), 16);
  CHECK(f.E == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f.t == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(std::abs(2.0 * f.point.z - Complex(0.0, 1.5)) < 1e-12);

  // Near the real axis the recovered t approaches 1 and E is unchanged.
  const FlowCoordinates g = z_to_flow(Complex(0.8, 1e-9), 16);
  CHECK(std::abs(g.E - 0.8) < 1e-6);
  CHECK(g.t > 1.0 - 1e-6);

  CHECK_THROWS_AS(z_to_flow(Complex(1.95, 0.5), 16), InvalidArgument);
}

TEST_CASE("round trip through the flow coordinates") {
  for (double E : {-1.5, 0.0, 1.5}) {
    for (double t : {0.3, 0.6, 0.9}) {
      const SpectralPoint p = flow_to_z(E, t, 16);
      const Complex z = p.z / std::sqrt(t);
      const FlowCoordinates back = z_to_flow(z, 16);
      CHECK(std::abs(back.E - E) < 1e-10);
      CHECK(std::abs(back.t - t) < 1e-10);
    }
  }
}

TEST_CASE("point_from_eta solves for the flow time") {
  const SpectralPoint p = point_from_eta(0.0, 0.2, 16);
  CHECK(p.t == doctest::Approx(0.8));
  CHECK(p.eta == doctest::Approx(0.2));
  const SpectralPoint q = point_from_eta(1.0, 0.2, 16);
  CHECK(q.eta == doctest::Approx(0.2));
  CHECK_THROWS_AS(point_from_eta(0.0, 2.0, 16), InvalidArgument);
}
