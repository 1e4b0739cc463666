#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "sinedet/pde_lab.hpp"

using namespace sinedet;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

SigmaSurface synthetic_surface(const std::vector<double>& ys,
                               const std::vector<double>& ss,
                               const std::function<double(double, double)>& f) {
  SigmaSurface S;
  S.ys = ys;
  S.ss = ss;
  S.hy = ys[1] - ys[0];
  S.hs = ss[1] - ss[0];
  S.sigma.resize(ys.size(), ss.size());
  for (std::size_t i = 0; i < ys.size(); ++i)
    for (std::size_t j = 0; j < ss.size(); ++j) S.sigma(i, j) = f(ys[i], ss[j]);
  extract_p_q(S);
  return S;
}

}  // namespace

TEST_CASE("extract_p_q recovers exact derivatives of a quadratic") {
  // sigma = -s^2: p = 2s, q = sqrt(2); centered stencils are exact here.
  SigmaSurface S = synthetic_surface(linspace(-1.0, 1.0, 11), linspace(0.5, 1.5, 21),
                                     [](double, double s) { return -s * s; });
  for (std::size_t i = 0; i < S.ys.size(); ++i) {
    for (std::size_t j = 1; j + 1 < S.ss.size(); ++j) {
      CHECK(S.p(i, j) == doctest::Approx(2.0 * S.ss[j]).epsilon(1e-12));
      CHECK(S.q(i, j) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    }
    CHECK(std::isnan(S.p(i, 0)));
    CHECK(std::isnan(S.p(i, S.ss.size() - 1)));
  }
}

TEST_CASE("pde_residuals flags a non-solution with computable residuals") {
  // sigma = s^2 y on y < 0 (so q^2 = -2y > 0).  Every stencil is exact for
  // this polynomial, so the normalized residuals have closed forms.
  std::vector<double> ys = linspace(-2.0, -1.0, 21);
  std::vector<double> ss = linspace(0.5, 1.5, 21);
  SigmaSurface S = synthetic_surface(ys, ss, [](double y, double s) { return s * s * y; });
  PdeReport rep = pde_residuals(S, {1});
  REQUIRE(rep.strides.size() == 1);

  // Residuals are normalized by the largest term entering each form.
  // q form: LHS = 0, d_y(q^2) = -2, RHS = -3; denominator max(0, 2, 1) = 2.
  CHECK(rep.strides[0].q_form_max == doctest::Approx(1.5).epsilon(1e-9));
  // coupled: LHS = 0, d_y p = -2s, so the violation is 2q*3s against the
  // largest term 2q*|d_y p| = 2q*2s: residual 3/2 everywhere.
  CHECK(rep.strides[0].coupled_max == doctest::Approx(1.5).epsilon(1e-9));

  // sigma form: LHS = 4, RHS terms (-32, +16, -32) * y s^2; max over interior.
  double expect = 0.0;
  for (std::size_t i = 1; i + 1 < ys.size(); ++i) {
    for (std::size_t j = 1; j + 1 < ss.size(); ++j) {
      double ys2 = ys[i] * ss[j] * ss[j];
      double lhs = 4.0, rhs = -48.0 * ys2;
      double denom = std::max(std::abs(lhs), 32.0 * std::abs(ys2));
      expect = std::max(expect, std::abs(lhs - rhs) / denom);
    }
  }
  CHECK(rep.strides[0].sigma_form_max == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("determinant surface satisfies the PDE system at second order") {
  SurfaceSpec spec;
  spec.y0 = -0.2;
  spec.y1 = 0.2;
  spec.hy = 0.05;
  spec.s0 = 0.5;
  spec.s1 = 1.0;
  spec.hs = 0.02;
  SigmaSurface S = build_sigma_surface(Profile::fermi_factor(), spec);
  REQUIRE(S.ys.size() == 9);
  REQUIRE(S.ss.size() == 26);
  CHECK(S.max_imag < 1e-8);
  // sigma decreases in s (the determinant shrinks as the interval grows)
  for (std::size_t j = 1; j < S.ss.size(); ++j) {
    CHECK(S.sigma(4, j) < S.sigma(4, j - 1));
  }

  PdeReport rep = pde_residuals(S, {2, 1});
  REQUIRE(rep.strides.size() == 2);
  CHECK(rep.strides[1].sigma_form_max < 1e-2);
  CHECK(rep.strides[1].coupled_max < 1e-2);
  CHECK(rep.strides[1].q_form_max < 1e-2);
  CHECK(rep.sigma_form_order == doctest::Approx(2.0).epsilon(0.35));
  CHECK(rep.coupled_order == doctest::Approx(2.0).epsilon(0.35));
  CHECK(rep.q_form_order == doctest::Approx(2.0).epsilon(0.35));
}

TEST_CASE("surface p and q match the dressed-moment route") {
  SurfaceSpec spec;
  spec.y0 = -0.1;
  spec.y1 = 0.1;
  spec.hy = 0.05;
  spec.s0 = 0.7;
  spec.s1 = 0.8;
  spec.hs = 0.01;
  SigmaSurface S = build_sigma_surface(Profile::fermi_factor(), spec);

  std::size_t iy = 2, is = 5;  // y = 0, s = 0.75
  Weight w = Weight::from_profile(Profile::fermi_factor(), S.ys[iy]);
  FieldSet fs = assemble_fields(w, S.ss[is]);
  U1Coefficients u1 = compute_U1(fs);

  CHECK(std::abs(S.p(iy, is) - u1.p.real()) < 1e-3);
  CHECK(std::abs(S.q(iy, is) - std::abs(u1.q.real())) < 2e-3);
  CHECK(std::abs(u1.p.imag()) < 1e-8);
  CHECK(std::abs(u1.q.imag()) < 1e-6);
}

TEST_CASE("structural constants snap to small rationals") {
  std::vector<double> ys = {-0.3, 0.0, 0.3};
  std::vector<double> ss = {0.7, 0.9, 1.1};
  auto samples = u1_sweep(Profile::fermi_factor(), ys, ss);
  REQUIRE(samples.size() == 9);

  CalibrationReport rep = calibrate_constants(samples);
  REQUIRE(rep.fits.size() == 4);
  CHECK(rep.all_snapped(1e-3, 4));
  for (const auto& fit : rep.fits) {
    CHECK(fit.snap_error < 1e-3);
    CHECK(fit.imag_part < 1e-3);
    CHECK(fit.rel_residual < 1e-3);
    CHECK(std::abs(fit.den) <= 4);
  }
  // d_s sigma = -2 * (i [U1]_11); the other three are unit constants.
  CHECK(rep.fits[0].num == -2);
  CHECK(rep.fits[0].den == 1);
  CHECK(std::abs(rep.fits[1].num) == 1);
  CHECK(rep.fits[1].den == 1);
  CHECK(rep.fits[2].num == 1);
  CHECK(rep.fits[2].den == 1);
  CHECK(rep.fits[3].num == 1);
  CHECK(rep.fits[3].den == 1);
}
