#include <cmath>
#include <complex>

#include "doctest.h"
#include "sinedet/classical_pv.hpp"

using namespace sinedet;

namespace {

// Residual of (x nu'')^2 + 4 (x nu' - nu)(x nu' - nu + nu'^2) for the cubic
// seed series nu = a1 x + a2 x^2 + a3 x^3, evaluated in closed form.
double series_residual(double ell, double x) {
  double a1 = -ell / M_PI;
  double a2 = -a1 * a1;
  double a3 = a1 * a1 * a1;
  double nu = a1 * x + a2 * x * x + a3 * x * x * x;
  double nup = a1 + 2 * a2 * x + 3 * a3 * x * x;
  double nupp = 2 * a2 + 6 * a3 * x;
  double t = x * nup - nu;
  return std::abs(std::pow(x * nupp, 2) + 4.0 * t * (t + nup * nup));
}

}  // namespace

TEST_CASE("seed series coefficients satisfy the ODE to fourth order") {
  // With a2 = -a1^2 and a3 = a1^3 the residual of the truncated series decays
  // like x^4; a wrong a2 would give x^2, a wrong a3 would give x^3.
  for (double ell : {0.5, 1.0}) {
    double r1 = series_residual(ell, 1e-2);
    double r2 = series_residual(ell, 5e-3);
    double r3 = series_residual(ell, 2.5e-3);
    double o1 = std::log2(r1 / r2);
    double o2 = std::log2(r2 / r3);
    CHECK(o1 == doctest::Approx(4.0).epsilon(0.08));
    CHECK(o2 == doctest::Approx(4.0).epsilon(0.08));
  }
}

TEST_CASE("zero thinning gives the zero solution") {
  PVSolution sol = solve_sigma_pv(cplx(0.0, 0.0), 2.0);
  for (const auto& v : sol.nu) CHECK(std::abs(v) == 0.0);
  CHECK(std::abs(sol.logdet_at(1.5)) == 0.0);
}

TEST_CASE("small-x behaviour of the solution matches the boundary data") {
  PVSolution sol = solve_sigma_pv(cplx(1.0, 0.0), 1.0);
  double a1 = -1.0 / M_PI;
  double a2 = -a1 * a1;
  double a3 = a1 * a1 * a1;
  // nu/x -> a1 linearly in x
  for (double x : {2e-3, 4e-3, 8e-3}) {
    cplx nu = sol.nu_at(x);
    CHECK(std::abs(nu / x - a1) < 1.1 * std::abs(a2) * x + 1e-12);
    // second coefficient recovered from the compensated ratio
    double c2 = ((nu.real() - a1 * x) / (x * x));
    CHECK(std::abs(c2 - a2) < 1.2 * std::abs(a3) * x + 1e-9);
  }
}

TEST_CASE("ODE residual stays within the integrator budget") {
  PVSolution sol = solve_sigma_pv(cplx(1.0, 0.0), 5.0);
  CHECK(sol.max_residual < 1e-7);
  CHECK(sol.x.back() >= 5.0);
  // dense output agrees with the accepted steps
  for (std::size_t i = 0; i < sol.x.size(); i += 7) {
    CHECK(std::abs(sol.nu_at(sol.x[i]) - sol.nu[i]) < 1e-12);
  }
}

TEST_CASE("thinned determinant basics") {
  CHECK(std::abs(thinned_gap_determinant(cplx(0.0, 0.0), 1.0).det - 1.0) < 1e-14);
  DetResult r = thinned_gap_determinant(cplx(1.0, 0.0), 0.01);
  CHECK(std::abs(r.det.real() - (1.0 - 0.01 / M_PI)) < 1e-6);
  for (double ell : {0.5, 1.0}) {
    for (double s : {1.0, 3.0}) {
      double d = thinned_gap_determinant(cplx(ell, 0.0), s).det.real();
      CHECK(d > 0.0);
      CHECK(d < 1.0);
    }
  }
}

TEST_CASE("ODE route reproduces the determinant route") {
  for (double ell : {0.5, 1.0}) {
    ClassicalComparison cmp =
        compare_classical(cplx(ell, 0.0), {0.1, 0.5, 1.0, 2.0, 3.0, 5.0});
    INFO("ell = ", ell);
    CHECK(cmp.max_diff < 1e-6);
    CHECK(cmp.residual_nu < 1e-6);
    CHECK(cmp.residual_nu_prime < 1e-5);
    for (std::size_t i = 0; i < cmp.s_values.size(); ++i) {
      CHECK(std::abs(cmp.logdet_fredholm[i] - cmp.logdet_ode[i]) < 1e-6);
    }
  }
}
