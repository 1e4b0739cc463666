#include <cmath>
#include <complex>

#include "doctest.h"
#include "sinedet/zs.hpp"

using namespace sinedet;

namespace {

const cplx I(0.0, 1.0);

double fd_logdet_s(const Weight& w, double s, double h = 1e-3) {
  auto det_at = [&](double sv) {
    DiscreteOperator op = build_conjugated_operator(w, sv);
    return log_det(op).log_det.real();
  };
  return (det_at(s + h) - det_at(s - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("zero weight gives the bare fields") {
  FieldSet fs = assemble_fields(Weight::none(), 1.0);
  CHECK(fs.F.norm() == 0.0);
  CHECK(fs.f.norm() == 0.0);
  CHECK((fs.G - fs.g).norm() == 0.0);

  reconstruct_Yplus(fs);
  for (const auto& Y : fs.Yplus) {
    CHECK((Y - Eigen::Matrix2cd::Identity()).norm() == 0.0);
  }

  compute_phi_psi(fs);
  for (Eigen::Index i = 0; i < fs.phi.size(); ++i) {
    double lam = fs.lambda.nodes[i];
    CHECK(std::abs(fs.phi(i) - std::exp(I * fs.s * lam)) < 1e-14);
    CHECK(std::abs(fs.psi(i) - std::exp(-I * fs.s * lam)) < 1e-14);
  }
  CHECK(std::abs(fs.phi_at(2.0) - std::exp(I * 2.0)) < 1e-14);

  U1Coefficients u1 = compute_U1(fs);
  CHECK(u1.U1.norm() == 0.0);
  CHECK(std::abs(u1.p) == 0.0);
  CHECK(std::abs(u1.q) == 0.0);

  TraceIdentityReport tr = verify_trace_identities(fs, u1);
  CHECK(tr.max_residual() == 0.0);
}

TEST_CASE("dressed fields satisfy the boundary-value relation F = Y+ f") {
  FieldSet fs = assemble_fields(Weight::fermi(1.0), 1.0);
  reconstruct_Yplus(fs);
  double fmax = 0.0;
  for (Eigen::Index i = 0; i < fs.F.rows(); ++i)
    fmax = std::max(fmax, fs.F.row(i).norm());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < fs.F.rows(); ++i) {
    Eigen::Vector2cd lhs = fs.F.row(i).transpose();
    Eigen::Vector2cd rhs = fs.Yplus[i] * fs.f.row(i).transpose();
    worst = std::max(worst, (lhs - rhs).norm());
  }
  CHECK(worst / fmax < 1e-8);
}

TEST_CASE("Y+ has unit determinant and trends to I like 1/z") {
  FieldSet fs = assemble_fields(Weight::fermi(1.0), 1.0);
  reconstruct_Yplus(fs);
  for (const auto& Y : fs.Yplus) {
    CHECK(std::abs(Y.determinant() - 1.0) < 1e-8);
  }
  double d1 = (fs.y_far(1e7) - Eigen::Matrix2cd::Identity()).norm();
  double d2 = (fs.y_far(2e7) - Eigen::Matrix2cd::Identity()).norm();
  CHECK(d1 < 1e-6);
  CHECK(d1 / d2 == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("phi from the continuation formula matches the literal Y+ product") {
  FieldSet fs = assemble_fields(Weight::fermi(1.0), 1.0);
  reconstruct_Yplus(fs);
  compute_phi_psi(fs);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < fs.phi.size(); ++i) {
    double lam = fs.lambda.nodes[i];
    Eigen::Vector2cd bare(std::exp(I * fs.s * lam), std::exp(-I * fs.s * lam));
    Eigen::Vector2cd col = fs.Yplus[i] * bare;
    worst = std::max(worst, std::abs(col(0) - fs.phi(i)));
    worst = std::max(worst, std::abs(col(1) - fs.psi(i)));
  }
  CHECK(worst < 1e-7);
}

TEST_CASE("psi is the reflection of phi for even weights") {
  FieldSet fs = assemble_fields(Weight::fermi(1.0), 2.0);
  compute_phi_psi(fs);
  for (double lam : {0.0, 0.37, 1.2, 2.8}) {
    CHECK(std::abs(fs.psi_at(lam) - fs.phi_at(-lam)) < 1e-9);
  }
}

TEST_CASE("U1 structure: traceless, antisymmetric off-diagonal, det anchor") {
  FieldSet fs = assemble_fields(Weight::fermi(1.0), 1.0);
  U1Coefficients u1 = compute_U1(fs);

  CHECK(std::abs(u1.U1.trace()) < 1e-10 * u1.U1.norm());
  CHECK(std::abs(u1.beta + u1.gamma) < 1e-8 * std::abs(u1.gamma));

  // p = -d_s log F ties the moment normalization to the determinant.
  CHECK(u1.identity_residual < 1e-6);
  double ds = fd_logdet_s(Weight::fermi(1.0), 1.0);
  CHECK(std::abs(u1.p + ds) < 1e-6);
}

TEST_CASE("U1 small-s limit reproduces the weight mass") {
  Weight w = Weight::fermi(1.0);
  // int w by refined quadrature
  double L = w.truncation_radius(1e-16);
  Grid g = gauss_legendre(20, 0.0, L, 20);
  double mass = 2.0 * integrate([&](double u) { return w.value(u); }, g);

  FieldSet fs = assemble_fields(w, 1e-3);
  U1Coefficients u1 = compute_U1(fs);
  // p -> mass/pi, alpha -> -i mass/pi, gamma -> -i mass/pi as s -> 0.
  CHECK(std::abs(u1.p - mass / M_PI) < 1e-2 * mass / M_PI);
  CHECK(std::abs(u1.q - mass / M_PI) < 1e-2 * mass / M_PI);
  CHECK(std::abs(u1.alpha - u1.gamma) < 1e-2 * std::abs(u1.gamma));
}

TEST_CASE("trace identities hold at discretization accuracy") {
  for (double s : {0.5, 1.0, 2.0}) {
    FieldSet fs = assemble_fields(Weight::fermi(1.0), s);
    U1Coefficients u1 = compute_U1(fs);
    TraceIdentityReport tr = verify_trace_identities(fs, u1);
    INFO("s = ", s);
    CHECK(tr.normalization > 0.0);
    CHECK(tr.orthogonality < 1e-6);
    CHECK(tr.beta_residual < 1e-6);
    CHECK(tr.gamma_residual < 1e-6);
    CHECK(tr.even_orthogonality < 1e-6);
  }
}

TEST_CASE("s-dynamics residual is second order in the step") {
  DynamicsReport rep = verify_dynamics(Weight::fermi(1.0), 1.0, {2e-3, 1e-3});
  REQUIRE(rep.residuals.size() == 2);
  CHECK(rep.residuals[1] < 2e-5);
  REQUIRE(rep.orders.size() == 1);
  CHECK(rep.orders[0] == doctest::Approx(2.0).epsilon(0.2));
  CHECK(rep.second_logderiv_residual < 1e-4);
}

TEST_CASE("s-dynamics of the bare phase is exact up to stencil error") {
  DynamicsReport rep = verify_dynamics(Weight::none(), 1.0, {2e-3, 1e-3});
  CHECK(rep.residuals[0] < 1e-4);
  CHECK(rep.orders[0] == doctest::Approx(2.0).epsilon(0.15));
  CHECK(rep.second_logderiv_residual < 1e-6);
}

TEST_CASE("deformation equation in (lambda, y) closes at second order") {
  LaxReport rep = verify_lax(Profile::fermi_factor(), 0.3, 1.0, {4e-2, 2e-2});
  REQUIRE(rep.orders.size() == 1);
  CHECK(rep.orders[0] == doctest::Approx(2.0).epsilon(0.25));
  CHECK(rep.residuals[1] < 5e-3);
}

TEST_CASE("s * norm(U1) halves with s in the small-s regime") {
  Weight w5 = Weight::from_profile(Profile::fermi_factor(), 0.0);
  FieldSet a = assemble_fields(w5, 5e-3);
  FieldSet b = assemble_fields(w5, 2.5e-3);
  int sign = calibrate_u1_sign(a);
  double na = 5e-3 * compute_U1(a, sign).U1.norm();
  double nb = 2.5e-3 * compute_U1(b, sign).U1.norm();
  CHECK(na / nb == doctest::Approx(2.0).epsilon(0.05));
}
