// Acceptance gate: one check per published criterion, each printing a single
// [PASS]/[FAIL] line with the measured numbers.  Exit code is the number of
// failed criteria.
//
// C11's fourth quantity (the y-derivative of the 1/lambda moment matrix) is
// known not to follow the halving law it is tested against: the matrix tends
// to a nonzero constant as s -> 0, so its ratio tends to 1.  The check is run
// and reported as stated anyway; see README for the analysis.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "sinedet/classical_pv.hpp"
#include "sinedet/pde_lab.hpp"
#include "sinedet/scattering.hpp"
#include "sinedet/zs.hpp"

using namespace sinedet;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] C%d: %s - %s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

double logdet_real(const DiscreteOperator& op) { return log_det(op).log_det.real(); }

// ---------------------------------------------------------------- C1
void criterion_1() {
  double t0 = now_seconds();
  double worst = 0.0;
  for (const Profile& P : {Profile::fermi_factor(), Profile::gaussian_square()}) {
    for (double y : {-1.0, 0.0, 1.0}) {
      Weight w = Weight::from_profile(P, y);
      for (double s : {0.5, 1.0, 2.0, 5.0}) {
        double a = logdet_real(build_interval_operator(w, s));
        double b = logdet_real(build_conjugated_operator(w, s));
        worst = std::max(worst, std::abs(a - b));
      }
    }
  }
  double dt = now_seconds() - t0;
  report(1, "representation equivalence",
         worst <= 1e-8 && dt < 60.0,
         fmt("max |logdet difference| = %.3e (tol 1e-8), %.1f s", worst, dt));
}

// ---------------------------------------------------------------- C2
void criterion_2() {
  struct Case {
    std::string name;
    Weight w;
  };
  ScatteringPair sp = W_from_f(GaussianPulse{1.0, 0.0});
  std::vector<Case> cases = {
      {"none", Weight::none()},
      {"fermi(1)", Weight::fermi(1.0)},
      {"gaussian_square", Weight::gaussian_square()},
      {"erf_window(1)", Weight::erf_window(1.0)},
      {"smoothed_indicator(0.1)", Weight::smoothed_indicator(0.1)},
      {"fermi_factor y=0", Weight::from_profile(Profile::fermi_factor(), 0.0)},
      {"gaussian_square y=0", Weight::from_profile(Profile::gaussian_square(), 0.0)},
      {"scattering y=0", Weight::from_profile(sp.profile(), 0.0)},
  };
  double worst = 0.0;
  std::string worst_name = "-";
  bool all_ok = true;
  for (const auto& c : cases) {
    RefineResult rr = refine_until_converged(
        [&](int panels) { return build_conjugated_operator(c.w, 10.0, 16, panels); }, 1,
        1e-10);
    double delta = rr.deltas.empty() ? 0.0 : rr.deltas.back();
    if (delta > worst) {
      worst = delta;
      worst_name = c.name;
    }
    all_ok = all_ok && rr.converged;
  }
  report(2, "spectral convergence under node doubling", all_ok && worst < 1e-10,
         fmt("worst doubling delta %.3e (%s), tol 1e-10, s=10", worst,
             worst_name.c_str()));
}

// ---------------------------------------------------------------- C3
void criterion_3() {
  bool ok = true;
  double lo = 1.0, hi = 0.0;
  for (const Profile& P : {Profile::fermi_factor(), Profile::gaussian_square()}) {
    for (double y : {-1.0, 0.0, 1.0}) {
      Weight w = Weight::from_profile(P, y);
      double L = w.truncation_radius(1e-16);
      Grid g = gauss_legendre(20, 0.0, L, 24);
      double c0 = -2.0 / M_PI * integrate([&](double u) { return w.value(u); }, g);
      auto e = [&](double s) {
        double sig = logdet_real(build_conjugated_operator(w, s));
        return std::abs(sig / s - c0);
      };
      double e1 = e(1e-2), e2 = e(5e-3), e3 = e(2.5e-3);
      for (double r : {e2 / e1, e3 / e2}) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
        ok = ok && r >= 0.35 && r <= 0.65;
      }
    }
  }
  report(3, "small-s linear remainder halves", ok,
         fmt("remainder ratios in [%.3f, %.3f] (need [0.35, 0.65])", lo, hi));
}

// ---------------------------------------------------------------- C4
void criterion_4() {
  double worst = 0.0;
  for (double s : {0.5, 1.0, 2.0}) {
    FieldSet fs = assemble_fields(Weight::fermi(1.0), s);
    U1Coefficients u1 = compute_U1(fs);
    TraceIdentityReport tr = verify_trace_identities(fs, u1);
    worst = std::max({worst, tr.orthogonality, tr.beta_residual, tr.gamma_residual});
  }
  report(4, "trace identities", worst <= 1e-6,
         fmt("max normalized residual %.3e (tol 1e-6), fermi(1), s in {0.5,1,2}",
             worst));
}

// ---------------------------------------------------------------- C5
void criterion_5() {
  DynamicsReport rep = verify_dynamics(Weight::fermi(1.0), 1.0, {2e-3, 1e-3, 5e-4});
  bool ok = rep.second_logderiv_residual <= 1e-4;
  std::string orders;
  for (double o : rep.orders) {
    ok = ok && std::abs(o - 2.0) <= 0.3;
    orders += fmt("%.2f ", o);
  }
  report(5, "s-dynamics order and second-log-derivative identity", ok,
         fmt("orders %s(need 2.0 +- 0.3), identity residual %.3e (tol 1e-4)",
             orders.c_str(), rep.second_logderiv_residual));
}

// ---------------------------------------------------------------- C6
void criterion_6() {
  LaxReport rep = verify_lax(Profile::fermi_factor(), 0.0, 1.0,
                             {5e-2, 2.5e-2, 1.25e-2});
  bool ok = true;
  std::string orders;
  for (double o : rep.orders) {
    ok = ok && std::abs(o - 2.0) <= 0.3;
    orders += fmt("%.2f ", o);
  }
  report(6, "deformation equation joint-step order", ok,
         fmt("orders %s(need 2.0 +- 0.3), finest residual %.3e", orders.c_str(),
             rep.residuals.back()));
}

// ---------------------------------------------------------------- C7
void criterion_7() {
  double t0 = now_seconds();
  SurfaceSpec spec;  // defaults: y in [-2,2] step 0.05, s in [0.2,3] step 0.02
  SigmaSurface S = build_sigma_surface(Profile::fermi_factor(), spec);
  PdeReport rep = pde_residuals(S, {4, 2, 1});
  double dt = now_seconds() - t0;
  bool ok = std::abs(rep.sigma_form_order - 2.0) <= 0.3 &&
            std::abs(rep.coupled_order - 2.0) <= 0.3 &&
            std::abs(rep.q_form_order - 2.0) <= 0.3 && dt < 600.0;
  report(7, "PDE residual convergence on the full surface", ok,
         fmt("orders: sigma %.2f, q %.2f, coupled %.2f (need 2.0 +- 0.3); "
             "finest maxima %.2e/%.2e/%.2e; %.0f s",
             rep.sigma_form_order, rep.q_form_order, rep.coupled_order,
             rep.strides.back().sigma_form_max, rep.strides.back().q_form_max,
             rep.strides.back().coupled_max, dt));
}

// ---------------------------------------------------------------- C8
void criterion_8() {
  std::vector<double> sgrid;
  for (double s = 0.1; s <= 5.0 + 1e-9; s += 0.1) sgrid.push_back(s);
  bool ok = true;
  std::string detail;
  for (double ell : {0.5, 1.0}) {
    ClassicalComparison cmp = compare_classical(cplx(ell, 0.0), sgrid);
    ok = ok && cmp.residual_nu <= 1e-6 && cmp.max_diff <= 1e-6;
    detail += fmt("ell=%.1f: |s dlogF - nu| %.2e, |logF - int| %.2e; ", ell,
                  cmp.residual_nu, cmp.max_diff);
  }
  report(8, "classical benchmark against the ODE route", ok,
         detail + "(tol 1e-6)");
}

// ---------------------------------------------------------------- C9
void criterion_9() {
  double sup = 0.0;
  for (const auto& f : {GaussianPulse{1.0, 0.0}, GaussianPulse{0.5, 1.0}}) {
    ScatteringPair pair = W_from_f(f);
    for (double y = -2.0; y <= 2.0 + 1e-9; y += 0.25) {
      SmallSData d = small_s_initial_data(pair, y, 1e-2);
      sup = std::max(sup, std::abs(d.c0_richardson - f(y)));
    }
  }
  ScatteringPair unit = W_from_f(GaussianPulse{1.0, 0.0});
  double w0_err = std::abs(unit.W_at(0.0) + std::tgamma(0.75));
  bool ok = sup <= 5e-3 && w0_err <= 1e-10;
  report(9, "scattering round-trip to the initial pulse", ok,
         fmt("sup_y |extrapolated - f| = %.3e (tol 5e-3); |W(0)+Gamma(3/4)| = %.1e "
             "(tol 1e-10)",
             sup, w0_err));
}

// ---------------------------------------------------------------- C10
void criterion_10() {
  std::vector<double> ys = {-0.5, 0.0, 0.5};
  std::vector<double> ss = {0.6, 0.8, 1.0, 1.2};
  auto samples = u1_sweep(Profile::fermi_factor(), ys, ss);
  CalibrationReport rep = calibrate_constants(samples);
  // required: the q-vs-gamma and d_s^2 sigma-vs-gamma^2 prefactors snap to
  // rationals of denominator <= 4 within 1e-3 (fits[1], fits[2]); the other
  // two fits document the d_s sigma and d_s alpha normalizations.
  bool ok = true;
  std::string detail;
  for (const auto& fit : rep.fits) {
    detail += fmt("%s: %.6f%+.6fi -> %ld/%ld (err %.1e); ", fit.relation.c_str(),
                  fit.fitted.real(), fit.fitted.imag(), fit.num, fit.den,
                  fit.snap_error);
  }
  ok = rep.fits.size() == 4 && rep.fits[1].snap_error <= 1e-3 &&
       rep.fits[1].imag_part <= 1e-3 && rep.fits[1].den <= 4 &&
       rep.fits[2].snap_error <= 1e-3 && rep.fits[2].imag_part <= 1e-3 &&
       rep.fits[2].den <= 4;
  report(10, "structural constants snap to small rationals", ok, detail);
}

// ---------------------------------------------------------------- C11
void criterion_11() {
  Profile P = Profile::fermi_factor();
  const double hy = 1e-3;
  std::vector<double> ss = {1e-2, 5e-3, 2.5e-3};

  // freeze the grid family across y and s
  FieldGridSpec spec;
  Weight w0 = Weight::from_profile(P, 0.0);

  auto sigma_at = [&](double y, double s) {
    return logdet_real(build_conjugated_operator(Weight::from_profile(P, y), s));
  };

  std::vector<double> s_dssigma, dysigma, s_u1, dy_u1;
  int sign = 0;
  for (double s : ss) {
    double hs = s / 20.0;
    double ds = (sigma_at(0.0, s + hs) - sigma_at(0.0, s - hs)) / (2.0 * hs);
    s_dssigma.push_back(std::abs(s * ds));
    dysigma.push_back(
        std::abs((sigma_at(hy, s) - sigma_at(-hy, s)) / (2.0 * hy)));

    FieldSet fc = assemble_fields(w0, s, spec);
    if (sign == 0) sign = calibrate_u1_sign(fc);
    s_u1.push_back(s * compute_U1(fc, sign).U1.norm());

    FieldSet fp = assemble_fields(Weight::from_profile(P, hy), s, spec);
    FieldSet fm = assemble_fields(Weight::from_profile(P, -hy), s, spec);
    Eigen::Matrix2cd d =
        (compute_U1(fp, sign).U1 - compute_U1(fm, sign).U1) / (2.0 * hy);
    dy_u1.push_back(d.norm());
  }

  auto ratios = [](const std::vector<double>& v) {
    return std::pair<double, double>{v[0] / v[1], v[1] / v[2]};
  };
  auto in_range = [](std::pair<double, double> r) {
    return r.first >= 1.4 && r.first <= 2.6 && r.second >= 1.4 && r.second <= 2.6;
  };

  auto r1 = ratios(s_dssigma), r2 = ratios(dysigma), r3 = ratios(s_u1),
       r4 = ratios(dy_u1);
  bool ok = in_range(r1) && in_range(r2) && in_range(r3) && in_range(r4);
  report(11, "small-s halving of the four operator quantities", ok,
         fmt("ratios per halving: |s d_s sigma| %.2f/%.2f, |d_y sigma| %.2f/%.2f, "
             "s||U1|| %.2f/%.2f, ||d_y U1|| %.2f/%.2f (need 1.4..2.6; the last "
             "tends to 1 because d_y U1 -> nonzero constant, norm %.3f at s=2.5e-3)",
             r1.first, r1.second, r2.first, r2.second, r3.first, r3.second, r4.first,
             r4.second, dy_u1.back()));
}

}  // namespace

int main() {
  std::printf("acceptance checks, tolerances as published\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  if (g_failures == 0) {
    std::printf("all criteria passed\n");
  } else {
    std::printf("%d criterion(s) failed\n", g_failures);
  }
  return g_failures;
}
