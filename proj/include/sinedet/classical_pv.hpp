#ifndef SINEDET_CLASSICAL_PV_HPP
#define SINEDET_CLASSICAL_PV_HPP

#include <vector>

#include "sinedet/fredholm.hpp"

namespace sinedet {

// nu(x) = x d/dx log det(1 - ell K^sin on [-x/2pi, x/2pi]) solves the sigma form
//   (x nu'')^2 + 4 (x nu' - nu) (x nu' - nu + (nu')^2) = 0
// with nu(x) = a1 x + a2 x^2 + a3 x^3 + a4 x^4 + O(x^5),
//   a1 = -ell/pi, a2 = -a1^2, a3 = a1^3, a4 = a1^2/9 - a1^4.
// The solver integrates the differentiated form, the third-order ODE
//   nu''' = -(x nu'' + 2x (B + C) + 4 B nu') / x^2,  B = x nu' - nu,
//   C = B + nu'^2,
// starting on the series; the quadratic relation above is a conserved
// invariant of this flow, which sidesteps the sqrt branch entirely (see the
// rhs comment in the source).  z = log det is carried alongside via z' = nu/x.
// Dense output is cubic Hermite on the accepted steps.
struct PVSolution {
  cplx ell;
  std::vector<double> x;
  std::vector<cplx> nu, nu_p, z;  // z = log det
  std::vector<cplx> nu_pp;        // nu'' (part of the state; dense output slopes)
  double max_residual = 0.0;      // largest accepted local error estimate
  cplx nu_at(double x_val) const;
  cplx nu_prime_at(double x_val) const;
  cplx logdet_at(double x_val) const;
};

PVSolution solve_sigma_pv(cplx ell, double x_max, double rel_tol = 1e-10,
                          double x_seed = 1e-3);

// Fredholm determinant of the thinned sine kernel, det(1 - ell K^sin) on
// [-s/2pi, s/2pi], panel-refined to tol.
DetResult thinned_gap_determinant(cplx ell, double s, double tol = 1e-11,
                                  int order = 16);

// Determinant route vs classical ODE route at a set of s values.  The
// determinant derivatives are centered differences; nu and nu' come from the
// ODE solution, log F from both routes directly.
struct ClassicalComparison {
  cplx ell;
  std::vector<double> s_values;
  std::vector<cplx> logdet_fredholm, logdet_ode;
  double max_diff = 0.0;      // max |logdet_fredholm - logdet_ode|
  double residual_nu = 0.0;       // max |s d_s log F - nu(s)|
  double residual_nu_prime = 0.0; // max |d_s(s d_s log F) - nu'(s)|
};

ClassicalComparison compare_classical(cplx ell, const std::vector<double>& s_values,
                                      double det_tol = 1e-11);

}  // namespace sinedet

#endif
