#ifndef SINEDET_OPERATORS_HPP
#define SINEDET_OPERATORS_HPP

#include <Eigen/Dense>
#include <complex>

#include "sinedet/quadrature.hpp"
#include "sinedet/weights.hpp"

namespace sinedet {

using cplx = std::complex<double>;

// Which integral-operator discretization a matrix came from.
//
//  interval_deformed : kernel K_w(x,y) = int e^{2pi i (x-y)u} w(u) du on [-s/2pi, s/2pi]
//  conjugated        : kernel sqrt(w_s(u)) K(u,v) sqrt(w_s(v)) on [-X, X], w_s(r) = w(pi r / s)
//  classical_thinned : kernel ell * K(x,y) on [-s/2pi, s/2pi]
//
// with K the sine kernel.  Both deformed discretizations represent the same
// determinant.  The interval one wins at moderate s (the domain has length
// s/pi, so matrices stay small); the conjugated one avoids Fourier integrals
// and scales better in s, and it is the one the field computations live on.
enum class Representation { interval_deformed, conjugated, classical_thinned };

// Nystrom matrix in symmetrized coordinates: M_ij = sqrt(omega_i) k(x_i,x_j) sqrt(omega_j).
// det(I - M) then approximates the Fredholm determinant and keeps the symmetry
// of the kernel.
struct DiscreteOperator {
  Eigen::MatrixXcd matrix;
  Grid grid;
  Representation rep = Representation::conjugated;
  double s = 0.0;
  cplx ell{1.0, 0.0};
  Weight weight = Weight::none();
};

// sin(pi(x-y)) / (pi(x-y)), with the Taylor series of sinc for |x-y| < 1e-6
// so the diagonal is smooth to machine precision.
double sine_kernel_value(double x, double y);

// Smallest length scale (in u) on which w varies appreciably.  Grid builders
// divide this by a few to pick node spacings that resolve the weight.
double weight_feature_scale(const Weight& w);

// K_w(x,y) = 2 int_0^Lambda cos(2pi(x-y)u) w(u) du for even w; `ugrid` is the
// quadrature grid on [0, Lambda], reused across matrix entries.
double deformed_kernel_value(double x, double y, const Weight& w, const Grid& ugrid);

// Quadrature grid on [0, Lambda(tol)] for the kernel's Fourier integral.
Grid deformed_kernel_ugrid(const Weight& w, double s, double tol = 1e-16);

// Default panel counts follow the spacing rule min(0.25, s/10) plus an
// oscillation bound (the kernel frequency is 2*pi*Lambda on the interval
// representation and pi on the conjugated one).
DiscreteOperator build_interval_operator(const Weight& w, double s, int order = 16, int panels = -1);

// lambda_cap > 0 freezes the weight-truncation radius (in the lambda variable
// u = pi*zeta/s) so sweeps over s or y share one grid family.
DiscreteOperator build_conjugated_operator(const Weight& w, double s, int order = 16, int panels = -1,
                                           double lambda_cap = -1.0);

DiscreteOperator build_classical_operator(cplx ell, double s, int order = 16, int panels = -1);

}  // namespace sinedet

#endif
