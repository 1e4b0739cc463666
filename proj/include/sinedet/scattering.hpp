#ifndef SINEDET_SCATTERING_HPP
#define SINEDET_SCATTERING_HPP

#include <vector>

#include "sinedet/pde_lab.hpp"

namespace sinedet {

// Gaussian initial pulse f(y) = amplitude * exp(-(y - center)^2).
struct GaussianPulse {
  double amplitude = 1.0;
  double center = 0.0;
  double operator()(double y) const;
  double derivative(double y) const;
};

// Profile obtained from a decaying pulse by the explicit transform
//   W(r) = -2 int_0^inf f'(-u^2 - r) du,
// tabulated on a uniform r grid and exposed both as raw quadrature values and
// as a spline-backed Profile for the determinant machinery.
struct ScatteringPair {
  GaussianPulse pulse;
  std::vector<double> r, W_values;
  double W_at(double r_val) const;        // interpolated
  double W_quadrature(double r_val) const;  // direct quadrature, any r
  Profile profile() const;
};

ScatteringPair W_from_f(const GaussianPulse& pulse, double r_min = -3.0,
                        double r_max = 8.0, double dr = 0.01);

// Leading small-s data of the log-determinant for the induced weight:
//   c0(y) = -(2/pi) int_0^inf W(lambda^2 - y) dlambda,
// so that sigma(y, s) = c0(y) s + O(s^2).  For W built from a pulse f the
// quarter-plane polar reduction collapses the double integral to c0(y) = f(y).
struct SmallSData {
  double y = 0.0;
  double c0_quadrature = 0.0;   // the integral above
  double c0_richardson = 0.0;   // two-point extrapolation of sigma/s over s, s/2
  double pulse_value = 0.0;     // f(y), the closed-form polar reduction
  double defect = 0.0;          // |c0_quadrature - c0_richardson|
};

// Evaluates sigma/s on {s_base, s_base/2, s_base/4} and extrapolates linearly
// from the two smallest; the third point guards monotonicity.
SmallSData small_s_initial_data(const ScatteringPair& pair, double y,
                                double s_base = 1e-2);

// End-to-end consistency: start from a pulse, transform to W, build the
// determinant surface, and check (a) the polar identity c0(y) = f(y) and
// (b) that the surface satisfies the coupled PDE system.
struct RoundtripReport {
  std::vector<SmallSData> initial_data;
  double max_initial_defect = 0.0;  // sup_y |c0_richardson - f(y)|
  PdeReport pde;
};

RoundtripReport roundtrip_check(const GaussianPulse& pulse,
                                const std::vector<double>& ys,
                                const SurfaceSpec& surface_spec);

}  // namespace sinedet

#endif
