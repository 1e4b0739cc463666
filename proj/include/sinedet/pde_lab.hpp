#ifndef SINEDET_PDE_LAB_HPP
#define SINEDET_PDE_LAB_HPP

#include <vector>

#include "sinedet/zs.hpp"

namespace sinedet {

// Rectangular table of sigma(y, s) = log F for the profile-induced weight
// family w(u) = W(u^2 - y), with the derived fields
//   p = -d_s sigma,  q = sqrt(-d_s^2 sigma)
// on the interior stencil points.  Grids are uniform; the operator grid
// family is frozen across the whole table so that discretization error varies
// smoothly and finite differences of sigma stay clean.
struct SigmaSurface {
  std::vector<double> ys, ss;
  Eigen::MatrixXd sigma;      // rows: y index, cols: s index
  Eigen::MatrixXd p, q;       // NaN where the stencil does not fit
  double hy = 0.0, hs = 0.0;
  double max_imag = 0.0;      // largest |Im log F| seen (sanity, should be ~0)
  double value(int iy, int is) const { return sigma(iy, is); }
};

struct SurfaceSpec {
  double y0 = -2.0, y1 = 2.0, hy = 0.05;
  double s0 = 0.2, s1 = 3.0, hs = 0.02;
  FieldGridSpec grid;  // lambda_cap < 0: frozen at the max over the y range
};

SigmaSurface build_sigma_surface(const Profile& W, const SurfaceSpec& spec);

// Fill surface.p and surface.q from centered differences in s, taking the
// branch of the square root that keeps q continuous along each y row.
void extract_p_q(SigmaSurface& surface);

// Residuals of the three PDE forms on the surface, evaluated with centered
// second-order stencils at stride m (effective steps m*hy, m*hs):
//   sigma form:  (d_s^2 d_y sigma)^2
//                  = 4 d_s^2 sigma (-2 s d_s d_y sigma + 2 d_y sigma
//                                   - (d_s d_y sigma)^2)
//   q form:      d_s( d_s d_y q / (2q) ) = d_y(q^2) - 1
//   coupled:     d_y d_s q + 2 q (s - d_y p) = 0
// Residuals are normalized per form by the largest magnitude among the terms
// entering it, so they are relative and comparable across strides.
struct PdeStrideResult {
  int stride = 1;
  double sigma_form_max = 0.0, sigma_form_median = 0.0;
  double q_form_max = 0.0, q_form_median = 0.0;
  double coupled_max = 0.0, coupled_median = 0.0;
};

struct PdeReport {
  std::vector<PdeStrideResult> strides;
  // log2 ratio of the median residuals of the last stride pair, divided by
  // the log2 stride span (2.0 means clean second order)
  double sigma_form_order = 0.0;
  double q_form_order = 0.0;
  double coupled_order = 0.0;
};

// Per-node normalized residuals of the three forms at one stride, NaN where
// the stencil does not fit, q^2 <= 0, or |q| falls below q_floor.
struct PdeResidualFields {
  Eigen::MatrixXd sigma_form, q_form, coupled;
};

PdeResidualFields pde_residual_fields(const SigmaSurface& surface, int stride = 1,
                                      double q_floor = 1e-3);

PdeReport pde_residuals(const SigmaSurface& surface,
                        const std::vector<int>& strides = {4, 2, 1},
                        double q_floor = 1e-3);

// One U1 snapshot on the (y, s) rectangle, with the centered s-derivative of
// alpha carried along for the d_s alpha = i gamma^2 calibration.
struct U1Sample {
  double y = 0.0, s = 0.0;
  U1Coefficients u1;
  cplx ds_alpha;
  cplx ds_sigma;   // -p from the determinant side, same grid family
  cplx ds2_sigma;  // centered second difference of log F
};

std::vector<U1Sample> u1_sweep(const Profile& W, const std::vector<double>& ys,
                               const std::vector<double>& ss,
                               const FieldGridSpec& spec = {}, double ds_step = 1e-3);

// Least-squares fit of the proportionality constant in each structural
// relation, with the real part snapped to the nearest rational of denominator
// at most max_den.  The relations tie the determinant surface to the dressed
// moment entries:
//   d_s sigma      = c * (i [U1]_11)     expect c = -2
//   q_surface      = c * (i gamma)       expect c = +-1 (sign is a branch)
//   d_s^2 sigma    = c * gamma^2         expect c = 1
//   d_s alpha      = c * (i gamma^2)     expect c = 1
struct CalibrationFit {
  std::string relation;
  cplx fitted;
  long num = 0, den = 1;
  double snap_error = 0.0;    // |Re(fitted) - num/den|
  double imag_part = 0.0;     // |Im(fitted)|
  double rel_residual = 0.0;  // lsq misfit relative to the data norm
};

struct CalibrationReport {
  std::vector<CalibrationFit> fits;
  bool all_snapped(double tol, long max_den = 4) const;
};

CalibrationReport calibrate_constants(const std::vector<U1Sample>& samples,
                                      long max_den = 4);

}  // namespace sinedet

#endif
