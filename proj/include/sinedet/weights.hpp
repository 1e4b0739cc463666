#ifndef SINEDET_WEIGHTS_HPP
#define SINEDET_WEIGHTS_HPP

#include <memory>
#include <string>
#include <vector>

namespace sinedet {

// Scalar profile W(r) on the real line, decaying fast as r -> +infinity.
// A profile induces a two-parameter family of even weights w(u) = W(u^2 - y).
class Profile {
 public:
  enum class Family { fermi_factor, gaussian_square, tabulated };

  // W(r) = 1 / (e^{4r} + 1)
  static Profile fermi_factor();
  // W(r) = e^{-r^2}
  static Profile gaussian_square();
  // Natural cubic spline through (r_i, W_i); W == 0 for r > clamp_radius and
  // extrapolates the boundary value for r below the table (callers keep the
  // sampled range inside the table, see weights tests).
  static Profile tabulated(std::vector<double> r, std::vector<double> w, double clamp_radius);

  double value(double r) const;
  double derivative(double r) const;
  bool range01() const;  // true if W maps into [0,1]
  Family family() const { return family_; }
  std::string describe() const;

 private:
  Profile() = default;
  Family family_ = Family::fermi_factor;
  bool range01_ = true;
  double clamp_radius_ = 0.0;
  // spline data (tabulated family)
  std::vector<double> r_, v_, m_;  // nodes, values, second derivatives
  friend class Weight;
};

// Even weight w(u).  Values and derivatives are closed-form per family; the
// only interpolation happens inside tabulated profiles.
class Weight {
 public:
  enum class Family { none, fermi, gaussian_square, erf_window, smoothed_indicator, profile_induced };

  // w == 0 (determinant of the identity).
  static Weight none();
  // w(u) = 1 / (alpha e^{4u^2} + 1), alpha in (0, 1e3]
  static Weight fermi(double alpha);
  // w(u) = e^{-u^4}
  static Weight gaussian_square();
  // w(z) = Phi(alpha(z+1)) - Phi(alpha(z-1)), Phi the Gaussian CDF wrt e^{-y^2}; alpha in [0.25, 8]
  static Weight erf_window(double alpha);
  // w(u) = (tanh((u+1/2)/eps) - tanh((u-1/2)/eps)) / 2, eps in (0, 0.2]
  static Weight smoothed_indicator(double eps);
  // w(u) = W(u^2 - y)
  static Weight from_profile(const Profile& W, double y);

  double value(double u) const;
  double derivative(double u) const;
  bool even() const { return true; }
  bool range01() const;
  // Smallest radius (to ~1e-9) past which |w| stays below tol, found by
  // doubling scan + bisection on the monotone tail.
  double truncation_radius(double tol) const;
  // Same for |w'|.
  double derivative_truncation_radius(double tol) const;

  Family family() const { return family_; }
  double param() const { return param_; }  // alpha or eps, family-dependent
  double y() const { return y_; }
  const Profile* profile() const { return profile_ ? profile_.get() : nullptr; }
  std::string describe() const;

 private:
  Weight() = default;
  Family family_ = Family::none;
  double param_ = 0.0;
  double y_ = 0.0;
  std::shared_ptr<const Profile> profile_;
};

}  // namespace sinedet

#endif
