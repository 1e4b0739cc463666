#ifndef SINEDET_FREDHOLM_HPP
#define SINEDET_FREDHOLM_HPP

#include <functional>
#include <vector>

#include "sinedet/operators.hpp"

namespace sinedet {

struct DetResult {
  cplx log_det{0.0, 0.0};  // log det(I - M), imaginary part in (-pi, pi] per call
  cplx det{1.0, 0.0};
  cplx trace{0.0, 0.0};    // discrete trace of the kernel operator, sum_i M_ii
  bool singular = false;   // a pivot vanished: det == 0 to working precision
  double est_error = 0.0;  // filled by refine_until_converged
  int nodes = 0;
};

// log det(I - M) as the log-sum of LU pivots (partial pivoting), plus i*pi if
// the permutation is odd.  No determinant product is formed, so large grids
// cannot overflow.
DetResult log_det(const DiscreteOperator& op);

// Solve (I - M) x = b in the operator's symmetrized coordinates.
Eigen::VectorXcd resolvent_solve(const DiscreteOperator& op, const Eigen::VectorXcd& b);
Eigen::MatrixXcd resolvent_solve(const DiscreteOperator& op, const Eigen::MatrixXcd& b);

struct RefineResult {
  DetResult result;
  int panels = 0;              // panel count of the accepted level
  bool converged = false;
  std::vector<double> deltas;  // |log_det change| per doubling
};

// Double the panel count until the change in log_det stays below tol on two
// consecutive doublings (one suffices when the change is exactly zero); the
// returned result is the finest level computed.  Throws std::runtime_error
// with the delta history if max_levels doublings do not converge.
RefineResult refine_until_converged(const std::function<DiscreteOperator(int)>& build,
                                    int initial_panels, double tol, int max_levels = 8);

// Continuous branch of log det along an s-sweep: values are computed in
// ascending order and imaginary parts unwrapped by multiples of 2*pi whenever
// a jump exceeds pi.  The sweep starts near s = 0 where log det -> 0.
std::vector<DetResult> det_sweep(const std::function<DiscreteOperator(double)>& build_at_s,
                                 const std::vector<double>& s_values);

}  // namespace sinedet

#endif
