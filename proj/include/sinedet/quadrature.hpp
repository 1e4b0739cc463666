#ifndef SINEDET_QUADRATURE_HPP
#define SINEDET_QUADRATURE_HPP

#include <cmath>
#include <complex>
#include <vector>

namespace sinedet {

// Composite Gauss-Legendre grid on [a,b]: `panels` equal subintervals,
// `order` nodes per panel.  Nodes are stored in ascending order, so on a
// symmetric interval node i mirrors node size()-1-i.
struct Grid {
  std::vector<double> nodes;
  std::vector<double> weights;
  double a = 0.0;
  double b = 0.0;
  int order = 0;
  int panels = 0;

  std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre nodes/weights on [-1,1] (Newton iteration on P_n).
void gauss_legendre_reference(int order, std::vector<double>& x, std::vector<double>& w);

Grid gauss_legendre(int order, double a, double b, int panels = 1);

// Smallest panel count for which the largest gap between adjacent nodes of the
// composite rule (including gaps across panel boundaries) does not exceed `spacing`.
int panels_for_spacing(double a, double b, int order, double spacing);

template <typename F>
auto integrate(F&& f, const Grid& g) -> decltype(f(0.0)) {
  decltype(f(0.0)) acc{};
  for (std::size_t i = 0; i < g.size(); ++i) acc += g.weights[i] * f(g.nodes[i]);
  return acc;
}

template <typename T>
T weighted_sum(const std::vector<T>& values, const Grid& g) {
  T acc{};
  for (std::size_t i = 0; i < g.size(); ++i) acc += g.weights[i] * values[i];
  return acc;
}

// Principal-value integral  p.v. int_a^b h(u)/(u-c) du  for c strictly inside (a,b),
// by singularity subtraction:
//   int (h(u)-h(c))/(u-c) du + h(c) * log((b-c)/(c-a)).
// The subtracted integrand is smooth, so the grid's accuracy carries over.  When a
// node coincides with c (difference quotient 0/0) the limit h'(c) is used, estimated
// by a small centered difference.
template <typename H>
auto pv_integrate(H&& h, const Grid& g, double c) -> decltype(h(0.0)) {
  using R = decltype(h(0.0));
  const double span = g.b - g.a;
  const double coincide = 1e-9 * span;
  const R hc = h(c);
  R acc{};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = g.nodes[i] - c;
    R quo;
    if (std::abs(d) < coincide) {
      const double step = 1e-5 * span;
      quo = (h(c + step) - h(c - step)) / (2.0 * step);
    } else {
      quo = (h(g.nodes[i]) - hc) / d;
    }
    acc += g.weights[i] * quo;
  }
  return acc + hc * std::log((g.b - c) / (c - g.a));
}

}  // namespace sinedet

#endif
