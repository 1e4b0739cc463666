#include "sinedet/classical_pv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sinedet {

namespace {

const double kPi = 3.14159265358979323846;

struct State {
    cplx nu, nu_p, nu_pp, z;
};

State operator+(const State& a, const State& b) {
    return {a.nu + b.nu, a.nu_p + b.nu_p, a.nu_pp + b.nu_pp, a.z + b.z};
}
State operator*(double c, const State& a) { return {c * a.nu, c * a.nu_p, c * a.nu_pp, c * a.z}; }

// Differentiated sigma form.  With B = x nu' - nu and C = B + nu'^2 the
// relation (x nu'')^2 + 4 B C = 0 differentiates to
//   2 nu'' [ x^2 nu''' + x nu'' + 2x (B + C) + 4 B nu' ] = 0,
// so the bracket vanishes along solutions.  Integrating the bracket avoids
// the square root of -4BC, whose value error degrades to O(sqrt(eps)) near
// turning points of nu''; the quadratic relation is conserved exactly by
// this flow when the seed satisfies it.
State rhs(double x, const State& y) {
    const cplx B = x * y.nu_p - y.nu;
    const cplx C = B + y.nu_p * y.nu_p;
    State d;
    d.nu = y.nu_p;
    d.nu_p = y.nu_pp;
    d.nu_pp = -(x * y.nu_pp + 2.0 * x * (B + C) + 4.0 * B * y.nu_p) / (x * x);
    d.z = y.nu / x;
    return d;
}

// Cubic Hermite on the bracketing accepted step.
cplx hermite(const std::vector<double>& xs, const std::vector<cplx>& v,
             const std::vector<cplx>& dv, double x) {
    if (x <= xs.front()) return v.front();
    if (x >= xs.back()) return v.back();
    const size_t hi = static_cast<size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    const size_t lo = hi - 1;
    const double h = xs[hi] - xs[lo];
    const double t = (x - xs[lo]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * v[lo] + (t3 - 2.0 * t2 + t) * h * dv[lo] +
           (-2.0 * t3 + 3.0 * t2) * v[hi] + (t3 - t2) * h * dv[hi];
}

}  // namespace

cplx PVSolution::nu_at(double x_val) const { return hermite(x, nu, nu_p, x_val); }

cplx PVSolution::nu_prime_at(double x_val) const { return hermite(x, nu_p, nu_pp, x_val); }

cplx PVSolution::logdet_at(double x_val) const {
    std::vector<cplx> zp(x.size());
    for (size_t i = 0; i < x.size(); ++i) zp[i] = nu[i] / x[i];
    return hermite(x, z, zp, x_val);
}

PVSolution solve_sigma_pv(cplx ell, double x_max, double rel_tol, double x_seed) {
    if (!(x_max > x_seed)) throw std::invalid_argument("solve_sigma_pv: x_max must exceed the seed");
    PVSolution sol;
    sol.ell = ell;

    // Series seed nu = a1 x + a2 x^2 + a3 x^3 + a4 x^4 + O(x^5); matching
    // powers in the sigma form gives a2 = -a1^2, a3 = a1^3, a4 = a1^2/9 - a1^4.
    const cplx a1 = -ell / kPi;
    const cplx a2 = -a1 * a1;
    const cplx a3 = a1 * a1 * a1;
    const cplx a4 = a1 * a1 / 9.0 - a1 * a1 * a1 * a1;
    double x = x_seed;
    State y;
    y.nu = ((((a4 * x) + a3) * x + a2) * x + a1) * x;
    y.nu_p = ((4.0 * a4 * x + 3.0 * a3) * x + 2.0 * a2) * x + a1;
    y.nu_pp = (12.0 * a4 * x + 6.0 * a3) * x + 2.0 * a2;
    y.z = (((a4 * x / 4.0 + a3 / 3.0) * x + a2 / 2.0) * x + a1) * x;

    const auto record = [&](double xx, const State& yy) {
        sol.x.push_back(xx);
        sol.nu.push_back(yy.nu);
        sol.nu_p.push_back(yy.nu_p);
        sol.nu_pp.push_back(yy.nu_pp);
        sol.z.push_back(yy.z);
    };
    record(x, y);

    // Cash-Karp embedded pair.
    static const double A[6][5] = {
        {0, 0, 0, 0, 0},
        {1.0 / 5, 0, 0, 0, 0},
        {3.0 / 40, 9.0 / 40, 0, 0, 0},
        {3.0 / 10, -9.0 / 10, 6.0 / 5, 0, 0},
        {-11.0 / 54, 5.0 / 2, -70.0 / 27, 35.0 / 27, 0},
        {1631.0 / 55296, 175.0 / 512, 575.0 / 13824, 44275.0 / 110592, 253.0 / 4096}};
    static const double C[6] = {0, 1.0 / 5, 3.0 / 10, 3.0 / 5, 1.0, 7.0 / 8};
    static const double B5[6] = {37.0 / 378, 0, 250.0 / 621, 125.0 / 594, 0, 512.0 / 1771};
    static const double B4[6] = {2825.0 / 27648, 0,          18575.0 / 48384,
                                 13525.0 / 55296, 277.0 / 14336, 1.0 / 4};

    const double h_max = 0.05;
    const double h_min = 1e-12;
    const double atol = 1e-14;
    double h = std::min(h_max, x_seed);
    int guard = 0;
    while (x < x_max - 1e-14) {
        if (++guard > 2000000) throw std::runtime_error("solve_sigma_pv: step count exceeded");
        h = std::min(h, x_max - x);
        State k[6];
        k[0] = rhs(x, y);
        for (int i = 1; i < 6; ++i) {
            State yi = y;
            for (int j = 0; j < i; ++j) yi = yi + (h * A[i][j]) * k[j];
            k[i] = rhs(x + C[i] * h, yi);
        }
        State y5 = y, y4 = y;
        for (int i = 0; i < 6; ++i) {
            y5 = y5 + (h * B5[i]) * k[i];
            y4 = y4 + (h * B4[i]) * k[i];
        }
        const double err_nu = std::abs(y5.nu - y4.nu);
        const double err_np = std::abs(y5.nu_p - y4.nu_p);
        const double err_npp = std::abs(y5.nu_pp - y4.nu_pp);
        const double err_z = std::abs(y5.z - y4.z);
        const double sc_nu = atol + rel_tol * std::max(std::abs(y.nu), std::abs(y5.nu));
        const double sc_np = atol + rel_tol * std::max(std::abs(y.nu_p), std::abs(y5.nu_p));
        const double sc_npp = atol + rel_tol * std::max(std::abs(y.nu_pp), std::abs(y5.nu_pp));
        const double sc_z = atol + rel_tol * std::max(std::abs(y.z), std::abs(y5.z));
        const double errnorm =
            std::max({err_nu / sc_nu, err_np / sc_np, err_npp / sc_npp, err_z / sc_z});

        if (errnorm <= 1.0) {
            x += h;
            y = y5;
            record(x, y);
            sol.max_residual = std::max({sol.max_residual, err_nu, err_np, err_z});
            const double grow = errnorm > 0.0 ? 0.9 * std::pow(errnorm, -0.2) : 5.0;
            h = std::min(h_max, h * std::min(5.0, std::max(1.0, grow)));
        } else {
            const double shrink = 0.9 * std::pow(errnorm, -0.25);
            h = std::max(h_min, h * std::max(0.2, std::min(0.9, shrink)));
            if (h <= h_min) throw std::runtime_error("solve_sigma_pv: step size underflow");
        }
    }
    return sol;
}

DetResult thinned_gap_determinant(cplx ell, double s, double tol, int order) {
    const auto build = [&](int p) { return build_classical_operator(ell, s, order, p); };
    return refine_until_converged(build, 1, tol).result;
}

ClassicalComparison compare_classical(cplx ell, const std::vector<double>& s_values,
                                      double det_tol) {
    ClassicalComparison cmp;
    cmp.ell = ell;
    cmp.s_values = s_values;
    double s_top = 0.0;
    for (double s : s_values) s_top = std::max(s_top, s);
    const PVSolution sol = solve_sigma_pv(ell, s_top + 0.05);

    const double h1 = 1e-3;
    const double h2 = 3e-3;
    for (double s : s_values) {
        const cplx u0 = thinned_gap_determinant(ell, s, det_tol).log_det;
        const cplx ode = sol.logdet_at(s);
        cmp.logdet_fredholm.push_back(u0);
        cmp.logdet_ode.push_back(ode);
        cmp.max_diff = std::max(cmp.max_diff, std::abs(u0 - ode));

        // Fourth-order five-point first derivative: the second-order stencil
        // leaves ~h^2 |nu'''|/6 of truncation, visible at the 1e-6 level.
        const cplx up1 = thinned_gap_determinant(ell, s + h1, det_tol).log_det;
        const cplx um1 = thinned_gap_determinant(ell, s - h1, det_tol).log_det;
        const cplx up2h1 = thinned_gap_determinant(ell, s + 2.0 * h1, det_tol).log_det;
        const cplx um2h1 = thinned_gap_determinant(ell, s - 2.0 * h1, det_tol).log_det;
        const cplx d = s * (um2h1 - 8.0 * um1 + 8.0 * up1 - up2h1) / (12.0 * h1);
        cmp.residual_nu = std::max(cmp.residual_nu, std::abs(d - sol.nu_at(s)));

        const cplx up2 = thinned_gap_determinant(ell, s + 2.0 * h2, det_tol).log_det;
        const cplx um2 = thinned_gap_determinant(ell, s - 2.0 * h2, det_tol).log_det;
        const cplx d_plus = (s + h2) * (up2 - u0) / (2.0 * h2);
        const cplx d_minus = (s - h2) * (u0 - um2) / (2.0 * h2);
        const cplx A = (d_plus - d_minus) / (2.0 * h2);
        cmp.residual_nu_prime = std::max(cmp.residual_nu_prime, std::abs(A - sol.nu_prime_at(s)));
    }
    return cmp;
}

}  // namespace sinedet
