#include "sinedet/operators.hpp"

#include <algorithm>
#include <cmath>

namespace sinedet {

namespace {

const double kPi = 3.14159265358979323846;

}  // namespace

double sine_kernel_value(double x, double y) {
    const double d = x - y;
    const double pd = kPi * d;
    if (std::abs(d) < 1e-6) {
        const double t = pd * pd;
        return 1.0 - t / 6.0 + t * t / 120.0;
    }
    return std::sin(pd) / pd;
}

double weight_feature_scale(const Weight& w) {
    switch (w.family()) {
        case Weight::Family::none:
            return 1e9;
        case Weight::Family::fermi:
        case Weight::Family::gaussian_square:
            return 0.5;
        case Weight::Family::erf_window:
            return std::min(0.5, 1.0 / w.param());
        case Weight::Family::smoothed_indicator:
            return w.param();
        case Weight::Family::profile_induced: {
            // w(u) = W(u^2 - y) compresses the profile's r-scale by the local
            // chain-rule factor 2u.  Measure it where w is still order one
            // (radius at 1e-2); the far tail carries no weight mass and does
            // not need this resolution.
            double feature_r = 0.5;
            if (w.profile()->family() == Profile::Family::fermi_factor) feature_r = 0.25;
            const double radius = w.truncation_radius(1e-2);
            return feature_r / std::max(1.0, 2.0 * radius);
        }
    }
    return 0.5;
}

Grid deformed_kernel_ugrid(const Weight& w, double s, double tol) {
    const double radius = w.truncation_radius(tol);
    const int order = 20;
    // Over the interval domain |x - y| <= s/pi, the integrand completes
    // s*radius/pi cosine periods; two periods per order-20 panel is ample.
    // The floor of three panels keeps weights with complex poles near the
    // axis (the fermi family) at full accuracy when s is small.
    const double periods = s * radius / kPi;
    int panels = std::max(3, static_cast<int>(std::ceil(periods / 2.0)) + 1);
    panels = std::max(panels, panels_for_spacing(0.0, radius, order, weight_feature_scale(w) / 3.0));
    return gauss_legendre(order, 0.0, radius, panels);
}

double deformed_kernel_value(double x, double y, const Weight& w, const Grid& ugrid) {
    const double d = 2.0 * kPi * (x - y);
    double acc = 0.0;
    for (size_t j = 0; j < ugrid.size(); ++j) {
        acc += ugrid.weights[j] * std::cos(d * ugrid.nodes[j]) * w.value(ugrid.nodes[j]);
    }
    return 2.0 * acc;
}

DiscreteOperator build_interval_operator(const Weight& w, double s, int order, int panels) {
    DiscreteOperator op;
    op.rep = Representation::interval_deformed;
    op.s = s;
    op.weight = w;
    const double half = s / (2.0 * kPi);
    const Grid ugrid = deformed_kernel_ugrid(w, s);
    if (panels < 1) {
        const double radius = ugrid.b;
        const double spacing = std::min({0.25, s / 10.0, 1.0 / (4.0 * radius)});
        panels = panels_for_spacing(-half, half, order, spacing);
    }
    op.grid = gauss_legendre(order, -half, half, panels);
    const size_t n = op.grid.size();
    // Weight values are hoisted out of the O(n^2) entry loop.
    std::vector<double> wu(ugrid.size());
    for (size_t j = 0; j < ugrid.size(); ++j) wu[j] = ugrid.weights[j] * w.value(ugrid.nodes[j]);
    std::vector<double> sq(n);
    for (size_t i = 0; i < n; ++i) sq[i] = std::sqrt(op.grid.weights[i]);
    op.matrix.resize(n, n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j <= i; ++j) {
            const double d = 2.0 * kPi * (op.grid.nodes[i] - op.grid.nodes[j]);
            double k = 0.0;
            for (size_t m = 0; m < wu.size(); ++m) k += wu[m] * std::cos(d * ugrid.nodes[m]);
            const cplx v = cplx(2.0 * k * sq[i] * sq[j], 0.0);
            op.matrix(i, j) = v;
            op.matrix(j, i) = v;
        }
    }
    return op;
}

DiscreteOperator build_conjugated_operator(const Weight& w, double s, int order, int panels,
                                           double lambda_cap) {
    DiscreteOperator op;
    op.rep = Representation::conjugated;
    op.s = s;
    op.weight = w;
    const double radius = lambda_cap > 0.0 ? lambda_cap : w.truncation_radius(1e-16);
    const double X = 1.1 * s * radius / kPi;
    if (panels < 1) {
        const double feature = weight_feature_scale(w) * s / kPi;
        const double spacing = std::min({0.25, s / 10.0, feature / 3.0});
        panels = panels_for_spacing(-X, X, order, spacing);
    }
    op.grid = gauss_legendre(order, -X, X, panels);
    const size_t n = op.grid.size();
    std::vector<cplx> kappa(n);
    for (size_t i = 0; i < n; ++i) {
        const double wv = w.value(kPi * op.grid.nodes[i] / s);
        kappa[i] = std::sqrt(cplx(wv, 0.0)) * std::sqrt(op.grid.weights[i]);
    }
    op.matrix.resize(n, n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j <= i; ++j) {
            const cplx v = kappa[i] * sine_kernel_value(op.grid.nodes[i], op.grid.nodes[j]) * kappa[j];
            op.matrix(i, j) = v;
            op.matrix(j, i) = v;
        }
    }
    return op;
}

DiscreteOperator build_classical_operator(cplx ell, double s, int order, int panels) {
    DiscreteOperator op;
    op.rep = Representation::classical_thinned;
    op.s = s;
    op.ell = ell;
    const double half = s / (2.0 * kPi);
    if (panels < 1) {
        const double spacing = std::min(0.25, s / 10.0);
        panels = panels_for_spacing(-half, half, order, spacing);
    }
    op.grid = gauss_legendre(order, -half, half, panels);
    const size_t n = op.grid.size();
    std::vector<double> sq(n);
    for (size_t i = 0; i < n; ++i) sq[i] = std::sqrt(op.grid.weights[i]);
    op.matrix.resize(n, n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j <= i; ++j) {
            const cplx v = ell * sine_kernel_value(op.grid.nodes[i], op.grid.nodes[j]) * sq[i] * sq[j];
            op.matrix(i, j) = v;
            op.matrix(j, i) = v;
        }
    }
    return op;
}

}  // namespace sinedet
