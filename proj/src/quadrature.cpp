#include "sinedet/quadrature.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace sinedet {

namespace {

// Cached reference rules, keyed by order.  Rules are expensive enough to build
// that recomputing them for every panel grid would dominate small problems.
const std::pair<std::vector<double>, std::vector<double>>& reference_rule(int order) {
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    auto it = cache.find(order);
    if (it == cache.end()) {
        std::vector<double> x, w;
        gauss_legendre_reference(order, x, w);
        it = cache.emplace(order, std::make_pair(std::move(x), std::move(w))).first;
    }
    return it->second;
}

// Largest gap between adjacent nodes of the composite rule, in units of the
// panel length.  Considers both in-panel gaps and the gap across a panel
// boundary (last node of one panel to first node of the next).
double max_gap_fraction(int order) {
    const auto& rule = reference_rule(order);
    const std::vector<double>& x = rule.first;
    double g = 0.0;
    for (size_t i = 0; i + 1 < x.size(); ++i) g = std::max(g, (x[i + 1] - x[i]) / 2.0);
    g = std::max(g, 1.0 - x.back());
    return g;
}

}  // namespace

void gauss_legendre_reference(int order, std::vector<double>& x, std::vector<double>& w) {
    if (order < 1) throw std::invalid_argument("gauss_legendre_reference: order must be >= 1");
    const int n = order;
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < m; ++i) {
        // Initial guess from the Chebyshev approximation to the i-th root.
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

Grid gauss_legendre(int order, double a, double b, int panels) {
    if (panels < 1) throw std::invalid_argument("gauss_legendre: panels must be >= 1");
    if (!(b > a)) throw std::invalid_argument("gauss_legendre: need b > a");
    const auto& rule = reference_rule(order);
    Grid g;
    g.a = a;
    g.b = b;
    g.order = order;
    g.panels = panels;
    g.nodes.reserve(static_cast<size_t>(order) * panels);
    g.weights.reserve(static_cast<size_t>(order) * panels);
    const double len = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * len;
        const double mid = lo + 0.5 * len;
        const double half = 0.5 * len;
        for (int i = 0; i < order; ++i) {
            g.nodes.push_back(mid + half * rule.first[i]);
            g.weights.push_back(half * rule.second[i]);
        }
    }
    return g;
}

int panels_for_spacing(double a, double b, int order, double spacing) {
    if (!(spacing > 0.0)) throw std::invalid_argument("panels_for_spacing: spacing must be positive");
    if (!(b > a)) throw std::invalid_argument("panels_for_spacing: need b > a");
    const double g = max_gap_fraction(order);
    const double needed = (b - a) * g / spacing;
    int panels = static_cast<int>(std::ceil(needed - 1e-12));
    return std::max(1, panels);
}

}  // namespace sinedet
