#include "sinedet/weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace sinedet {

namespace {

const double kSqrtPi = 1.7724538509055160273;

// 1/cosh^2 with overflow protection for large arguments.
double sech2(double x) {
    const double ax = std::abs(x);
    if (ax > 300.0) return 0.0;
    const double c = std::cosh(ax);
    return 1.0 / (c * c);
}

std::string format_tag(const char* fmt, double a) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, a);
    return buf;
}

}  // namespace

Profile Profile::fermi_factor() {
    Profile p;
    p.family_ = Family::fermi_factor;
    p.range01_ = true;
    return p;
}

Profile Profile::gaussian_square() {
    Profile p;
    p.family_ = Family::gaussian_square;
    p.range01_ = true;
    return p;
}

Profile Profile::tabulated(std::vector<double> r, std::vector<double> w, double clamp_radius) {
    if (r.size() != w.size()) throw std::invalid_argument("Profile::tabulated: r and w sizes differ");
    if (r.size() < 4) throw std::invalid_argument("Profile::tabulated: need at least 4 points");
    for (size_t i = 0; i + 1 < r.size(); ++i) {
        if (!(r[i + 1] > r[i])) throw std::invalid_argument("Profile::tabulated: r must be strictly ascending");
    }
    if (!(clamp_radius >= r.front())) throw std::invalid_argument("Profile::tabulated: clamp_radius below table");
    Profile p;
    p.family_ = Family::tabulated;
    p.range01_ = false;
    p.clamp_radius_ = clamp_radius;
    p.r_ = std::move(r);
    p.v_ = std::move(w);
    // Natural cubic spline: second derivatives from the standard tridiagonal solve.
    const size_t n = p.r_.size();
    p.m_.assign(n, 0.0);
    std::vector<double> u(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
        const double sig = (p.r_[i] - p.r_[i - 1]) / (p.r_[i + 1] - p.r_[i - 1]);
        const double denom = sig * p.m_[i - 1] + 2.0;
        p.m_[i] = (sig - 1.0) / denom;
        double t = (p.v_[i + 1] - p.v_[i]) / (p.r_[i + 1] - p.r_[i]) -
                   (p.v_[i] - p.v_[i - 1]) / (p.r_[i] - p.r_[i - 1]);
        u[i] = (6.0 * t / (p.r_[i + 1] - p.r_[i - 1]) - sig * u[i - 1]) / denom;
    }
    p.m_[n - 1] = 0.0;
    for (size_t k = n - 1; k-- > 1;) p.m_[k] = p.m_[k] * p.m_[k + 1] + u[k];
    p.m_[0] = 0.0;
    return p;
}

double Profile::value(double r) const {
    switch (family_) {
        case Family::fermi_factor: {
            if (r >= 0.0) {
                const double t = std::exp(-4.0 * r);
                return t / (1.0 + t);
            }
            return 1.0 / (std::exp(4.0 * r) + 1.0);
        }
        case Family::gaussian_square:
            return std::exp(-r * r);
        case Family::tabulated: {
            if (r >= clamp_radius_ || r > r_.back()) return 0.0;
            if (r <= r_.front()) return v_.front();
            const size_t hi = static_cast<size_t>(std::upper_bound(r_.begin(), r_.end(), r) - r_.begin());
            const size_t lo = hi - 1;
            const double h = r_[hi] - r_[lo];
            const double A = (r_[hi] - r) / h;
            const double B = (r - r_[lo]) / h;
            return A * v_[lo] + B * v_[hi] +
                   ((A * A * A - A) * m_[lo] + (B * B * B - B) * m_[hi]) * h * h / 6.0;
        }
    }
    return 0.0;
}

double Profile::derivative(double r) const {
    switch (family_) {
        case Family::fermi_factor: {
            const double w = value(r);
            return -4.0 * w * (1.0 - w);
        }
        case Family::gaussian_square:
            return -2.0 * r * std::exp(-r * r);
        case Family::tabulated: {
            if (r >= clamp_radius_ || r > r_.back()) return 0.0;
            if (r <= r_.front()) return 0.0;
            const size_t hi = static_cast<size_t>(std::upper_bound(r_.begin(), r_.end(), r) - r_.begin());
            const size_t lo = hi - 1;
            const double h = r_[hi] - r_[lo];
            const double A = (r_[hi] - r) / h;
            const double B = (r - r_[lo]) / h;
            return (v_[hi] - v_[lo]) / h +
                   h / 6.0 * (-(3.0 * A * A - 1.0) * m_[lo] + (3.0 * B * B - 1.0) * m_[hi]);
        }
    }
    return 0.0;
}

bool Profile::range01() const { return range01_; }

std::string Profile::describe() const {
    switch (family_) {
        case Family::fermi_factor: return "fermi_factor";
        case Family::gaussian_square: return "gaussian_square";
        case Family::tabulated: return format_tag("tabulated(n=%g)", static_cast<double>(r_.size()));
    }
    return "?";
}

Weight Weight::none() {
    Weight w;
    w.family_ = Family::none;
    return w;
}

Weight Weight::fermi(double alpha) {
    if (!(alpha > 0.0) || alpha > 1e3) throw std::invalid_argument("Weight::fermi: alpha must be in (0, 1e3]");
    Weight w;
    w.family_ = Family::fermi;
    w.param_ = alpha;
    return w;
}

Weight Weight::gaussian_square() {
    Weight w;
    w.family_ = Family::gaussian_square;
    return w;
}

Weight Weight::erf_window(double alpha) {
    if (!(alpha >= 0.25) || alpha > 8.0) throw std::invalid_argument("Weight::erf_window: alpha must be in [0.25, 8]");
    Weight w;
    w.family_ = Family::erf_window;
    w.param_ = alpha;
    return w;
}

Weight Weight::smoothed_indicator(double eps) {
    if (!(eps > 0.0) || eps > 0.2) throw std::invalid_argument("Weight::smoothed_indicator: eps must be in (0, 0.2]");
    Weight w;
    w.family_ = Family::smoothed_indicator;
    w.param_ = eps;
    return w;
}

Weight Weight::from_profile(const Profile& W, double y) {
    Weight w;
    w.family_ = Family::profile_induced;
    w.y_ = y;
    w.profile_ = std::make_shared<Profile>(W);
    return w;
}

double Weight::value(double u) const {
    switch (family_) {
        case Family::none:
            return 0.0;
        case Family::fermi: {
            const double t = std::exp(-4.0 * u * u);
            return t / (param_ + t);
        }
        case Family::gaussian_square: {
            const double u2 = u * u;
            return std::exp(-u2 * u2);
        }
        case Family::erf_window:
            return 0.5 * (std::erf(param_ * (u + 1.0)) - std::erf(param_ * (u - 1.0)));
        case Family::smoothed_indicator:
            return 0.5 * (std::tanh((u + 0.5) / param_) - std::tanh((u - 0.5) / param_));
        case Family::profile_induced:
            return profile_->value(u * u - y_);
    }
    return 0.0;
}

double Weight::derivative(double u) const {
    switch (family_) {
        case Family::none:
            return 0.0;
        case Family::fermi: {
            const double t = std::exp(-4.0 * u * u);
            const double d = param_ + t;
            return -8.0 * u * param_ * t / (d * d);
        }
        case Family::gaussian_square: {
            const double u2 = u * u;
            return -4.0 * u * u2 * std::exp(-u2 * u2);
        }
        case Family::erf_window: {
            const double ap = param_ * (u + 1.0);
            const double am = param_ * (u - 1.0);
            return param_ / kSqrtPi * (std::exp(-ap * ap) - std::exp(-am * am));
        }
        case Family::smoothed_indicator:
            return 0.5 / param_ * (sech2((u + 0.5) / param_) - sech2((u - 0.5) / param_));
        case Family::profile_induced:
            return 2.0 * u * profile_->derivative(u * u - y_);
    }
    return 0.0;
}

bool Weight::range01() const {
    if (family_ == Family::profile_induced) return profile_->range01();
    return true;
}

namespace {

// Shared tail-radius search: doubling scan for a bracket around the last
// crossing of |h| with tol, then bisection to ~1e-9.
template <typename H>
double tail_radius(H&& h, double tol) {
    double lo = 0.0;
    double hi = 0.5;
    int guard = 0;
    while (std::abs(h(hi)) > tol) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 60) throw std::runtime_error("truncation_radius: no decay below tol");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-9 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (std::abs(h(mid)) > tol) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

}  // namespace

double Weight::truncation_radius(double tol) const {
    if (family_ == Family::none) return 1.0;
    return tail_radius([this](double u) { return value(u); }, tol);
}

double Weight::derivative_truncation_radius(double tol) const {
    if (family_ == Family::none) return 1.0;
    return tail_radius([this](double u) { return derivative(u); }, tol);
}

std::string Weight::describe() const {
    switch (family_) {
        case Family::none: return "none";
        case Family::fermi: return format_tag("fermi(alpha=%g)", param_);
        case Family::gaussian_square: return "gaussian_square";
        case Family::erf_window: return format_tag("erf_window(alpha=%g)", param_);
        case Family::smoothed_indicator: return format_tag("smoothed_indicator(eps=%g)", param_);
        case Family::profile_induced:
            return profile_->describe() + format_tag(", y=%g", y_);
    }
    return "?";
}

}  // namespace sinedet
