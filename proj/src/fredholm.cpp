#include "sinedet/fredholm.hpp"

#include <Eigen/LU>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace sinedet {

namespace {

const double kPi = 3.14159265358979323846;

// Fold an angle into (-pi, pi].
double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

Eigen::MatrixXcd identity_minus(const DiscreteOperator& op) {
    Eigen::MatrixXcd A = -op.matrix;
    A.diagonal().array() += cplx(1.0, 0.0);
    return A;
}

}  // namespace

DetResult log_det(const DiscreteOperator& op) {
    DetResult r;
    const Eigen::Index n = op.matrix.rows();
    r.nodes = static_cast<int>(n);
    r.trace = op.matrix.trace();
    if (n == 0) return r;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(identity_minus(op));
    const auto& diag = lu.matrixLU().diagonal();
    const double scale = op.matrix.cwiseAbs().maxCoeff() + 1.0;
    cplx acc(0.0, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const cplx piv = diag(i);
        if (std::abs(piv) < 1e-300 * scale) {
            r.singular = true;
            r.det = cplx(0.0, 0.0);
            r.log_det = cplx(-std::numeric_limits<double>::infinity(), 0.0);
            return r;
        }
        acc += std::log(piv);
    }
    // Permutation parity contributes a factor (-1)^t, i.e. i*pi per transposition.
    int transpositions = 0;
    const auto& perm = lu.permutationP().indices();
    std::vector<bool> seen(static_cast<size_t>(n), false);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (seen[static_cast<size_t>(i)]) continue;
        Eigen::Index j = i;
        int len = 0;
        while (!seen[static_cast<size_t>(j)]) {
            seen[static_cast<size_t>(j)] = true;
            j = perm(j);
            ++len;
        }
        transpositions += len - 1;
    }
    if (transpositions % 2 != 0) acc += cplx(0.0, kPi);
    r.log_det = cplx(acc.real(), wrap_angle(acc.imag()));
    r.det = std::exp(r.log_det);
    return r;
}

Eigen::VectorXcd resolvent_solve(const DiscreteOperator& op, const Eigen::VectorXcd& b) {
    return identity_minus(op).partialPivLu().solve(b);
}

Eigen::MatrixXcd resolvent_solve(const DiscreteOperator& op, const Eigen::MatrixXcd& b) {
    return identity_minus(op).partialPivLu().solve(b);
}

RefineResult refine_until_converged(const std::function<DiscreteOperator(int)>& build,
                                    int initial_panels, double tol, int max_levels) {
    RefineResult out;
    int panels = std::max(1, initial_panels);
    DetResult coarse = log_det(build(panels));
    int successes = 0;
    for (int level = 0; level < max_levels; ++level) {
        const int fine_panels = 2 * panels;
        DetResult fine = log_det(build(fine_panels));
        const double delta = std::abs(fine.log_det - coarse.log_det);
        out.deltas.push_back(delta);
        // Converged once the doubling delta stays under tol twice in a row.
        // A delta of exactly zero means the doubling changed nothing at
        // double precision, so one occurrence settles it.
        successes = delta < tol ? successes + 1 : 0;
        if ((successes >= 2) || (delta == 0.0)) {
            fine.est_error = delta;
            out.result = fine;
            out.panels = fine_panels;
            out.converged = true;
            return out;
        }
        panels = fine_panels;
        coarse = fine;
    }
    std::string msg = "refine_until_converged: no convergence; deltas =";
    char buf[32];
    for (double d : out.deltas) {
        std::snprintf(buf, sizeof(buf), " %.3e", d);
        msg += buf;
    }
    throw std::runtime_error(msg);
}

std::vector<DetResult> det_sweep(const std::function<DiscreteOperator(double)>& build_at_s,
                                 const std::vector<double>& s_values) {
    std::vector<DetResult> out;
    out.reserve(s_values.size());
    double prev_imag = 0.0;
    for (size_t i = 0; i < s_values.size(); ++i) {
        if (i > 0 && !(s_values[i] > s_values[i - 1])) {
            throw std::invalid_argument("det_sweep: s_values must be strictly ascending");
        }
        DetResult r = log_det(build_at_s(s_values[i]));
        double im = r.log_det.imag();
        im += 2.0 * kPi * std::round((prev_imag - im) / (2.0 * kPi));
        r.log_det = cplx(r.log_det.real(), im);
        r.det = std::exp(r.log_det);
        prev_imag = im;
        out.push_back(r);
    }
    return out;
}

}  // namespace sinedet
