#include "sinedet/zs.hpp"

#include <cmath>
#include <stdexcept>

namespace sinedet {

namespace {

const double kPi = 3.14159265358979323846;
const cplx kI(0.0, 1.0);

double default_lambda_cap(const Weight& w) {
    return std::max(1.1 * w.truncation_radius(1e-16), w.derivative_truncation_radius(1e-16) + 2.0);
}

// phi and psi at every lambda node without touching the FieldSet members, so
// the verification routines can take a const reference.
void phi_psi_arrays(const FieldSet& fs, Eigen::VectorXcd& phi, Eigen::VectorXcd& psi) {
    const size_t n = fs.zeta.size();
    phi.resize(static_cast<Eigen::Index>(n));
    psi.resize(static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i) {
        const double zi = fs.zeta.nodes[i];
        cplx c1(0.0, 0.0), c2(0.0, 0.0);
        for (size_t j = 0; j < n; ++j) {
            const cplx kw = fs.zeta.weights[j] * sine_kernel_value(zi, fs.zeta.nodes[j]) *
                            fs.sqrt_ws(static_cast<Eigen::Index>(j));
            c1 += kw * fs.F(static_cast<Eigen::Index>(j), 0);
            c2 += kw * fs.F(static_cast<Eigen::Index>(j), 1);
        }
        phi(static_cast<Eigen::Index>(i)) = std::exp(kI * kPi * zi) + 2.0 * kPi * kI * c1;
        psi(static_cast<Eigen::Index>(i)) = std::exp(-kI * kPi * zi) + 2.0 * kPi * kI * c2;
    }
}

}  // namespace

FieldSet assemble_fields(const Weight& w, double s, const FieldGridSpec& spec) {
    FieldSet fs;
    fs.s = s;
    fs.w = w;
    fs.spec = spec;
    if (fs.spec.lambda_cap <= 0.0) fs.spec.lambda_cap = default_lambda_cap(w);
    const double X = s * fs.spec.lambda_cap / kPi;
    if (fs.spec.panels < 1) {
        const double feature = weight_feature_scale(w) * s / kPi;
        const double spacing = std::min({0.25, s / 10.0, feature / 3.0});
        fs.spec.panels = panels_for_spacing(-X, X, fs.spec.order, spacing);
    }
    fs.zeta = gauss_legendre(fs.spec.order, -X, X, fs.spec.panels);
    const size_t n = fs.zeta.size();

    fs.lambda = fs.zeta;
    fs.lambda.a = -fs.spec.lambda_cap;
    fs.lambda.b = fs.spec.lambda_cap;
    for (size_t i = 0; i < n; ++i) {
        fs.lambda.nodes[i] = kPi * fs.zeta.nodes[i] / s;
        fs.lambda.weights[i] = kPi * fs.zeta.weights[i] / s;
    }

    fs.sqrt_ws.resize(static_cast<Eigen::Index>(n));
    fs.f.resize(static_cast<Eigen::Index>(n), 2);
    fs.g.resize(static_cast<Eigen::Index>(n), 2);
    for (size_t i = 0; i < n; ++i) {
        const double u = fs.zeta.nodes[i];
        const cplx sw = std::sqrt(cplx(w.value(kPi * u / s), 0.0));
        fs.sqrt_ws(static_cast<Eigen::Index>(i)) = sw;
        const cplx ep = std::exp(kI * kPi * u);
        const cplx em = std::exp(-kI * kPi * u);
        fs.f(static_cast<Eigen::Index>(i), 0) = sw / (2.0 * kPi * kI) * ep;
        fs.f(static_cast<Eigen::Index>(i), 1) = sw / (2.0 * kPi * kI) * em;
        fs.g(static_cast<Eigen::Index>(i), 0) = sw * em;
        fs.g(static_cast<Eigen::Index>(i), 1) = -sw * ep;
    }

    // Symmetrized Nystrom solve: one factorization serves all four right-hand
    // sides (two components each of f and g).
    DiscreteOperator op;
    op.rep = Representation::conjugated;
    op.s = s;
    op.weight = w;
    op.grid = fs.zeta;
    op.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::vector<double> sq(n);
    for (size_t i = 0; i < n; ++i) sq[i] = std::sqrt(fs.zeta.weights[i]);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j <= i; ++j) {
            const cplx v = sq[i] * fs.sqrt_ws(static_cast<Eigen::Index>(i)) *
                           sine_kernel_value(fs.zeta.nodes[i], fs.zeta.nodes[j]) *
                           fs.sqrt_ws(static_cast<Eigen::Index>(j)) * sq[j];
            op.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            op.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    }
    Eigen::MatrixXcd rhs(static_cast<Eigen::Index>(n), 4);
    for (size_t i = 0; i < n; ++i) {
        const Eigen::Index ii = static_cast<Eigen::Index>(i);
        rhs(ii, 0) = sq[i] * fs.f(ii, 0);
        rhs(ii, 1) = sq[i] * fs.f(ii, 1);
        rhs(ii, 2) = sq[i] * fs.g(ii, 0);
        rhs(ii, 3) = sq[i] * fs.g(ii, 1);
    }
    const Eigen::MatrixXcd sol = resolvent_solve(op, rhs);
    fs.F.resize(static_cast<Eigen::Index>(n), 2);
    fs.G.resize(static_cast<Eigen::Index>(n), 2);
    for (size_t i = 0; i < n; ++i) {
        const Eigen::Index ii = static_cast<Eigen::Index>(i);
        fs.F(ii, 0) = sol(ii, 0) / sq[i];
        fs.F(ii, 1) = sol(ii, 1) / sq[i];
        fs.G(ii, 0) = sol(ii, 2) / sq[i];
        fs.G(ii, 1) = sol(ii, 3) / sq[i];
    }

    fs.fg_products_.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const Eigen::Index ii = static_cast<Eigen::Index>(i);
        Eigen::Vector2cd Fv(fs.F(ii, 0), fs.F(ii, 1));
        Eigen::Vector2cd gv(fs.g(ii, 0), fs.g(ii, 1));
        fs.fg_products_[i] = Fv * gv.transpose();
    }
    return fs;
}

Eigen::Vector2cd FieldSet::f_at(double zeta_val) const {
    const cplx sw = std::sqrt(cplx(w.value(kPi * zeta_val / s), 0.0));
    Eigen::Vector2cd v;
    v(0) = sw / (2.0 * kPi * kI) * std::exp(kI * kPi * zeta_val);
    v(1) = sw / (2.0 * kPi * kI) * std::exp(-kI * kPi * zeta_val);
    return v;
}

Eigen::Vector2cd FieldSet::g_at(double zeta_val) const {
    const cplx sw = std::sqrt(cplx(w.value(kPi * zeta_val / s), 0.0));
    Eigen::Vector2cd v;
    v(0) = sw * std::exp(-kI * kPi * zeta_val);
    v(1) = -sw * std::exp(kI * kPi * zeta_val);
    return v;
}

Eigen::Vector2cd FieldSet::F_at(double zeta_val) const {
    const cplx sw = std::sqrt(cplx(w.value(kPi * zeta_val / s), 0.0));
    Eigen::Vector2cd acc = Eigen::Vector2cd::Zero();
    const size_t n = zeta.size();
    for (size_t j = 0; j < n; ++j) {
        const cplx kw = zeta.weights[j] * sine_kernel_value(zeta_val, zeta.nodes[j]) *
                        sqrt_ws(static_cast<Eigen::Index>(j));
        acc(0) += kw * F(static_cast<Eigen::Index>(j), 0);
        acc(1) += kw * F(static_cast<Eigen::Index>(j), 1);
    }
    return f_at(zeta_val) + sw * acc;
}

cplx FieldSet::phi_at(double lambda_val) const {
    const double zv = s * lambda_val / kPi;
    cplx acc(0.0, 0.0);
    const size_t n = zeta.size();
    for (size_t j = 0; j < n; ++j) {
        acc += zeta.weights[j] * sine_kernel_value(zv, zeta.nodes[j]) *
               sqrt_ws(static_cast<Eigen::Index>(j)) * F(static_cast<Eigen::Index>(j), 0);
    }
    return std::exp(kI * s * lambda_val) + 2.0 * kPi * kI * acc;
}

cplx FieldSet::psi_at(double lambda_val) const {
    const double zv = s * lambda_val / kPi;
    cplx acc(0.0, 0.0);
    const size_t n = zeta.size();
    for (size_t j = 0; j < n; ++j) {
        acc += zeta.weights[j] * sine_kernel_value(zv, zeta.nodes[j]) *
               sqrt_ws(static_cast<Eigen::Index>(j)) * F(static_cast<Eigen::Index>(j), 1);
    }
    return std::exp(-kI * s * lambda_val) + 2.0 * kPi * kI * acc;
}

namespace {

// p.v. integral of the matrix Cauchy density plus the Plemelj half-residue,
// i.e. the bracket of the boundary-value formula before the orientation sign.
Eigen::Matrix2cd cauchy_bracket(const FieldSet& fs, const std::vector<Eigen::Matrix2cd>& H,
                                double c) {
    const Grid& g = fs.zeta;
    const size_t n = g.size();
    const double span = g.b - g.a;
    const double coincide = 1e-9 * span;
    const auto H_of = [&fs](double z) -> Eigen::Matrix2cd {
        Eigen::Vector2cd Fv = fs.F_at(z);
        Eigen::Vector2cd gv = fs.g_at(z);
        return Fv * gv.transpose();
    };
    const Eigen::Matrix2cd Hc = H_of(c);
    // Derivative of the density at c for node-coincident terms.
    const double hstep = 1e-5 * span;
    const Eigen::Matrix2cd Hp = (H_of(c + hstep) - H_of(c - hstep)) / (2.0 * hstep);
    Eigen::Matrix2cd acc = Eigen::Matrix2cd::Zero();
    for (size_t j = 0; j < n; ++j) {
        const double d = g.nodes[j] - c;
        if (std::abs(d) < coincide) {
            acc += g.weights[j] * Hp;
        } else {
            acc += g.weights[j] * (H[j] - Hc) / d;
        }
    }
    acc += Hc * std::log((g.b - c) / (c - g.a));
    acc += kI * kPi * Hc;
    return acc;
}

}  // namespace

void reconstruct_Yplus(FieldSet& fs) {
    const size_t n = fs.zeta.size();
    if (fs.fg_products_.size() != n) throw std::logic_error("reconstruct_Yplus: assemble_fields first");
    // Calibrate the orientation against F = Y_+ f at a few central nodes.
    const size_t probes[3] = {n / 4, n / 2, (3 * n) / 4};
    double res_plus = 0.0, res_minus = 0.0;
    for (size_t k = 0; k < 3; ++k) {
        const size_t i = probes[k];
        const Eigen::Matrix2cd B = cauchy_bracket(fs, fs.fg_products_, fs.zeta.nodes[i]);
        const Eigen::Vector2cd fv(fs.f(static_cast<Eigen::Index>(i), 0), fs.f(static_cast<Eigen::Index>(i), 1));
        const Eigen::Vector2cd Fv(fs.F(static_cast<Eigen::Index>(i), 0), fs.F(static_cast<Eigen::Index>(i), 1));
        res_plus += ((Eigen::Matrix2cd::Identity() - B) * fv - Fv).norm();
        res_minus += ((Eigen::Matrix2cd::Identity() + B) * fv - Fv).norm();
    }
    fs.orientation = (res_plus <= res_minus) ? 1.0 : -1.0;
    fs.Yplus.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const Eigen::Matrix2cd B = cauchy_bracket(fs, fs.fg_products_, fs.zeta.nodes[i]);
        fs.Yplus[i] = Eigen::Matrix2cd::Identity() - fs.orientation * B;
    }
}

Eigen::Matrix2cd FieldSet::yplus_at(double zeta_val) const {
    if (orientation == 0.0) throw std::logic_error("yplus_at: reconstruct_Yplus first");
    const Eigen::Matrix2cd B = cauchy_bracket(*this, fg_products_, zeta_val);
    return Eigen::Matrix2cd::Identity() - orientation * B;
}

Eigen::Matrix2cd FieldSet::y_far(double zeta_val) const {
    if (orientation == 0.0) throw std::logic_error("y_far: reconstruct_Yplus first");
    Eigen::Matrix2cd acc = Eigen::Matrix2cd::Zero();
    for (size_t j = 0; j < zeta.size(); ++j) {
        acc += zeta.weights[j] * fg_products_[j] / (zeta.nodes[j] - zeta_val);
    }
    return Eigen::Matrix2cd::Identity() - orientation * acc;
}

void compute_phi_psi(FieldSet& fs) { phi_psi_arrays(fs, fs.phi, fs.psi); }

namespace {

// Moment integral (pi/s) int F g^T du on the discretization grid.
Eigen::Matrix2cd first_moment(const FieldSet& fs) {
    Eigen::Matrix2cd Y1 = Eigen::Matrix2cd::Zero();
    for (size_t j = 0; j < fs.zeta.size(); ++j) {
        const auto i = static_cast<Eigen::Index>(j);
        const Eigen::Vector2cd Fj = fs.F.row(i).transpose();
        const Eigen::Vector2cd gj = fs.g.row(i).transpose();
        Y1 += fs.zeta.weights[j] * (Fj * gj.transpose());
    }
    return (kPi / fs.s) * Y1;
}

}  // namespace

int calibrate_u1_sign(const FieldSet& fs, double* identity_residual) {
    const Eigen::Matrix2cd Y1 = first_moment(fs);
    const cplx p_plus = 2.0 * kI * Y1(0, 0);
    // Independent determinant route for d_s log F (its own default grid).
    const double h = std::min(1e-3, fs.s / 20.0);
    const double up = log_det(build_conjugated_operator(fs.w, fs.s + h)).log_det.real();
    const double um = log_det(build_conjugated_operator(fs.w, fs.s - h)).log_det.real();
    const double ds = (up - um) / (2.0 * h);
    const double r_plus = std::abs(p_plus + ds);
    const double r_minus = std::abs(-p_plus + ds);
    const int sign = (r_plus <= r_minus) ? 1 : -1;
    if (identity_residual) *identity_residual = std::min(r_plus, r_minus);
    return sign;
}

U1Coefficients compute_U1(const FieldSet& fs, int sign) {
    U1Coefficients out;
    out.U1 = static_cast<double>(sign) * first_moment(fs);
    out.alpha = 2.0 * out.U1(0, 0);
    out.beta = 2.0 * out.U1(0, 1);
    out.gamma = 2.0 * out.U1(1, 0);
    out.p = kI * out.alpha;
    out.q = kI * out.gamma;
    out.sign = sign;
    return out;
}

U1Coefficients compute_U1(const FieldSet& fs) {
    double resid = 0.0;
    const int sign = calibrate_u1_sign(fs, &resid);
    U1Coefficients out = compute_U1(fs, sign);
    out.identity_residual = resid;
    return out;
}

double TraceIdentityReport::max_residual() const {
    return std::max(std::max(orthogonality, beta_residual),
                    std::max(gamma_residual, even_orthogonality));
}

TraceIdentityReport verify_trace_identities(const FieldSet& fs, const U1Coefficients& u1) {
    TraceIdentityReport rep;
    Eigen::VectorXcd phi, psi;
    phi_psi_arrays(fs, phi, psi);
    const size_t n = fs.lambda.size();
    double N = 0.0;
    cplx i_orth(0.0, 0.0), i_phi2(0.0, 0.0), i_psi2(0.0, 0.0), i_even(0.0, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const Eigen::Index ii = static_cast<Eigen::Index>(i);
        const double wl = fs.lambda.weights[i];
        const double wp = fs.w.derivative(fs.lambda.nodes[i]);
        N += wl * std::norm(phi(ii)) * std::abs(wp);
        i_orth += wl * wp * phi(ii) * psi(ii);
        i_phi2 += wl * wp * phi(ii) * phi(ii);
        i_psi2 += wl * wp * psi(ii) * psi(ii);
        // The grid is symmetric about zero, so the mirrored node carries phi(-lambda).
        i_even += wl * wp * phi(ii) * phi(static_cast<Eigen::Index>(n - 1 - i));
    }
    rep.normalization = N;
    if (N <= 0.0) return rep;
    rep.orthogonality = std::abs(i_orth) / N;
    rep.beta_residual = std::abs(2.0 * kPi * fs.s * u1.beta + i_phi2) / N;
    rep.gamma_residual = std::abs(2.0 * kPi * fs.s * u1.gamma + i_psi2) / N;
    rep.even_orthogonality = std::abs(i_even) / N;
    return rep;
}

DynamicsReport verify_dynamics(const Weight& w, double s, const std::vector<double>& steps) {
    DynamicsReport rep;
    rep.steps = steps;
    FieldSet fs0 = assemble_fields(w, s);
    const FieldGridSpec frozen = fs0.spec;
    const U1Coefficients u1 = compute_U1(fs0);

    const double lp = w.derivative_truncation_radius(1e-16);
    std::vector<double> probes = {0.0};
    for (double frac : {0.15, 0.35, 0.55, 0.75, 0.95}) {
        probes.push_back(frac * lp);
        probes.push_back(-frac * lp);
    }
    std::vector<cplx> phi0(probes.size()), psi0(probes.size());
    for (size_t k = 0; k < probes.size(); ++k) {
        phi0[k] = fs0.phi_at(probes[k]);
        psi0[k] = fs0.psi_at(probes[k]);
    }

    for (double h : steps) {
        const FieldSet fp = assemble_fields(w, s + h, frozen);
        const FieldSet fm = assemble_fields(w, s - h, frozen);
        double worst = 0.0;
        for (size_t k = 0; k < probes.size(); ++k) {
            const double lam = probes[k];
            const cplx dphi = (fp.phi_at(lam) - fm.phi_at(lam)) / (2.0 * h);
            const cplx dpsi = (fp.psi_at(lam) - fm.psi_at(lam)) / (2.0 * h);
            const cplx r1 = dphi - (kI * lam * phi0[k] - kI * u1.beta * psi0[k]);
            const cplx r2 = dpsi - (kI * u1.gamma * phi0[k] - kI * lam * psi0[k]);
            worst = std::max({worst, std::abs(r1), std::abs(r2)});
        }
        rep.residuals.push_back(worst);
    }
    for (size_t k = 0; k + 1 < rep.residuals.size(); ++k) {
        rep.orders.push_back(std::log2(rep.residuals[k] / rep.residuals[k + 1]));
    }

    // d_s(s d_s log F) against the moment integral (1/pi) int lambda w' phi psi.
    const double h0 = 1e-3;
    const double cap_det = w.truncation_radius(1e-16);
    const DiscreteOperator probe_op = build_conjugated_operator(w, s - 2.0 * h0, 16, -1, cap_det);
    const int panels_det = probe_op.grid.panels;
    const double um = log_det(probe_op).log_det.real();
    const double u0 = log_det(build_conjugated_operator(w, s, 16, panels_det, cap_det)).log_det.real();
    const double up = log_det(build_conjugated_operator(w, s + 2.0 * h0, 16, panels_det, cap_det)).log_det.real();
    const double d_plus = (s + h0) * (up - u0) / (2.0 * h0);
    const double d_minus = (s - h0) * (u0 - um) / (2.0 * h0);
    const double A = (d_plus - d_minus) / (2.0 * h0);
    Eigen::VectorXcd phi, psi;
    phi_psi_arrays(fs0, phi, psi);
    cplx B(0.0, 0.0);
    for (size_t i = 0; i < fs0.lambda.size(); ++i) {
        const Eigen::Index ii = static_cast<Eigen::Index>(i);
        B += fs0.lambda.weights[i] * fs0.lambda.nodes[i] * fs0.w.derivative(fs0.lambda.nodes[i]) *
             phi(ii) * psi(ii);
    }
    B /= kPi;
    rep.second_logderiv_residual = std::abs(cplx(A, 0.0) - B);
    return rep;
}

LaxReport verify_lax(const Profile& W, double y, double s, const std::vector<double>& steps,
                     double hy_ratio) {
    LaxReport rep;
    rep.steps = steps;
    const double hy_max = steps.empty() ? 0.0 : steps.front() * hy_ratio;
    double cap = 0.0;
    for (double yy : {y - hy_max, y, y + hy_max}) {
        cap = std::max(cap, default_lambda_cap(Weight::from_profile(W, yy)));
    }
    FieldGridSpec spec;
    spec.lambda_cap = cap;
    FieldSet fs0 = assemble_fields(Weight::from_profile(W, y), s, spec);
    const FieldGridSpec frozen = fs0.spec;
    const int sign = calibrate_u1_sign(fs0);
    const cplx sc(s, 0.0);

    const double lp = Weight::from_profile(W, y).derivative_truncation_radius(1e-16);
    std::vector<double> probes = {0.0};
    for (double frac : {0.2, 0.45, 0.7}) {
        probes.push_back(frac * lp);
        probes.push_back(-frac * lp);
    }
    std::vector<cplx> phi0(probes.size()), psi0(probes.size());
    for (size_t k = 0; k < probes.size(); ++k) {
        phi0[k] = fs0.phi_at(probes[k]);
        psi0[k] = fs0.psi_at(probes[k]);
    }

    for (double h : steps) {
        const double hl = h;
        const double hy = h * hy_ratio;
        const FieldSet fp = assemble_fields(Weight::from_profile(W, y + hy), s, frozen);
        const FieldSet fm = assemble_fields(Weight::from_profile(W, y - hy), s, frozen);
        const U1Coefficients up = compute_U1(fp, sign);
        const U1Coefficients um = compute_U1(fm, sign);
        const cplx dyp = (up.p - um.p) / (2.0 * hy);
        const cplx dyq = (up.q - um.q) / (2.0 * hy);
        Eigen::Matrix2cd L;
        L(0, 0) = kI * (sc - dyp);
        L(0, 1) = kI * dyq;
        L(1, 0) = -kI * dyq;
        L(1, 1) = -kI * (sc - dyp);
        double worst = 0.0;
        for (size_t k = 0; k < probes.size(); ++k) {
            const double lam = probes[k];
            const cplx dl_phi = (fs0.phi_at(lam + hl) - fs0.phi_at(lam - hl)) / (2.0 * hl);
            const cplx dl_psi = (fs0.psi_at(lam + hl) - fs0.psi_at(lam - hl)) / (2.0 * hl);
            const cplx dy_phi = (fp.phi_at(lam) - fm.phi_at(lam)) / (2.0 * hy);
            const cplx dy_psi = (fp.psi_at(lam) - fm.psi_at(lam)) / (2.0 * hy);
            const cplx r1 = dl_phi + 2.0 * lam * dy_phi - (L(0, 0) * phi0[k] + L(0, 1) * psi0[k]);
            const cplx r2 = dl_psi + 2.0 * lam * dy_psi - (L(1, 0) * phi0[k] + L(1, 1) * psi0[k]);
            worst = std::max({worst, std::abs(r1), std::abs(r2)});
        }
        rep.residuals.push_back(worst);
    }
    for (size_t k = 0; k + 1 < rep.residuals.size(); ++k) {
        rep.orders.push_back(std::log2(rep.residuals[k] / rep.residuals[k + 1]));
    }
    return rep;
}

}  // namespace sinedet
