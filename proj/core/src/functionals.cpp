#include "bnls/functionals.hpp"

#include <cmath>
#include <limits>

namespace bnls {

double gamma_p(int N, double p) {
    if (N < 1) throw regime_error("gamma_p: N must be >= 1");
    if (!(p > 2.0)) throw regime_error("gamma_p: p must exceed 2");
    return N * (p - 2.0) / (4.0 * p);
}

double mass_critical_exponent(int N) { return 2.0 + 8.0 / N; }

double sobolev_critical_exponent(int N) {
    if (N <= 4) return std::numeric_limits<double>::infinity();
    return 2.0 * N / (N - 4.0);
}

ProblemParams::ProblemParams(int N_, double p_, double mu_, double a_)
    : N(N_), p(p_), mu(mu_), a(a_) {
    if (N < 1) throw structural_error("ProblemParams: N must be >= 1");
    if (!(p > 2.0)) throw structural_error("ProblemParams: p must exceed 2");
    p_star = sobolev_critical_exponent(N);
    if (p > p_star * (1.0 + 1e-14))
        throw structural_error("ProblemParams: p beyond the Sobolev critical exponent");
    if (mu < 0.0) throw structural_error("ProblemParams: mu must be >= 0");
    if (!(a > 0.0)) throw structural_error("ProblemParams: mass a must be positive");
    gamma_p = bnls::gamma_p(N, p);
    p_bar = mass_critical_exponent(N);
}

double energy_scalars(double A, double G, double P, const ProblemParams& prm) {
    return 0.5 * A - 0.5 * prm.mu * G - P / prm.p;
}

double pohozaev_scalars(double A, double G, double P, const ProblemParams& prm) {
    return 2.0 * A - prm.mu * G - 2.0 * prm.gamma_p * P;
}

double phi_value(double s, double A, double G, double P, const ProblemParams& prm) {
    const double e = 2.0 * prm.p * prm.gamma_p;
    return 0.5 * std::pow(s, 4) * A - 0.5 * prm.mu * s * s * G -
           std::pow(s, e) / prm.p * P;
}

double phi_dd(double s, double A, double G, double P, const ProblemParams& prm) {
    const double e = 2.0 * prm.p * prm.gamma_p;
    return 6.0 * s * s * A - prm.mu * G -
           2.0 * prm.gamma_p * (e - 1.0) * std::pow(s, e - 2.0) * P;
}

double energy(const Field& u, const ProblemParams& prm) {
    const FieldNorms n = field_norms(u, prm.p);
    return energy_scalars(n.bilap2, n.grad2, n.lp, prm);
}

double pohozaev(const Field& u, const ProblemParams& prm) {
    const FieldNorms n = field_norms(u, prm.p);
    return pohozaev_scalars(n.bilap2, n.grad2, n.lp, prm);
}

double action(const Field& u, double lambda, const ProblemParams& prm) {
    const FieldNorms n = field_norms(u, prm.p);
    return energy_scalars(n.bilap2, n.grad2, n.lp, prm) + 0.5 * lambda * n.mass2;
}

Field dilate(const Field& u, double s) {
    if (!(s > 0.0)) throw structural_error("dilate: scale must be positive");
    std::vector<cplx> vals = u.grid->resample_scaled(u.data(), s);
    const double factor = std::pow(s, 0.5 * u.grid->dim());
    for (cplx& z : vals) z *= factor;
    Field out(u.grid, std::move(vals));
    check_finite(out, "dilate");
    return out;
}

namespace {

// f~(s) = 2 s^2 A - 2 gamma_p s^{2 p gamma_p - 2} P - mu G; phi'(s) = s f~(s)
struct FTilde {
    double A, G, P, two_gp, e;  // e = 2 p gamma_p - 2
    double mu;
    double operator()(double s) const {
        return 2.0 * s * s * A - two_gp * std::pow(s, e) * P - mu * G;
    }
    double deriv(double s) const {
        return 4.0 * s * A - two_gp * e * std::pow(s, e - 1.0) * P;
    }
};

double refine_root(const FTilde& f, double lo, double hi) {
    // bracketed bisection to relative width 1e-8, then Newton polish
    double flo = f(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo < 1e-8 * mid) break;
        const double fm = f(mid);
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {
        const double d = f.deriv(s);
        if (d == 0.0) break;
        s -= f(s) / d;
    }
    return s;
}

}  // namespace

FiberingDiagnostics fibering_scalars(double A, double G, double P,
                                     const ProblemParams& prm) {
    const double pg = prm.p * prm.gamma_p;
    if (pg <= 2.0 + 1e-14)
        throw regime_error("fibering: requires p gamma_p > 2 (p above the mass-critical exponent)");
    if (!(A > 0.0) || !(P > 0.0))
        throw structural_error("fibering: needs ||Delta u|| > 0 and ||u||_p > 0");

    FiberingDiagnostics d;
    d.A = A;
    d.G = G;
    d.P = P;

    const double e = 2.0 * pg - 2.0;
    d.s_tilde = std::pow(A / (prm.gamma_p * (pg - 1.0) * P), 1.0 / (2.0 * (pg - 2.0)));

    if (prm.mu == 0.0) {
        // limit problem: phi' has the single positive zero t_u (a maximum)
        const double t = std::pow(A / (prm.gamma_p * P), 1.0 / (2.0 * pg - 4.0));
        d.f_tilde_max = 2.0 * d.s_tilde * d.s_tilde * A -
                        2.0 * prm.gamma_p * std::pow(d.s_tilde, e) * P;
        d.s_minus = t;
        d.phi_dd_minus = phi_dd(t, A, G, P, prm);
        return d;
    }

    FTilde f{A, G, P, 2.0 * prm.gamma_p, e, prm.mu};
    d.f_tilde_max = f(d.s_tilde);
    if (d.f_tilde_max <= 0.0) return d;  // no roots: u cannot be projected

    d.s_plus = refine_root(f, 1e-12 * d.s_tilde, d.s_tilde);
    double hi = 2.0 * d.s_tilde;
    while (f(hi) > 0.0) hi *= 2.0;
    d.s_minus = refine_root(f, d.s_tilde, hi);
    d.phi_dd_plus = phi_dd(*d.s_plus, A, G, P, prm);
    d.phi_dd_minus = phi_dd(*d.s_minus, A, G, P, prm);
    return d;
}

FiberingDiagnostics fibering(const Field& u, const ProblemParams& prm) {
    const FieldNorms n = field_norms(u, prm.p);
    return fibering_scalars(n.bilap2, n.grad2, n.lp, prm);
}

namespace {

// dilating to the root and re-extracting norms leaves an interpolation-sized
// mismatch, so the projection iterates the root map until it is a fixed point
Field project_iterate(const Field& u, const ProblemParams& prm, bool plus) {
    Field v = u;
    for (int round = 0; round < 8; ++round) {
        const FiberingDiagnostics d = fibering(v, prm);
        const std::optional<double>& s = plus ? d.s_plus : d.s_minus;
        if (!s)
            throw projection_error(
                plus ? "project_plus: fibering map has no critical points"
                     : "project_minus: fibering map has no critical points",
                d.f_tilde_max);
        if (std::abs(*s - 1.0) < 1e-13) break;
        v = dilate(v, *s);
    }
    return v;
}

}  // namespace

Field project_plus(const Field& u, const ProblemParams& prm) {
    if (prm.mu <= 0.0)
        throw regime_error("project_plus: requires mu > 0 (no local minimum otherwise)");
    return project_iterate(u, prm, true);
}

Field project_minus(const Field& u, const ProblemParams& prm) {
    return project_iterate(u, prm, false);
}

double nehari_scale(const Field& u, double lambda, const ProblemParams& prm) {
    const FieldNorms n = field_norms(u, prm.p);
    const double quad = n.bilap2 - prm.mu * n.grad2 + lambda * n.mass2;
    if (!(n.lp > 0.0)) throw structural_error("nehari_scale: ||u||_p vanishes");
    if (quad <= 0.0)
        throw regime_error("nehari_scale: quadratic form not positive (frequency too small)");
    return std::pow(quad / n.lp, 1.0 / (prm.p - 2.0));
}

double multiplier(const Field& u, const ProblemParams& prm) {
    const FieldNorms n = field_norms(u, prm.p);
    const double mass = std::sqrt(n.mass2);
    if (std::abs(mass - prm.a) > 1e-8 * prm.a)
        throw consistency_error("multiplier: field is off the mass constraint");
    return (-n.bilap2 + prm.mu * n.grad2 + n.lp) / (prm.a * prm.a);
}

Field grad_energy(const Field& u, const ProblemParams& prm, bool tangent) {
    Field lap(u.grid), bilap(u.grid);
    u.grid->apply_laplacian(u.data(), lap.data());
    u.grid->apply_laplacian(lap.data(), bilap.data());
    Field g(u.grid);
    const double pm2 = prm.p - 2.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double amp = std::abs(u.values[i]);
        g.values[i] = bilap.values[i] + prm.mu * lap.values[i] -
                      std::pow(amp, pm2) * u.values[i];
    }
    if (tangent) {
        const double m2 = u.grid->quad_norm2sq(u.data());
        if (m2 <= 0.0)
            throw structural_error("grad_energy: tangent projection of the zero field");
        const double c = u.grid->quad_inner(g.data(), u.data()).real() / m2;
        for (std::size_t i = 0; i < u.size(); ++i) g.values[i] -= c * u.values[i];
    }
    check_finite(g, "grad_energy");
    return g;
}

}  // namespace bnls
