#include "bnls/thresholds.hpp"

#include <cmath>

namespace bnls {

namespace {

void require_supercritical(const ProblemParams& prm, const char* who) {
    if (prm.p * prm.gamma_p <= 2.0 + 1e-14)
        throw regime_error(std::string(who) + ": requires p gamma_p > 2");
}

template <typename F, typename D>
double bisect_newton(F f, D df, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo < 1e-10 * std::max(1.0, mid)) break;
        const double fm = f(mid);
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
        const double d = df(s);
        if (d == 0.0) break;
        const double step = f(s) / d;
        s -= step;
        if (!(s > lo * 0.5) || !(s < hi * 2.0)) { s = 0.5 * (lo + hi); break; }
    }
    return s;
}

}  // namespace

double h_a(double s, double a, const ProblemParams& prm, double C_Np) {
    const double Cp = std::pow(C_Np, prm.p);
    return 0.5 * s - 0.5 * prm.mu * a -
           Cp * std::pow(a, prm.p * (1.0 - prm.gamma_p)) *
               std::pow(s, prm.p * prm.gamma_p - 1.0) / prm.p;
}

double rho_a(double a, const ProblemParams& prm, double C_Np) {
    require_supercritical(prm, "rho_a");
    if (!(C_Np > 0.0)) throw structural_error("rho_a: C_Np must be positive");
    const double pg = prm.p * prm.gamma_p;
    const double Cp = std::pow(C_Np, prm.p);
    return std::pow(prm.p * std::pow(a, prm.p * (prm.gamma_p - 1.0)) /
                        (2.0 * Cp * (pg - 1.0)),
                    1.0 / (pg - 2.0));
}

double h_a_max(double a, const ProblemParams& prm, double C_Np) {
    const double pg = prm.p * prm.gamma_p;
    return (pg - 2.0) / (2.0 * (pg - 1.0)) * rho_a(a, prm, C_Np) - 0.5 * prm.mu * a;
}

double a0_threshold(const ProblemParams& prm, double C_Np) {
    require_supercritical(prm, "a0");
    if (!(prm.mu > 0.0)) throw regime_error("a0: requires mu > 0");
    const double pg = prm.p * prm.gamma_p;
    const double Cp = std::pow(C_Np, prm.p);
    return std::pow((pg - 2.0) / (prm.mu * (pg - 1.0)), (pg - 2.0) / (prm.p - 2.0)) *
           std::pow(prm.p / (2.0 * Cp * (pg - 1.0)), 1.0 / (prm.p - 2.0));
}

double C0_threshold(const ProblemParams& prm, double C_Np) {
    require_supercritical(prm, "C0");
    const double pg = prm.p * prm.gamma_p;
    const double Cp = std::pow(C_Np, prm.p);
    return (prm.p / (2.0 * Cp * (pg - 1.0))) *
           std::pow((pg - 2.0) / (pg - 1.0), pg - 2.0);
}

double rho_0(const ProblemParams& prm, double C_Np) {
    return rho_a(a0_threshold(prm, C_Np), prm, C_Np);
}

bool condition_e4(const ProblemParams& prm, double C_Np) {
    const double pg = prm.p * prm.gamma_p;
    return std::pow(prm.mu, pg - 2.0) * std::pow(prm.a, prm.p - 2.0) <
           C0_threshold(prm, C_Np);
}

GLandmarks g_landmarks(const ProblemParams& prm, double a, double C_Np) {
    require_supercritical(prm, "g_landmarks");
    const double pg = prm.p * prm.gamma_p;
    const double Cp = std::pow(C_Np, prm.p);
    ProblemParams at_a = prm;
    at_a.a = a;
    if (!condition_e4(at_a, C_Np))
        throw regime_error("g_landmarks: smallness condition violated, landmarks unavailable");

    const double capow = Cp * std::pow(a, prm.p * (1.0 - prm.gamma_p));
    auto g = [&](double s) {
        return 0.5 * s * s - 0.5 * prm.mu * a * s - capow / prm.p * std::pow(s, pg);
    };
    auto gd = [&](double s) {
        return s - 0.5 * prm.mu * a - capow * prm.gamma_p * std::pow(s, pg - 1.0);
    };
    auto gdd = [&](double s) {
        return 1.0 - capow * prm.gamma_p * (pg - 1.0) * std::pow(s, pg - 2.0);
    };

    GLandmarks lm;
    // peak of g' separates its two zeros
    const double speak =
        std::pow(1.0 / (capow * prm.gamma_p * (pg - 1.0)), 1.0 / (pg - 2.0));
    if (!(gd(speak) > 0.0))
        throw regime_error("g_landmarks: derivative never positive (condition too tight)");
    lm.s1 = bisect_newton(gd, gdd, 1e-14 * speak, speak);
    double hi = 2.0 * speak;
    while (gd(hi) > 0.0) hi *= 2.0;
    lm.s2 = bisect_newton(gd, gdd, speak, hi);
    // zeros of g bracket by the critical points: g(s1) < 0 < g(s2)
    lm.R0 = bisect_newton(g, gd, lm.s1, lm.s2);
    double hi2 = 2.0 * lm.s2;
    while (g(hi2) > 0.0) hi2 *= 2.0;
    lm.R1 = bisect_newton(g, gd, lm.s2, hi2);
    lm.s_bar = std::pow(prm.p * std::pow(a, prm.p * (prm.gamma_p - 1.0)) /
                            (2.0 * (pg - 1.0) * Cp),
                        1.0 / (pg - 2.0));
    lm.g_s1 = g(lm.s1);
    lm.g_s2 = g(lm.s2);
    if (!(0.0 < lm.s1 && lm.s1 < lm.R0 && lm.R0 < lm.s_bar && lm.s_bar < lm.s2 &&
          lm.s2 < lm.R1))
        throw consistency_error("g_landmarks: ordering s1 < R0 < s_bar < s2 < R1 failed");
    return lm;
}

ScalingExponents scaling_exponents(const ProblemParams& prm) {
    const double den = 8.0 - prm.N * (prm.p - 2.0);
    if (den == 0.0)
        throw regime_error("scaling_exponents: p equals the mass-critical exponent");
    return {2.0 * (prm.p - 2.0) / den, 8.0 / den};
}

double gn_constant_estimate(const ProblemParams& prm,
                            std::shared_ptr<const RadialGrid> grid,
                            const GnEstimateOptions& opt) {
    if (!(prm.p > 2.0) || prm.p >= sobolev_critical_exponent(prm.N) + 1e-12)
        if (prm.p > sobolev_critical_exponent(prm.N))
            throw regime_error("gn_constant_estimate: p beyond 4*");
    if (grid->dim() != prm.N)
        throw structural_error("gn_constant_estimate: grid dimension mismatch");

    const double g = prm.gamma_p;
    auto quotient = [&](const Field& u) {
        const FieldNorms n = field_norms(u, prm.p);
        return std::pow(n.lp, 1.0 / prm.p) /
               (std::pow(n.mass2, 0.5 * (1.0 - g)) * std::pow(n.bilap2, 0.5 * g));
    };
    auto normalize = [&](Field u) {
        // unit mass, then dilate to unit ||Delta u||
        double m = norm_l2(u);
        for (cplx& z : u.values) z /= m;
        const double A = u.grid->bilap_form(u.data());
        u = dilate(u, std::pow(A, -0.25));
        m = norm_l2(u);
        for (cplx& z : u.values) z /= m;
        return u;
    };

    Field u(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double r = static_cast<const RadialGrid&>(*grid).nodes()[i];
        u.values[i] = std::exp(-0.5 * r * r);
    }
    u = normalize(std::move(u));
    double W = quotient(u);
    double tau = 0.5;
    for (int it = 0; it < opt.max_iters; ++it) {
        const FieldNorms n = field_norms(u, prm.p);
        Field lap(grid), bil(grid);
        grid->apply_laplacian(u.data(), lap.data());
        grid->apply_laplacian(lap.data(), bil.data());
        Field dir(grid);
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double amp = std::abs(u.values[i]);
            dir.values[i] = std::pow(amp, prm.p - 2.0) * u.values[i] / n.lp -
                            (1.0 - g) * u.values[i] / n.mass2 -
                            g * bil.values[i] / n.bilap2;
        }
        bool accepted = false;
        while (tau > 1e-14) {
            Field v = u;
            for (std::size_t i = 0; i < u.size(); ++i)
                v.values[i] += tau * dir.values[i];
            v = normalize(std::move(v));
            const double Wv = quotient(v);
            if (Wv >= W) {
                const bool done = (Wv - W) < opt.tol * W && it > 10;
                u = std::move(v);
                W = Wv;
                tau *= 1.5;
                accepted = true;
                if (done) return W;
                break;
            }
            tau *= 0.5;
        }
        if (!accepted) return W;  // quotient stationary to machine precision
    }
    throw convergence_error("gn_constant_estimate: not converged; last quotient " +
                            std::to_string(W));
}

Field bubble(double epsilon, std::shared_ptr<const RadialGrid> grid) {
    const int N = grid->dim();
    if (N < 5) throw regime_error("bubble: requires N >= 5");
    if (!(epsilon > 0.0)) throw structural_error("bubble: epsilon must be positive");
    const double coef =
        std::pow(static_cast<double>(N) * (N - 4.0) * (N * N - 4.0), (N - 4.0) / 8.0);
    const double pre = coef * std::pow(epsilon, (N - 4.0) / 4.0);
    Field u(grid);
    const auto& r = grid->nodes();
    for (std::size_t i = 0; i < grid->size(); ++i)
        u.values[i] = pre * std::pow(epsilon + r[i] * r[i], -(N - 4.0) / 2.0);
    return u;
}

double sobolev_constant_estimate(int N, std::shared_ptr<const RadialGrid> grid) {
    if (N < 5) throw regime_error("sobolev_constant_estimate: requires N >= 5");
    if (grid->dim() != N)
        throw structural_error("sobolev_constant_estimate: grid dimension mismatch");
    const double ps = sobolev_critical_exponent(N);
    const Field u = bubble(1.0, grid);
    const double A = grid->bilap_form(u.data());
    const double P = grid->quad_lp(u.data(), ps);
    return A / std::pow(P, 2.0 / ps);
}

Field truncated_bubble(double epsilon, double R,
                       std::shared_ptr<const RadialGrid> grid) {
    if (!(R > 0.0) || 2.0 * R > grid->r_max())
        throw structural_error("truncated_bubble: needs 0 < 2R <= r_max");
    Field u = bubble(epsilon, grid);
    const auto& r = grid->nodes();
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double x = (r[i] - R) / R;
        double chi = 1.0;
        if (x >= 1.0) {
            chi = 0.0;
        } else if (x > 0.0) {
            chi = 1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
        }
        u.values[i] *= chi;
    }
    return u;
}

ConstantsReport constants_report(const ProblemParams& prm, double C_Np,
                                 const std::string& source,
                                 std::optional<double> S) {
    ConstantsReport rep;
    rep.N = prm.N;
    rep.p = prm.p;
    rep.mu = prm.mu;
    rep.a = prm.a;
    rep.C_Np = C_Np;
    rep.C_source = source;
    rep.S = S;
    rep.rho_a = rho_a(prm.a, prm, C_Np);
    rep.h_max = h_a_max(prm.a, prm, C_Np);
    rep.a0 = a0_threshold(prm, C_Np);
    rep.rho_0 = rho_0(prm, C_Np);
    rep.C0 = C0_threshold(prm, C_Np);
    rep.condition_holds = condition_e4(prm, C_Np);
    if (rep.condition_holds) rep.landmarks = g_landmarks(prm, prm.a, C_Np);
    if (std::abs(8.0 - prm.N * (prm.p - 2.0)) > 0.0) {
        const ScalingExponents se = scaling_exponents(prm);
        rep.b = se.b;
        rep.c = se.c;
    }
    return rep;
}

}  // namespace bnls
