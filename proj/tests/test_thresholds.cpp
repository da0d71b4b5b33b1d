#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bnls/thresholds.hpp"
#include "helpers.hpp"

using namespace bnls;

namespace {

// synthetic family from the closed-form worked example:
// N=6, p=4 (gamma_p = 3/4, p gamma_p = 3), C^p = 2, mu = 0.1, a = 1
ProblemParams synth() { return ProblemParams(6, 4.0, 0.1, 1.0); }
const double kCsynth = std::pow(2.0, 0.25);  // C such that C^p = 2

}  // namespace

TEST_CASE("closed-form thresholds on the synthetic family") {
    ProblemParams prm = synth();
    CHECK(rho_a(1.0, prm, kCsynth) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(h_a_max(1.0, prm, kCsynth) == doctest::Approx(0.075).epsilon(1e-14));
    CHECK(a0_threshold(prm, kCsynth) ==
          doctest::Approx(1.5811388300841898).epsilon(1e-14));  // sqrt(2.5)
    CHECK(C0_threshold(prm, kCsynth) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(condition_e4(prm, kCsynth));  // mu^{p g - 2} a^{p-2} = 0.1 < 0.25
    // h_a at its maximizer matches the direct evaluation
    CHECK(h_a(0.5, 1.0, prm, kCsynth) ==
          doctest::Approx(h_a_max(1.0, prm, kCsynth)).epsilon(1e-14));
    // at a = a0 the maximum is zero
    const double a0 = a0_threshold(prm, kCsynth);
    CHECK(std::abs(h_a_max(a0, prm, kCsynth)) < 1e-12);
    // h_a(rho_0) decreases in a and is positive below a0
    const double r0 = rho_0(prm, kCsynth);
    double prev = 1e300;
    for (double a = 0.2; a < a0; a += 0.2) {
        const double v = h_a(r0, a, prm, kCsynth);
        CHECK(v > 0.0);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(rho_0(prm, kCsynth) ==
          doctest::Approx(rho_a(a0, prm, kCsynth)).epsilon(1e-14));
}

TEST_CASE("a < a0 is equivalent to the smallness condition across tuples") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int checked = 0;
    while (checked < 1000) {
        const int N = 1 + static_cast<int>(9.0 * U(rng));
        const double pbar = mass_critical_exponent(N);
        const double pmax =
            (N >= 5) ? sobolev_critical_exponent(N) : pbar + 3.0;
        const double p = pbar + (pmax - pbar) * (0.05 + 0.9 * U(rng));
        const double mu = std::pow(10.0, -3.0 + 4.0 * U(rng));
        const double a = std::pow(10.0, -2.0 + 4.0 * U(rng));
        const double C = 0.05 + 2.0 * U(rng);
        ProblemParams prm(N, p, mu, a);
        if (prm.p * prm.gamma_p <= 2.0 + 1e-6) continue;
        const double a0 = a0_threshold(prm, C);
        if (std::abs(a - a0) < 1e-10 * a0) continue;  // avoid the knife edge
        const double lhs = std::pow(mu, prm.p * prm.gamma_p - 2.0) *
                           std::pow(a, prm.p - 2.0);
        const double C0 = C0_threshold(prm, C);
        CHECK((a < a0) == (lhs < C0));
        ++checked;
    }
}

TEST_CASE("g landmarks: ordering, sign pattern, scan agreement") {
    ProblemParams prm = synth();
    const GLandmarks lm = g_landmarks(prm, 1.0, kCsynth);
    CHECK(0.0 < lm.s1);
    CHECK(lm.s1 < lm.R0);
    CHECK(lm.R0 < lm.s_bar);
    CHECK(lm.s_bar < lm.s2);
    CHECK(lm.s2 < lm.R1);
    // s_bar coincides with rho_a by construction of the two formulas
    CHECK(lm.s_bar == doctest::Approx(rho_a(1.0, prm, kCsynth)).epsilon(1e-13));
    CHECK(lm.g_s1 < 0.0);
    CHECK(lm.g_s2 > 0.0);

    // brute-force scan oracle for all five landmarks
    const double Cp = 2.0, g = prm.gamma_p, pg = prm.p * prm.gamma_p;
    auto gp = [&](double s) {
        return 0.5 * s * s - 0.5 * prm.mu * prm.a * s -
               Cp / prm.p * std::pow(prm.a, prm.p * (1.0 - g)) * std::pow(s, pg);
    };
    const double hi = 2.0 * lm.R1;
    const int npts = 1000000;
    double prev = gp(hi / npts);
    double scan_R0 = 0, scan_R1 = 0, scan_s1 = 0, scan_s2 = 0;
    double prev_s = hi / npts;
    double best_min = 1e300, best_max = -1e300;
    for (int i = 2; i <= npts; ++i) {
        const double s = hi * i / npts;
        const double cur = gp(s);
        if (prev < 0.0 && cur >= 0.0) scan_R0 = prev_s + (s - prev_s) * prev / (prev - cur);
        if (prev > 0.0 && cur <= 0.0) scan_R1 = prev_s + (s - prev_s) * prev / (prev - cur);
        if (s < lm.R0 && cur < best_min) { best_min = cur; scan_s1 = s; }
        if (cur > best_max) { best_max = cur; scan_s2 = s; }
        prev = cur;
        prev_s = s;
    }
    CHECK(std::abs(scan_R0 - lm.R0) < 1e-6 * lm.R1);
    CHECK(std::abs(scan_R1 - lm.R1) < 1e-6 * lm.R1);
    CHECK(std::abs(scan_s1 - lm.s1) < 1e-4 * lm.R1);  // flat extremum, scan-limited
    CHECK(std::abs(scan_s2 - lm.s2) < 1e-4 * lm.R1);
    // sign pattern: negative on (0,R0) and (R1,inf), positive on (R0,R1)
    CHECK(gp(0.5 * lm.R0) < 0.0);
    CHECK(gp(0.5 * (lm.R0 + lm.R1)) > 0.0);
    CHECK(gp(1.5 * lm.R1) < 0.0);

    // mu -> 0 limits: g(s1) -> 0 and g(s2) -> closed-form limit (= 2/27 here)
    double prev_gs1 = -1e300;
    for (double mu : {1e-1, 1e-2, 1e-3, 1e-4}) {
        ProblemParams pm(6, 4.0, mu, 1.0);
        const GLandmarks l = g_landmarks(pm, 1.0, kCsynth);
        CHECK(l.g_s1 > prev_gs1);  // increases toward 0
        CHECK(l.g_s1 < 0.0);
        prev_gs1 = l.g_s1;
        const double lim = 2.0 / 27.0;
        CHECK(std::abs(l.g_s2 - lim) < 20.0 * mu);  // linear-in-mu approach
    }
    // condition violated -> landmarks unavailable
    ProblemParams bad(6, 4.0, 2.0, 1.5);
    CHECK_THROWS_AS(g_landmarks(bad, 5.0, kCsynth), regime_error);
}

TEST_CASE("scaling exponents") {
    ProblemParams c9(9, 18.0 / 5.0, 0.1, 1.0);
    const auto e9 = scaling_exponents(c9);
    CHECK(e9.b == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(2.0 + 4.0 * e9.b == doctest::Approx(0.0));  // critical: 2 + 4b = 0
    ProblemParams c2(2, 7.0, 0.1, 1.0);
    const auto e2 = scaling_exponents(c2);
    CHECK(e2.b == doctest::Approx(-5.0).epsilon(1e-14));
    CHECK(e2.c == doctest::Approx(-4.0).epsilon(1e-14));
    CHECK(2.0 + 4.0 * e2.b < 0.0);
    ProblemParams c6(6, 4.0, 0.1, 1.0);
    const auto e6 = scaling_exponents(c6);
    CHECK(e6.b == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(e6.c == doctest::Approx(-2.0).epsilon(1e-14));
    ProblemParams cbar(4, 4.0, 0.1, 1.0);  // p = 2 + 8/N exactly
    CHECK_THROWS_AS(scaling_exponents(cbar), regime_error);
}

TEST_CASE("bubble: peak value, Sobolev identity, truncation scalings") {
    const int N = 9;
    const double ps = sobolev_critical_exponent(N);  // 18/5
    auto g = std::make_shared<RadialGrid>(N, 30.0, 2048);
    Field ub = bubble(1.0, g);
    CHECK(ub.values[0].real() == doctest::Approx(163.0476427265035).epsilon(1e-12));

    const double A = g->bilap_form(ub.data());
    const double P = g->quad_lp(ub.data(), ps);
    CHECK(std::abs(A - P) < 0.005 * P);  // ||Delta u||^2 = ||u||_{4*}^{4*}
    const double S = sobolev_constant_estimate(N, g);
    CHECK(S == doctest::Approx(A / std::pow(P, 2.0 / ps)).epsilon(1e-12));
    CHECK(std::pow(S, N / 4.0) == doctest::Approx(P).epsilon(0.01));

    // rho_0 at p = 4* matches (N/(N+4))^{(N-4)/8} S^{N/8}
    ProblemParams prm(N, ps, 0.1, 1.0);
    const double C = 1.0 / std::sqrt(S);
    const double r0 = rho_0(prm, C);
    CHECK(r0 == doctest::Approx(std::pow(N / (N + 4.0), (N - 4.0) / 8.0) *
                                std::pow(S, N / 8.0))
                    .epsilon(1e-10));

    CHECK_THROWS_AS(bubble(1.0, std::make_shared<RadialGrid>(4, 30.0, 256)),
                    regime_error);

    // truncated bubble: identity region, mass ~ eps^2, A -> S^{N/4}
    auto gt = std::make_shared<RadialGrid>(N, 30.0, 4096);
    const double R = 10.0;
    Field vb = truncated_bubble(1.0, R, gt);
    Field full = bubble(1.0, gt);
    for (std::size_t i = 0; i < gt->size(); ++i) {
        if (gt->nodes()[i] <= R)
            CHECK(vb.values[i] == full.values[i]);
        if (gt->nodes()[i] > 2.0 * R) CHECK(std::abs(vb.values[i]) == 0.0);
    }
    // the cutoff-induced deviation from the untruncated bubble shrinks with
    // eps for both Lemma-4.3 quantities (isolates the O(eps^{(N-4)/2}) terms
    // from the fixed discretization bias)
    std::vector<double> eps{1.0, 0.3, 0.1, 0.03}, mass;
    double prev_da = 1e300, prev_dp = 1e300;
    for (double e : eps) {
        Field v = truncated_bubble(e, R, gt);
        Field fb = bubble(e, gt);
        mass.push_back(gt->quad_norm2sq(v.data()));
        const double da = std::abs(gt->bilap_form(v.data()) - gt->bilap_form(fb.data()));
        const double dp =
            std::abs(gt->quad_lp(v.data(), ps) - gt->quad_lp(fb.data(), ps));
        CHECK(da < prev_da * (1.0 + 1e-9));
        CHECK(dp < prev_dp * (1.0 + 1e-9));
        prev_da = da;
        prev_dp = dp;
    }
    double num = 0.0, den = 0.0, mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < eps.size(); ++k) {
        mx += std::log(eps[k]) / eps.size();
        my += std::log(mass[k]) / eps.size();
    }
    for (std::size_t k = 0; k < eps.size(); ++k) {
        num += (std::log(eps[k]) - mx) * (std::log(mass[k]) - my);
        den += (std::log(eps[k]) - mx) * (std::log(eps[k]) - mx);
    }
    CHECK(std::abs(num / den - 2.0) < 0.2);  // log-log mass slope 2 +/- 0.2

    CHECK_THROWS_AS(truncated_bubble(1.0, 20.0, gt), structural_error);
}

TEST_CASE("bubble solves the critical equation pointwise") {
    // the bubble has unit core scale, so a compact domain keeps |u|^{4*-1}
    // above the bilaplacian's floating-point noise floor across the window
    const int N = 9;
    const double ps = sobolev_critical_exponent(N);
    const double rmax = 6.0;
    auto g = std::make_shared<RadialGrid>(N, rmax, 1024);
    Field u = bubble(1.0, g);
    Field b = bilaplacian(u);
    const double h = g->h();
    double worst = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
        const double r = g->nodes()[i];
        if (r < 6.0 * h || r > 0.8 * rmax) continue;
        const double rhs = std::pow(u.values[i].real(), ps - 1.0);
        worst = std::max(worst, std::abs(b.values[i].real() - rhs) / rhs);
    }
    CHECK(worst < 1e-3);
    // and in the quadrature norm over the whole inner window including the
    // first cells, where the flux-form composition keeps a weight-suppressed kink
    double err2 = 0.0, ref2 = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
        if (g->nodes()[i] > 0.8 * rmax) continue;
        const double rhs = std::pow(u.values[i].real(), ps - 1.0);
        const double w = g->weights()[i];
        err2 += w * std::pow(b.values[i].real() - rhs, 2);
        ref2 += w * rhs * rhs;
    }
    CHECK(std::sqrt(err2 / ref2) < 1e-3);
}

TEST_CASE("Weinstein ascent: critical cross-check and invariances") {
    const int N = 9;
    const double ps = sobolev_critical_exponent(N);
    auto g = std::make_shared<RadialGrid>(N, 30.0, 1024);
    const double S = sobolev_constant_estimate(N, g);
    ProblemParams prm(N, ps, 0.1, 1.0);
    const double C = gn_constant_estimate(prm, g);
    CHECK(C == doctest::Approx(1.0 / std::sqrt(S)).epsilon(0.01));

    // the quotient itself is invariant under scaling and dilation
    auto quotient = [&](const Field& u) {
        const FieldNorms n = field_norms(u, ps);
        return std::pow(n.lp, 1.0 / ps) /
               (std::pow(n.mass2, 0.5 * (1.0 - prm.gamma_p)) *
                std::pow(n.bilap2, 0.5 * prm.gamma_p));
    };
    Field u = bnls::testing::gaussian(g);
    const double W0 = quotient(u);
    Field u2 = u;
    for (auto& z : u2.values) z *= 2.0;
    CHECK(quotient(u2) == doctest::Approx(W0).epsilon(1e-12));
    // dilation invariance is limited by the second-order quadrature bias;
    // it tightens under refinement
    Field ud = dilate(u, 1.3);
    CHECK(quotient(ud) == doctest::Approx(W0).epsilon(1e-3));
    auto gf = std::make_shared<RadialGrid>(N, 30.0, 8192);
    Field uf = bnls::testing::gaussian(gf);
    const double Wf = quotient(uf);
    Field udf = dilate(uf, 1.3);
    CHECK(quotient(udf) == doctest::Approx(Wf).epsilon(2e-5));

    // Gagliardo-Nirenberg inequality with the estimate inflated by 1%
    ProblemParams sub(6, 3.8, 0.1, 1.0);
    auto g6 = std::make_shared<RadialGrid>(6, 30.0, 1024);
    const double C6 = gn_constant_estimate(sub, g6);
    const double C6p = std::pow(1.01 * C6, sub.p);
    for (int k = 0; k < 30; ++k) {
        Field w = bnls::testing::random_smooth(
            std::static_pointer_cast<const Grid>(g6), 1234 + k);
        const FieldNorms n = field_norms(w, sub.p);
        CHECK(n.lp <= C6p *
                          std::pow(n.mass2, 0.5 * sub.p * (1.0 - sub.gamma_p)) *
                          std::pow(n.bilap2, 0.5 * sub.p * sub.gamma_p));
    }
}

TEST_CASE("constants report assembles consistently") {
    ProblemParams prm = synth();
    const ConstantsReport rep = constants_report(prm, kCsynth, "given");
    CHECK(rep.condition_holds);
    CHECK(rep.rho_a == doctest::Approx(0.5));
    CHECK(rep.C0 == doctest::Approx(0.25));
    CHECK(rep.a0 == doctest::Approx(1.5811388300841898));
    REQUIRE(rep.landmarks.has_value());
    CHECK(rep.landmarks->s_bar == doctest::Approx(0.5));
    CHECK(rep.b == doctest::Approx(-1.0));
    CHECK(rep.c == doctest::Approx(-2.0));
    CHECK(rep.C_source == "given");
}
