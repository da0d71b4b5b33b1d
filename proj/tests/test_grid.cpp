#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bnls/grid.hpp"
#include "helpers.hpp"

using namespace bnls;
using bnls::testing::gauss_exact;
using bnls::testing::gaussian;
using bnls::testing::random_field;

namespace {
const double pi = std::numbers::pi;
}

TEST_CASE("periodic 1D Gaussian closed forms to 1e-8") {
    auto g = std::make_shared<PeriodicGrid>(1, 40.0, 1024);
    Field u = gaussian(g);
    const auto ex = gauss_exact(1);
    CHECK(std::abs(norm_l2(u) * norm_l2(u) - ex.mass2) < 1e-8);           // sqrt(pi)
    CHECK(std::abs(std::pow(seminorm_grad(u), 2) - ex.grad2) < 1e-8);     // sqrt(pi)/2
    CHECK(std::abs(std::pow(seminorm_bilap(u), 2) - ex.bilap2) < 1e-8);   // 3 sqrt(pi)/4
    CHECK(std::abs(std::pow(norm_lp(u, 4.0), 4) - ex.l4) < 1e-8);         // sqrt(pi/2)
    // frozen reference values
    CHECK(ex.mass2 == doctest::Approx(1.7724538509055160).epsilon(1e-14));
    CHECK(ex.grad2 == doctest::Approx(0.8862269254527580).epsilon(1e-14));
    CHECK(ex.bilap2 == doctest::Approx(1.3293403881791370).epsilon(1e-14));
    CHECK(ex.l4 == doctest::Approx(1.2533141373155003).epsilon(1e-14));
    // <-Lap u, u> equals the grad form route
    Field lap = laplacian(u);
    CHECK(std::abs(-inner(lap, u).real() - ex.grad2) < 1e-8);
}

TEST_CASE("constant fields are annihilated by both operators") {
    auto gp = std::make_shared<PeriodicGrid>(1, 40.0, 256);
    auto gr = std::make_shared<RadialGrid>(6, 30.0, 512);
    for (std::shared_ptr<const Grid> g :
         {std::static_pointer_cast<const Grid>(gp), std::static_pointer_cast<const Grid>(gr)}) {
        Field c(g);
        for (auto& z : c.values) z = 3.25;
        Field lc = laplacian(c), bc = bilaplacian(c);
        for (std::size_t i = 0; i < g->size(); ++i) {
            CHECK(std::abs(lc.values[i]) < 1e-8);
            CHECK(std::abs(bc.values[i]) < 1e-8);
        }
    }
}

TEST_CASE("periodic Fourier modes are exact eigenfunctions") {
    const double L = 40.0;
    auto g = std::make_shared<PeriodicGrid>(1, L, 256);
    const double xi = 2.0 * pi * 7.0 / L;
    Field u(std::static_pointer_cast<const Grid>(g));
    for (std::size_t j = 0; j < g->size(); ++j)
        u.values[j] = std::sin(xi * g->coord(j));
    Field lu = laplacian(u), bu = bilaplacian(u);
    for (std::size_t j = 0; j < g->size(); ++j) {
        CHECK(std::abs(lu.values[j] - (-xi * xi) * u.values[j]) < 1e-10);
        CHECK(std::abs(bu.values[j] - xi * xi * xi * xi * u.values[j]) < 1e-8);
    }
    // resolvable modes across the spectrum stay exact eigenfunctions
    for (int k : {1, 17, 63, 127}) {
        const double xik = 2.0 * pi * k / L;
        Field m(std::static_pointer_cast<const Grid>(g));
        for (std::size_t j = 0; j < g->size(); ++j)
            m.values[j] = std::polar(1.0, xik * g->coord(j));
        Field lm = laplacian(m);
        double worst = 0.0;
        for (std::size_t j = 0; j < g->size(); ++j)
            worst = std::max(worst, std::abs(lm.values[j] + xik * xik * m.values[j]));
        CHECK(worst < 1e-7 * xik * xik);
    }
}

TEST_CASE("self-adjointness on random field pairs, both flavors") {
    // composition roundoff in Delta^2 scales like eps/h^4, so the bilaplacian
    // check runs at resolutions where that amplification sits below 1e-10
    auto gp = std::static_pointer_cast<const Grid>(
        std::make_shared<PeriodicGrid>(1, 40.0, 512));
    auto gr = std::static_pointer_cast<const Grid>(
        std::make_shared<RadialGrid>(6, 30.0, 512));
    auto gr9 = std::static_pointer_cast<const Grid>(
        std::make_shared<RadialGrid>(9, 20.0, 320));
    int pair_id = 0;
    for (const auto& g : {gp, gr, gr9}) {
        for (int k = 0; k < 50; ++k) {
            Field u = random_field(g, 1000 + pair_id);
            Field v = random_field(g, 2000 + pair_id);
            ++pair_id;
            const double scale = norm_l2(u) * norm_l2(v);
            Field lu = laplacian(u), lv = laplacian(v);
            CHECK(std::abs(inner(lu, v) - inner(u, lv)) <= 1e-10 * scale);
            Field bu = bilaplacian(u), bv = bilaplacian(v);
            CHECK(std::abs(inner(bu, v) - inner(u, bv)) <= 1e-10 * scale);
        }
    }
    // at production resolutions the quadratic-form route stays exact:
    // <Delta^2 u, v> evaluated as <Lap u, Lap v> agrees with the composition
    auto big = std::static_pointer_cast<const Grid>(
        std::make_shared<RadialGrid>(6, 30.0, 2048));
    for (int k = 0; k < 10; ++k) {
        Field u = random_field(big, 500 + k);
        Field v = random_field(big, 600 + k);
        Field lu = laplacian(u), lv = laplacian(v);
        const double scale = norm_l2(u) * norm_l2(v);
        CHECK(std::abs(inner(lu, v) - inner(u, lv)) <= 1e-10 * scale);
        Field bu = bilaplacian(u);
        const double form_scale = norm_l2(lu) * norm_l2(lv);
        CHECK(std::abs(inner(bu, v) - inner(lu, lv)) <= 1e-12 * form_scale);
    }
}

TEST_CASE("operator forms are positive semidefinite") {
    auto gr = std::make_shared<RadialGrid>(5, 25.0, 800);
    for (int k = 0; k < 20; ++k) {
        Field u = random_field(std::static_pointer_cast<const Grid>(gr), 77 + k);
        CHECK(gr->grad_form(u.data()) >= 0.0);
        CHECK(gr->bilap_form(u.data()) >= 0.0);
        // quadrature consistency: norm_l2^2 equals inner(u,u) as computed
        CHECK(norm_l2(u) * norm_l2(u) == doctest::Approx(inner(u, u).real()).epsilon(1e-15));
    }
}

TEST_CASE("radial quadrature integrates 1 over the ball exactly") {
    for (int N : {1, 2, 3, 6, 9}) {
        auto g = std::make_shared<RadialGrid>(N, 30.0, 512);
        Field one(std::static_pointer_cast<const Grid>(g));
        for (auto& z : one.values) z = 1.0;
        const double vol = inner(one, one).real();
        const double exact = g->sphere_area() * std::pow(30.0, N) / N;
        CHECK(std::abs(vol - exact) <= 1e-10 * exact);
        const auto& r = g->nodes();
        CHECK(r.front() == 0.0);
        CHECK(r.back() == 30.0);
        for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] > r[i - 1]);
        for (double w : g->weights()) CHECK(w >= 0.0);
    }
}

TEST_CASE("radial operators converge at second order on the Gaussian") {
    // pointwise operator error in the quadrature norm against the closed
    // forms Delta u = (r^2 - N) u and Delta^2 u = (r^4 - (2N+4) r^2 + N^2 + 2N) u
    for (int N : {1, 6, 9}) {
        std::vector<double> el, eb;
        for (std::size_t n : {512u, 1024u, 2048u, 4096u}) {
            auto g = std::make_shared<RadialGrid>(N, 30.0, n);
            Field u = gaussian(g);
            Field lu = laplacian(u), bu = bilaplacian(u);
            Field dl(lu), db(bu);
            for (std::size_t i = 0; i < g->size(); ++i) {
                const double r2 = g->nodes()[i] * g->nodes()[i];
                dl.values[i] = lu.values[i] - (r2 - N) * u.values[i];
                db.values[i] =
                    bu.values[i] -
                    (r2 * r2 - (2.0 * N + 4.0) * r2 + N * (N + 2.0)) * u.values[i];
            }
            el.push_back(norm_l2(dl));
            eb.push_back(norm_l2(db));
        }
        for (std::size_t k = 0; k + 1 < el.size(); ++k) {
            CHECK(std::abs(std::log2(el[k] / el[k + 1]) - 2.0) < 0.3);
            CHECK(std::abs(std::log2(eb[k] / eb[k + 1]) - 2.0) < 0.3);
        }
    }
}

TEST_CASE("radial L'Hopital value at the origin") {
    auto g = std::make_shared<RadialGrid>(6, 30.0, 2048);
    Field u = gaussian(g);
    Field lu = laplacian(u);
    // Delta e^{-r^2/2}(0) = -N
    CHECK(lu.values[0].real() == doctest::Approx(-6.0).epsilon(1e-5));
}

TEST_CASE("inner products: definition, zero field, mode orthogonality") {
    auto g = std::make_shared<PeriodicGrid>(1, 40.0, 256);
    Field u = gaussian(g);
    CHECK(inner(u, u).real() == doctest::Approx(norm_l2(u) * norm_l2(u)));
    Field z(std::static_pointer_cast<const Grid>(g));
    CHECK(std::abs(inner(u, z)) == 0.0);
    Field m1(std::static_pointer_cast<const Grid>(g)), m2 = m1;
    for (std::size_t j = 0; j < g->size(); ++j) {
        m1.values[j] = std::polar(1.0, 2.0 * pi * 3.0 * g->coord(j) / 40.0);
        m2.values[j] = std::polar(1.0, 2.0 * pi * 5.0 * g->coord(j) / 40.0);
    }
    CHECK(std::abs(inner(m1, m2)) < 1e-10 * norm_l2(m1) * norm_l2(m2));
}

TEST_CASE("interpolation inequality holds for sampled fields") {
    // discrete Cauchy-Schwarz makes ||grad u||^2 <= ||u|| ||Delta u|| structural
    auto gr = std::static_pointer_cast<const Grid>(
        std::make_shared<RadialGrid>(6, 30.0, 800));
    auto gp = std::static_pointer_cast<const Grid>(
        std::make_shared<PeriodicGrid>(1, 40.0, 512));
    for (const auto& g : {gr, gp}) {
        for (int k = 0; k < 25; ++k) {
            Field u = bnls::testing::random_smooth(g, 31 + k);
            CHECK(std::pow(seminorm_grad(u), 2) <=
                  norm_l2(u) * seminorm_bilap(u) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("structural errors") {
    auto g = std::make_shared<RadialGrid>(3, 10.0, 64);
    auto g2 = std::make_shared<RadialGrid>(3, 10.0, 128);
    Field u(std::static_pointer_cast<const Grid>(g));
    Field v(std::static_pointer_cast<const Grid>(g2));
    CHECK_THROWS_AS(inner(u, v), structural_error);
    CHECK_THROWS_AS(norm_lp(u, 0.5), regime_error);
    u.values.pop_back();
    CHECK_THROWS_AS(laplacian(u), structural_error);
    CHECK_THROWS_AS(PeriodicGrid(3, 10.0, 64), structural_error);
    CHECK_THROWS_AS(PeriodicGrid(1, 10.0, 63), structural_error);
    CHECK_THROWS_AS(RadialGrid(0, 10.0, 64), structural_error);
}
