#ifndef BNLS_TESTS_HELPERS_HPP
#define BNLS_TESTS_HELPERS_HPP

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "bnls/grid.hpp"

namespace bnls::testing {

inline Field gaussian(std::shared_ptr<const Grid> grid, double width = 1.0) {
    Field u(grid);
    if (auto* rg = dynamic_cast<const RadialGrid*>(grid.get())) {
        for (std::size_t i = 0; i < grid->size(); ++i) {
            const double r = rg->nodes()[i] / width;
            u.values[i] = std::exp(-0.5 * r * r);
        }
    } else {
        auto* pg = dynamic_cast<const PeriodicGrid*>(grid.get());
        const std::size_t n = pg->n_per_dim();
        const double c = 0.5 * pg->box_length();
        for (std::size_t ix = 0; ix < n; ++ix) {
            const double dx = (pg->coord(ix) - c) / width;
            if (pg->dim() == 1) {
                u.values[ix] = std::exp(-0.5 * dx * dx);
            } else {
                for (std::size_t iy = 0; iy < n; ++iy) {
                    const double dy = (pg->coord(iy) - c) / width;
                    u.values[ix * n + iy] = std::exp(-0.5 * (dx * dx + dy * dy));
                }
            }
        }
    }
    return u;
}

/// closed-form norms of exp(-r^2/2) on R^N
struct GaussNorms {
    double mass2, grad2, bilap2, l4;
};
inline GaussNorms gauss_exact(int N) {
    const double m0 = std::pow(std::numbers::pi, 0.5 * N);
    return {m0, 0.5 * N * m0, 0.25 * N * (N + 2.0) * m0,
            std::pow(0.5 * std::numbers::pi, 0.5 * N)};
}

inline Field random_field(std::shared_ptr<const Grid> grid, std::uint64_t seed,
                          bool complex_valued = true) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Field u(grid);
    for (auto& z : u.values)
        z = complex_valued ? cplx{normal(rng), normal(rng)} : cplx{normal(rng), 0.0};
    return u;
}

/// smooth decaying random field (random radial bumps / low modes)
inline Field random_smooth(std::shared_ptr<const Grid> grid, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Field u(grid);
    if (auto* rg = dynamic_cast<const RadialGrid*>(grid.get())) {
        for (int b = 0; b < 5; ++b) {
            const double amp = unif(rng);
            const double at = 0.3 * rg->r_max() * std::abs(unif(rng));
            const double wd = 0.5 + 1.5 * std::abs(unif(rng));
            for (std::size_t i = 0; i < grid->size(); ++i) {
                const double z = (rg->nodes()[i] - at) / wd;
                u.values[i] += amp * std::exp(-z * z);
            }
        }
    } else {
        auto* pg = dynamic_cast<const PeriodicGrid*>(grid.get());
        const std::size_t n = pg->n_per_dim();
        for (int b = 0; b < 5; ++b) {
            const double ar = unif(rng), ai = unif(rng);
            const int k = 1 + static_cast<int>(4.0 * std::abs(unif(rng)));
            const double ph = std::numbers::pi * unif(rng);
            for (std::size_t j = 0; j < grid->size(); ++j) {
                const double x = pg->coord(pg->dim() == 1 ? j : j / n);
                const double y = pg->dim() == 1 ? 0.0 : pg->coord(j % n);
                u.values[j] += cplx{ar, ai} * std::cos(2.0 * std::numbers::pi * k *
                                                           (x + 0.7 * y) /
                                                           pg->box_length() +
                                                       ph);
            }
        }
    }
    return u;
}

}  // namespace bnls::testing

#endif
