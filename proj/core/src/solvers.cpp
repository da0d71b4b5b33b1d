#include "bnls/solvers.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <functional>
#include <random>

namespace bnls {

Field renormalize_to_mass(const Field& u, double a) {
    const double m = norm_l2(u);
    if (!(m > 0.0)) throw structural_error("renormalize_to_mass: zero field");
    Field out = u;
    const double f = a / m;
    for (cplx& z : out.values) z *= f;
    return out;
}

namespace {

// ---------------------------------------------------------- preconditioners

// radial: (alpha I + T^2)^{-1} in the W^{1/2}-conjugated interior space,
// T the symmetric positive-semidefinite tridiagonal Laplacian
class RadialPrecond final : public Preconditioner {
  public:
    RadialPrecond(const RadialGrid& g, double alpha) : n_(g.size()) {
        std::vector<double> d, e;
        g.symmetric_tridiagonal(d, e);
        const auto m = static_cast<Eigen::Index>(d.size());
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(5 * m);
        auto T = [&](Eigen::Index i, Eigen::Index j) -> double {
            if (i > j) std::swap(i, j);
            if (i == j) return d[i];
            if (j == i + 1) return e[i];
            return 0.0;
        };
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = std::max<Eigen::Index>(0, i - 2);
                 j <= std::min(m - 1, i + 2); ++j) {
                double v = 0.0;
                for (Eigen::Index k = std::max({i - 1, j - 1, Eigen::Index(0)});
                     k <= std::min({i + 1, j + 1, m - 1}); ++k)
                    v += T(i, k) * T(k, j);
                if (i == j) v += alpha;
                if (v != 0.0) trip.emplace_back(i, j, v);
            }
        }
        Eigen::SparseMatrix<double> Op(m, m);
        Op.setFromTriplets(trip.begin(), trip.end());
        llt_.compute(Op);
        if (llt_.info() != Eigen::Success)
            throw structural_error("RadialPrecond: factorization failed");
        sqw_.resize(m);
        for (Eigen::Index i = 0; i < m; ++i) sqw_[i] = std::sqrt(g.weights()[i + 1]);
    }

    void apply(const Grid&, const cplx* in, cplx* out) const override {
        const auto m = static_cast<Eigen::Index>(sqw_.size());
        Eigen::VectorXd re(m), im(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            re[i] = in[i + 1].real() * sqw_[i];
            im[i] = in[i + 1].imag() * sqw_[i];
        }
        Eigen::VectorXd sre = llt_.solve(re), sim = llt_.solve(im);
        out[0] = cplx{0.0, 0.0};
        out[static_cast<std::size_t>(m) + 1] = cplx{0.0, 0.0};
        for (Eigen::Index i = 0; i < m; ++i)
            out[i + 1] = cplx{sre[i] / sqw_[i], sim[i] / sqw_[i]};
    }

  private:
    std::size_t n_;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
    Eigen::VectorXd sqw_;
};

// periodic: diagonal (alpha + |xi|^4)^{-1} in Fourier space
class PeriodicPrecond final : public Preconditioner {
  public:
    explicit PeriodicPrecond(double alpha) : alpha_(alpha) {}
    void apply(const Grid& g, const cplx* in, cplx* out) const override {
        const auto& pg = static_cast<const PeriodicGrid&>(g);
        const std::size_t n = pg.n_per_dim(), total = pg.size();
        std::vector<cplx> hat(total);
        pg.fft_forward(in, hat.data());
        if (pg.dim() == 1) {
            for (std::size_t k = 0; k < n; ++k) {
                const double x2 = pg.wavenumber(k) * pg.wavenumber(k);
                hat[k] /= alpha_ + x2 * x2;
            }
        } else {
            for (std::size_t kx = 0; kx < n; ++kx)
                for (std::size_t ky = 0; ky < n; ++ky) {
                    const double x2 = pg.wavenumber(kx) * pg.wavenumber(kx) +
                                      pg.wavenumber(ky) * pg.wavenumber(ky);
                    hat[kx * n + ky] /= alpha_ + x2 * x2;
                }
        }
        pg.fft_inverse(hat.data(), out);
    }

  private:
    double alpha_;
};

}  // namespace

std::unique_ptr<Preconditioner> make_preconditioner(const Grid& g, double alpha) {
    if (auto* rg = dynamic_cast<const RadialGrid*>(&g))
        return std::make_unique<RadialPrecond>(*rg, alpha);
    return std::make_unique<PeriodicPrecond>(alpha);
}

namespace {

void finalize_field(Field& u) {
    if (auto* rg = dynamic_cast<const RadialGrid*>(u.grid.get()))
        rg->refresh_end_values(u.data());
}

double grad_scale(const FieldNorms& n, const ProblemParams& prm) {
    return (n.bilap2 + prm.mu * std::abs(n.grad2) + n.lp) / prm.a + 1e-300;
}

Field axpy(const Field& u, double t, const Field& d) {
    Field v = u;
    for (std::size_t i = 0; i < v.size(); ++i) v.values[i] -= t * d.values[i];
    return v;
}

Field tangent_project(const Field& g, const Field& u) {
    const double m2 = u.grid->quad_norm2sq(u.data());
    const double c = u.grid->quad_inner(g.data(), u.data()).real() / m2;
    Field out = g;
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] -= c * u.values[i];
    return out;
}

struct FlowProblem {
    std::function<std::optional<double>(const Field&)> value;
    std::function<Field(const Field&)> gradient;  // full gradient field
    std::function<bool(const Field&)> guard;      // admissibility of a trial point
    std::function<std::optional<Field>(const Field&)> recenter;  // fiber recentering
};

struct FlowResult {
    Field state;
    double value = 0.0;
    double residual_rel = 0.0;
    int iterations = 0;
    bool converged = false;
};

// projected preconditioned descent with Barzilai-Borwein steps and a
// nonmonotone Armijo line search on the mass sphere
FlowResult run_flow(const FlowProblem& fp, const ProblemParams& prm,
                    Field u0, const SolverConfig& cfg) {
    const double a = prm.a;
    Field u = renormalize_to_mass(u0, a);
    finalize_field(u);

    double alpha = std::max(prm.mu * prm.mu / 4.0, 1e-3);
    auto precond = make_preconditioner(*u.grid, alpha);

    auto safe_value = [&](const Field& v) -> std::optional<double> {
        try {
            return fp.value(v);
        } catch (const error&) {
            return std::nullopt;
        }
    };
    auto safe_renorm = [&](Field v) -> std::optional<Field> {
        const double m = norm_l2(v);
        if (!(m > 0.0) || !std::isfinite(m)) return std::nullopt;
        const double f = a / m;
        for (cplx& z : v.values) z *= f;
        finalize_field(v);
        return v;
    };

    auto val0 = safe_value(u);
    if (!val0) throw structural_error("flow: reduced functional undefined at the initial datum");
    double E = *val0;

    double tau = cfg.step;
    bool have_prev = false;
    int stalls = 0;
    Field prev_u(u.grid), prev_gt(u.grid);
    std::deque<double> hist{E};

    FlowResult out;
    out.state = u;
    int it = 0;
    for (it = 0; it < cfg.max_iters; ++it) {
        if (fp.recenter) {
            try {
                if (auto rc = fp.recenter(u)) {
                    if (auto v = safe_renorm(std::move(*rc))) {
                        const auto Ev = safe_value(*v);
                        if (Ev && *Ev <= E && (!fp.guard || fp.guard(*v))) {
                            u = std::move(*v);
                            E = *Ev;
                        }
                    }
                }
            } catch (const error&) {
            }
        }
        Field gr = fp.gradient(u);
        Field gt = tangent_project(gr, u);
        const FieldNorms nn = field_norms(u, prm.p);
        // adapt the preconditioner mass to the running multiplier scale
        {
            const double lam =
                std::abs((-nn.bilap2 + prm.mu * nn.grad2 + nn.lp) / (a * a));
            const double want = std::max({prm.mu * prm.mu / 4.0, lam, 1e-3});
            if (want > 4.0 * alpha || want < 0.25 * alpha) {
                alpha = want;
                precond = make_preconditioner(*u.grid, alpha);
                have_prev = false;
            }
        }
        const double gsc = grad_scale(nn, prm);
        const double res = std::sqrt(u.grid->quad_norm2sq(gt.data()));
        out.residual_rel = res / gsc;
        if (std::getenv("BNLS_TRACE") && it % 100 == 0)
            std::fprintf(stderr,
                         "[flow] it=%d E=%.8g res_rel=%.3e tau=%.3e alpha=%.3e "
                         "A=%.4g G=%.4g P=%.4g\n",
                         it, E, out.residual_rel, tau, alpha, nn.bilap2, nn.grad2,
                         nn.lp);
        if (out.residual_rel < cfg.tol_grad) {
            out.converged = true;
            break;
        }
        Field d(u.grid);
        precond->apply(*u.grid, gt.data(), d.data());
        d = tangent_project(d, u);
        if (have_prev) {
            // BB1 step from the last accepted move
            cplx sy{0.0, 0.0};
            double ss = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                const cplx du = u.values[i] - prev_u.values[i];
                const cplx dg = gt.values[i] - prev_gt.values[i];
                sy += u.grid->weights()[i] * du * std::conj(dg);
                ss += u.grid->weights()[i] * std::norm(du);
            }
            if (sy.real() > 0.0) tau = std::clamp(ss / sy.real(), 1e-8, 1e8);
        }
        const double gd = u.grid->quad_inner(gt.data(), d.data()).real();
        const double Eref = *std::max_element(hist.begin(), hist.end());
        bool accepted = false;
        for (int bt = 0; bt < cfg.backtrack_max; ++bt) {
            auto v = safe_renorm(axpy(u, tau, d));
            if (v) {
                const auto Ev = safe_value(*v);
                if (Ev && *Ev <= Eref - 1e-4 * tau * gd &&
                    (!fp.guard || fp.guard(*v))) {
                    prev_u = u;
                    prev_gt = gt;
                    have_prev = true;
                    u = std::move(*v);
                    E = *Ev;
                    accepted = true;
                    break;
                }
            }
            tau *= cfg.backtrack_factor;
        }
        if (!accepted) {
            // retry from the nominal step once per stall before giving up
            if (++stalls <= 3) {
                tau = cfg.step;
                have_prev = false;
                continue;
            }
            break;
        }
        hist.push_back(E);
        if (hist.size() > 8) hist.pop_front();
        tau *= 2.0;
    }
    out.state = std::move(u);
    out.value = E;
    out.iterations = it;
    return out;
}

Field initial_gaussian(std::shared_ptr<const Grid> grid, std::uint64_t seed) {
    Field u(grid);
    if (auto* rg = dynamic_cast<const RadialGrid*>(grid.get())) {
        const auto& r = rg->nodes();
        for (std::size_t i = 0; i < grid->size(); ++i)
            u.values[i] = std::exp(-0.5 * r[i] * r[i]);
    } else {
        auto* pg = dynamic_cast<const PeriodicGrid*>(grid.get());
        const std::size_t n = pg->n_per_dim();
        const double c = 0.5 * pg->box_length();
        for (std::size_t ix = 0; ix < n; ++ix) {
            const double dx = pg->coord(ix) - c;
            if (pg->dim() == 1) {
                u.values[ix] = std::exp(-0.5 * dx * dx);
            } else {
                for (std::size_t iy = 0; iy < n; ++iy) {
                    const double dy = pg->coord(iy) - c;
                    u.values[ix * n + iy] = std::exp(-0.5 * (dx * dx + dy * dy));
                }
            }
        }
    }
    if (seed != 0) {
        // smooth multiplicative bumps keep multi-start honest without roughness
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        if (auto* rg = dynamic_cast<const RadialGrid*>(grid.get())) {
            const auto& r = rg->nodes();
            for (int b = 0; b < 3; ++b) {
                const double amp = 0.08 * unif(rng), at = 3.0 * unif(rng),
                             wd = 0.5 + unif(rng);
                for (std::size_t i = 0; i < grid->size(); ++i) {
                    const double z = (r[i] - at) / wd;
                    u.values[i] *= 1.0 + amp * std::exp(-z * z);
                }
            }
        }
    }
    return u;
}

double dilation_for_bilap(const Field& u, double target) {
    // ||Delta u_s|| ~ s^2 ||Delta u|| up to interpolation error
    const double A = std::sqrt(u.grid->bilap_form(u.data()));
    return std::sqrt(target / A);
}

struct ReportContext {
    const ProblemParams& prm;
    std::shared_ptr<const Grid> grid;
};

// iterated fibering projection: lands on the Pohozaev manifold to roundoff
Field project_iterated(Field u, const ProblemParams& prm, bool plus) {
    for (int k = 0; k < 12; ++k) {
        const FiberingDiagnostics d = fibering(u, prm);
        const std::optional<double>& s = plus ? d.s_plus : d.s_minus;
        if (!s) break;
        if (std::abs(*s - 1.0) < 1e-13) break;
        u = renormalize_to_mass(dilate(u, *s), prm.a);
        finalize_field(u);
    }
    return u;
}

SolveReport finalize_report(Field state, const ProblemParams& prm,
                            const FlowResult& fr, const std::string& kind) {
    SolveReport rep;
    const FieldNorms n = field_norms(state, prm.p);
    rep.A = n.bilap2;
    rep.G = n.grad2;
    rep.P = n.lp;
    rep.mass = std::sqrt(n.mass2);
    rep.level = energy_scalars(n.bilap2, n.grad2, n.lp, prm);
    rep.lambda = (-n.bilap2 + prm.mu * n.grad2 + n.lp) / (prm.a * prm.a);
    rep.q_value = pohozaev_scalars(n.bilap2, n.grad2, n.lp, prm);
    rep.phi_dd_1 = phi_dd(1.0, n.bilap2, n.grad2, n.lp, prm);
    Field gr = grad_energy(state, prm, false);
    rep.lambda_rayleigh =
        -state.grid->quad_inner(gr.data(), state.data()).real() / (prm.a * prm.a);
    rep.multiplier_mismatch =
        std::abs(rep.lambda - rep.lambda_rayleigh) >
        1e-4 * std::max(std::abs(rep.lambda), 1e-300);
    Field gt = tangent_project(gr, state);
    rep.residual = std::sqrt(state.grid->quad_norm2sq(gt.data()));
    rep.residual_rel = rep.residual / grad_scale(n, prm);
    rep.iterations = fr.iterations;
    rep.converged = fr.converged;
    rep.kind = kind;
    rep.state = std::move(state);
    return rep;
}

ConstantsReport default_constants(const ProblemParams& prm) {
    // a modest radial grid is plenty for the Weinstein quotient
    auto g = std::make_shared<RadialGrid>(prm.N, 30.0, 1024);
    const double ps = sobolev_critical_exponent(prm.N);
    if (prm.N >= 5 && std::abs(prm.p - ps) < 1e-12) {
        const double S = sobolev_constant_estimate(prm.N, g);
        return constants_report(prm, 1.0 / std::sqrt(S), "sobolev", S);
    }
    const double C = gn_constant_estimate(prm, g);
    return constants_report(prm, C, "weinstein");
}

}  // namespace

SolveReport ground_state(const ProblemParams& prm,
                         std::shared_ptr<const Grid> grid,
                         const SolverConfig& cfg,
                         const ConstantsReport* constants) {
    ConstantsReport cr = constants ? *constants : default_constants(prm);
    if (!cr.condition_holds)
        throw regime_error("ground_state: smallness condition violated (a >= a0)");
    const double rho0 = cr.rho_0;
    const double s1 = cr.landmarks ? cr.landmarks->s1 : rho0 / 2.0;

    Field u0 = initial_gaussian(grid, cfg.seed);
    u0 = renormalize_to_mass(u0, prm.a);
    const double tgt = std::min(rho0 / 2.0, s1);
    u0 = renormalize_to_mass(dilate(u0, dilation_for_bilap(u0, tgt)), prm.a);

    FlowProblem fp;
    fp.value = [&](const Field& v) -> std::optional<double> {
        return energy(v, prm);
    };
    fp.gradient = [&](const Field& v) { return grad_energy(v, prm, false); };
    fp.guard = [&](const Field& v) {
        return std::sqrt(v.grid->bilap_form(v.data())) < rho0;
    };
    fp.recenter = [&](const Field& v) -> std::optional<Field> {
        FieldNorms n = field_norms(v, prm.p);
        FiberingDiagnostics d;
        try {
            d = fibering_scalars(n.bilap2, n.grad2, n.lp, prm);
        } catch (const error&) {
            return std::nullopt;
        }
        if (!d.s_plus || std::abs(*d.s_plus - 1.0) < 1e-13) return std::nullopt;
        // stage extreme dilations so the iterate stays resolvable
        return dilate(v, std::clamp(*d.s_plus, 0.25, 4.0));
    };

    FlowResult fr = run_flow(fp, prm, std::move(u0), cfg);
    Field state = project_iterated(std::move(fr.state), prm, /*plus=*/true);
    SolveReport rep = finalize_report(std::move(state), prm, fr, "ground");
    rep.constants = cr;

    if (cfg.r_max_check) {
        if (auto* rg = dynamic_cast<const RadialGrid*>(grid.get())) {
            auto big = rg->with_extent(2.0 * rg->r_max());
            Field moved(big);
            for (std::size_t i = 0; i < big->size(); ++i) {
                const double r = big->nodes()[i];
                moved.values[i] = (r <= rg->r_max())
                                      ? rep.state.values[std::min(
                                            rep.state.size() - 1,
                                            static_cast<std::size_t>(r / rg->h() + 0.5))]
                                      : cplx{0.0, 0.0};
            }
            SolverConfig c2 = cfg;
            c2.r_max_check = false;
            FlowProblem fp2 = fp;
            fp2.value = [&](const Field& v) -> std::optional<double> {
                return energy(v, prm);
            };
            FlowResult fr2 = run_flow(fp2, prm, std::move(moved), c2);
            Field st2 = project_iterated(std::move(fr2.state), prm, true);
            rep.level_doubled_domain = energy(st2, prm);
        }
    }
    return rep;
}

SolveReport excited_state(const ProblemParams& prm,
                          std::shared_ptr<const Grid> grid,
                          const SolverConfig& cfg,
                          const ConstantsReport* constants,
                          const Field* initial) {
    std::optional<ConstantsReport> cr;
    if (constants) cr = *constants;

    Field u0(grid);
    if (initial) {
        if (initial->grid.get() != grid.get())
            throw structural_error("excited_state: initial field on a different grid");
        u0 = *initial;
    } else {
        SolveReport gs = ground_state(prm, grid, cfg, constants);
        if (!cr) cr = gs.constants;
        u0 = gs.state;
    }
    // start past the fibering maximum, on the minus side; large factors are
    // staged so intermediate samples stay resolvable
    {
        for (int round = 0; round < 12; ++round) {
            const FiberingDiagnostics d = fibering(u0, prm);
            if (!d.s_minus)
                throw projection_error(
                    "excited_state: initial datum admits no fibering roots",
                    d.f_tilde_max);
            const double s = std::clamp(*d.s_minus, 0.25, 4.0);
            u0 = renormalize_to_mass(dilate(u0, s), prm.a);
            if (std::abs(*d.s_minus - 1.0) < 0.5) break;
        }
    }

    const double e = 2.0 * prm.p * prm.gamma_p;
    FlowProblem fp;
    fp.value = [&](const Field& v) -> std::optional<double> {
        FieldNorms n = field_norms(v, prm.p);
        FiberingDiagnostics d;
        try {
            d = fibering_scalars(n.bilap2, n.grad2, n.lp, prm);
        } catch (const error&) {
            return std::nullopt;
        }
        if (!d.s_minus) return std::nullopt;
        return phi_value(*d.s_minus, n.bilap2, n.grad2, n.lp, prm);
    };
    fp.gradient = [&](const Field& v) {
        FieldNorms n = field_norms(v, prm.p);
        const FiberingDiagnostics d =
            fibering_scalars(n.bilap2, n.grad2, n.lp, prm);
        const double s = d.s_minus.value();
        Field lap(v.grid), bil(v.grid);
        v.grid->apply_laplacian(v.data(), lap.data());
        v.grid->apply_laplacian(lap.data(), bil.data());
        Field g(v.grid);
        const double s4 = std::pow(s, 4), s2 = s * s, se = std::pow(s, e);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double amp = std::abs(v.values[i]);
            g.values[i] = s4 * bil.values[i] + prm.mu * s2 * lap.values[i] -
                          se * std::pow(amp, prm.p - 2.0) * v.values[i];
        }
        return g;
    };
    fp.recenter = [&](const Field& v) -> std::optional<Field> {
        FieldNorms n = field_norms(v, prm.p);
        FiberingDiagnostics d;
        try {
            d = fibering_scalars(n.bilap2, n.grad2, n.lp, prm);
        } catch (const error&) {
            return std::nullopt;
        }
        if (!d.s_minus || std::abs(*d.s_minus - 1.0) < 1e-13) return std::nullopt;
        return dilate(v, std::clamp(*d.s_minus, 0.25, 4.0));
    };

    FlowResult fr = run_flow(fp, prm, std::move(u0), cfg);
    Field state = project_iterated(std::move(fr.state), prm, /*plus=*/false);
    SolveReport rep = finalize_report(std::move(state), prm, fr, "excited");
    if (cr) rep.constants = cr;
    return rep;
}

SolveReport action_state(double lambda, const ProblemParams& prm,
                         std::shared_ptr<const Grid> grid,
                         const SolverConfig& cfg,
                         const Field* initial) {
    if (!(lambda > prm.mu * prm.mu / 4.0))
        throw regime_error("action_state: requires lambda > mu^2/4");

    Field u = initial ? *initial : initial_gaussian(grid, cfg.seed);
    auto nehari_t = [&](const Field& v) -> std::optional<double> {
        const FieldNorms n = field_norms(v, prm.p);
        const double quad = n.bilap2 - prm.mu * n.grad2 + lambda * n.mass2;
        if (!(n.lp > 0.0) || !(quad > 0.0)) return std::nullopt;
        return std::pow(quad / n.lp, 1.0 / (prm.p - 2.0));
    };
    // scale onto the Nehari set once; the flow then recenters each step
    {
        const auto t = nehari_t(u);
        if (!t) throw regime_error("action_state: initial datum has degenerate quadratic form");
        for (cplx& z : u.values) z *= *t;
    }

    auto act = [&](const Field& v) {
        const FieldNorms n = field_norms(v, prm.p);
        return energy_scalars(n.bilap2, n.grad2, n.lp, prm) + 0.5 * lambda * n.mass2;
    };

    double alpha = std::max({prm.mu * prm.mu / 4.0, lambda, 1e-3});
    auto precond = make_preconditioner(*grid, alpha);

    double E = act(u);
    double tau = cfg.step;
    bool have_prev = false;
    Field prev_u(grid), prev_g(grid);
    std::deque<double> hist{E};
    int it = 0;
    bool converged = false;
    double res_rel = 0.0;

    auto gradient = [&](const Field& v) {
        Field lap(grid), bil(grid);
        grid->apply_laplacian(v.data(), lap.data());
        grid->apply_laplacian(lap.data(), bil.data());
        Field g(grid);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double amp = std::abs(v.values[i]);
            g.values[i] = bil.values[i] + prm.mu * lap.values[i] +
                          lambda * v.values[i] -
                          std::pow(amp, prm.p - 2.0) * v.values[i];
        }
        return g;
    };

    for (it = 0; it < cfg.max_iters; ++it) {
        // exact scalar recentering onto the Nehari set
        if (const auto t = nehari_t(u)) {
            if (std::abs(*t - 1.0) > 1e-15)
                for (cplx& z : u.values) z *= *t;
            E = act(u);
        }
        Field g = gradient(u);
        const FieldNorms n = field_norms(u, prm.p);
        const double gsc = (n.bilap2 + prm.mu * std::abs(n.grad2) +
                            std::abs(lambda) * n.mass2 + n.lp) /
                               std::sqrt(n.mass2) +
                           1e-300;
        const double res = std::sqrt(grid->quad_norm2sq(g.data()));
        res_rel = res / gsc;
        if (res_rel < cfg.tol_grad) {
            converged = true;
            break;
        }
        Field d(grid);
        precond->apply(*grid, g.data(), d.data());
        if (have_prev) {
            cplx sy{0.0, 0.0};
            double ss = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                const cplx du = u.values[i] - prev_u.values[i];
                const cplx dg = g.values[i] - prev_g.values[i];
                sy += grid->weights()[i] * du * std::conj(dg);
                ss += grid->weights()[i] * std::norm(du);
            }
            if (sy.real() > 0.0) tau = std::clamp(ss / sy.real(), 1e-8, 1e8);
        }
        const double gd = grid->quad_inner(g.data(), d.data()).real();
        const double Eref = *std::max_element(hist.begin(), hist.end());
        bool accepted = false;
        for (int bt = 0; bt < cfg.backtrack_max; ++bt) {
            Field v = axpy(u, tau, d);
            finalize_field(v);
            const auto t = nehari_t(v);
            if (t) {
                for (cplx& z : v.values) z *= *t;
                const double Ev = act(v);
                if (Ev <= Eref - 1e-4 * tau * gd) {
                    prev_u = u;
                    prev_g = g;
                    have_prev = true;
                    u = std::move(v);
                    E = Ev;
                    accepted = true;
                    break;
                }
            }
            tau *= cfg.backtrack_factor;
        }
        if (!accepted) {
            if (tau < cfg.step) {
                tau = cfg.step;
                have_prev = false;
                continue;
            }
            break;
        }
        hist.push_back(E);
        if (hist.size() > 8) hist.pop_front();
        tau *= 2.0;
    }

    // report: theta_lambda, the state's mass and Euler-Lagrange residual
    SolveReport rep;
    const FieldNorms n = field_norms(u, prm.p);
    rep.A = n.bilap2;
    rep.G = n.grad2;
    rep.P = n.lp;
    rep.mass = std::sqrt(n.mass2);
    rep.level = act(u);
    rep.lambda = lambda;
    rep.lambda_rayleigh = lambda;
    Field g = gradient(u);
    rep.residual = std::sqrt(grid->quad_norm2sq(g.data()));
    rep.residual_rel = res_rel;
    rep.q_value = pohozaev_scalars(n.bilap2, n.grad2, n.lp, prm);
    rep.phi_dd_1 = phi_dd(1.0, n.bilap2, n.grad2, n.lp, prm);
    rep.iterations = it;
    rep.converged = converged;
    rep.kind = "action";
    rep.state = std::move(u);
    return rep;
}

std::vector<SweepPoint> sweep(SweepKind kind, SweepSolver which,
                              const std::vector<double>& values,
                              ProblemParams prm,
                              std::shared_ptr<const Grid> grid,
                              const SolverConfig& cfg,
                              const ConstantsReport* constants) {
    if (values.empty()) throw structural_error("sweep: empty range");
    std::vector<SweepPoint> out;
    out.reserve(values.size());
    std::optional<Field> warm;
    for (const double v : values) {
        ProblemParams p = (kind == SweepKind::mass)
                              ? ProblemParams(prm.N, prm.p, prm.mu, v)
                              : ProblemParams(prm.N, prm.p, v, prm.a);
        ConstantsReport cr;
        if (constants) {
            cr = constants_report(p, constants->C_Np, constants->C_source,
                                  constants->S);
        } else {
            cr = default_constants(p);
        }
        SweepPoint pt;
        pt.value = v;
        try {
            if (which == SweepSolver::ground) {
                if (warm) {
                    // warm start by flowing from the previous state
                    FlowProblem fp;
                    fp.value = [&](const Field& f) -> std::optional<double> {
                        return energy(f, p);
                    };
                    fp.gradient = [&](const Field& f) {
                        return grad_energy(f, p, false);
                    };
                    const double rho0 = cr.rho_0;
                    fp.guard = [rho0](const Field& f) {
                        return std::sqrt(f.grid->bilap_form(f.data())) < rho0;
                    };
                    ProblemParams pc = p;
                    fp.recenter = [pc](const Field& f) -> std::optional<Field> {
                        FieldNorms n = field_norms(f, pc.p);
                        FiberingDiagnostics d;
                        try {
                            d = fibering_scalars(n.bilap2, n.grad2, n.lp, pc);
                        } catch (const error&) {
                            return std::nullopt;
                        }
                        if (!d.s_plus) return std::nullopt;
                        return dilate(f, *d.s_plus);
                    };
                    Field w = renormalize_to_mass(*warm, p.a);
                    FlowResult fr = run_flow(fp, p, std::move(w), cfg);
                    Field st = project_iterated(std::move(fr.state), p, true);
                    pt.report = finalize_report(std::move(st), p, fr, "ground");
                    pt.report.constants = cr;
                } else {
                    pt.report = ground_state(p, grid, cfg, &cr);
                }
            } else {
                const Field* init = warm ? &*warm : nullptr;
                std::optional<Field> renormed;
                if (warm) {
                    renormed = renormalize_to_mass(*warm, p.a);
                    init = &*renormed;
                }
                pt.report = excited_state(p, grid, cfg, &cr, init);
            }
            if (pt.report.converged) warm = pt.report.state;
        } catch (const error& e) {
            pt.report.converged = false;
            pt.report.kind = std::string("failed: ") + e.what();
        }
        out.push_back(std::move(pt));
    }
    return out;
}

}  // namespace bnls
