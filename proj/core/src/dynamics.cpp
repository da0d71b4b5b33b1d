#include "bnls/dynamics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

namespace bnls {

struct LinearPropagator::RadialData {
    Eigen::MatrixXd V;       // eigenvectors of the symmetric tridiagonal T
    Eigen::VectorXcd phase;  // e^{-i dt (theta^2 - mu theta)}
    Eigen::VectorXd sqw;
};

LinearPropagator::LinearPropagator(std::shared_ptr<const Grid> grid, double mu,
                                   double dt)
    : grid_(std::move(grid)), mu_(mu), dt_(dt) {
    if (const auto* pg = dynamic_cast<const PeriodicGrid*>(grid_.get())) {
        const std::size_t n = pg->n_per_dim();
        phase_.resize(pg->size());
        auto ph = [&](double xi2) {
            const double w = xi2 * xi2 - mu_ * xi2;  // symbol of Delta^2 + mu Delta
            return std::polar(1.0, -dt_ * w);
        };
        if (pg->dim() == 1) {
            for (std::size_t k = 0; k < n; ++k)
                phase_[k] = ph(pg->wavenumber(k) * pg->wavenumber(k));
        } else {
            for (std::size_t kx = 0; kx < n; ++kx)
                for (std::size_t ky = 0; ky < n; ++ky)
                    phase_[kx * n + ky] = ph(pg->wavenumber(kx) * pg->wavenumber(kx) +
                                             pg->wavenumber(ky) * pg->wavenumber(ky));
        }
        return;
    }
    const auto& rg = static_cast<const RadialGrid&>(*grid_);
    std::vector<double> d, e;
    rg.symmetric_tridiagonal(d, e);
    const auto m = static_cast<Eigen::Index>(d.size());
    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(d.data(), m);
    Eigen::VectorXd off = Eigen::Map<Eigen::VectorXd>(e.data(), m - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success)
        throw structural_error("LinearPropagator: eigendecomposition failed");
    radial_ = std::make_shared<RadialData>();
    radial_->V = es.eigenvectors();
    radial_->phase.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double theta = es.eigenvalues()[i];  // eigenvalue of -Delta
        const double w = theta * theta - mu_ * theta;
        radial_->phase[i] = std::polar(1.0, -dt_ * w);
    }
    radial_->sqw.resize(m);
    for (Eigen::Index i = 0; i < m; ++i)
        radial_->sqw[i] = std::sqrt(rg.weights()[i + 1]);
}

void LinearPropagator::advance(Field& psi) const {
    if (psi.grid.get() != grid_.get())
        throw structural_error("LinearPropagator: field on a different grid");
    if (const auto* pg = dynamic_cast<const PeriodicGrid*>(grid_.get())) {
        std::vector<cplx> hat(pg->size());
        pg->fft_forward(psi.data(), hat.data());
        for (std::size_t k = 0; k < hat.size(); ++k) hat[k] *= phase_[k];
        pg->fft_inverse(hat.data(), psi.data());
        return;
    }
    const auto& rg = static_cast<const RadialGrid&>(*grid_);
    const auto m = static_cast<Eigen::Index>(radial_->sqw.size());
    Eigen::VectorXcd v(m);
    for (Eigen::Index i = 0; i < m; ++i)
        v[i] = psi.values[i + 1] * radial_->sqw[i];
    Eigen::VectorXcd c = radial_->V.transpose() * v;
    c.array() *= radial_->phase.array();
    v = radial_->V * c;
    for (Eigen::Index i = 0; i < m; ++i)
        psi.values[i + 1] = v[i] / radial_->sqw[i];
    rg.refresh_end_values(psi.data());
}

void step_strang(Field& psi, double dt, const ProblemParams& prm,
                 const LinearPropagator& prop) {
    if (std::abs(dt - prop.dt()) > 1e-15 * std::abs(dt))
        throw structural_error("step_strang: propagator was built for a different dt");
    const double half = 0.5 * dt;
    const double pm2 = prm.p - 2.0;
    auto phase_kick = [&](Field& f) {
        for (cplx& z : f.values) {
            const double amp = std::abs(z);
            z *= std::polar(1.0, half * std::pow(amp, pm2));
        }
    };
    phase_kick(psi);
    prop.advance(psi);
    phase_kick(psi);
}

TrajectoryRecord evolve(const Field& psi0, const ProblemParams& prm,
                        const IntegratorConfig& icfg) {
    icfg.validate();
    TrajectoryRecord rec;
    Field psi = psi0;
    const LinearPropagator prop(psi.grid, prm.mu, icfg.dt);

    const auto steps = static_cast<long>(std::llround(icfg.T / icfg.dt));
    const double bilap0 = seminorm_bilap(psi);

    auto next_snapshot = icfg.snapshot_times.begin();
    double prev_q = 0.0;
    bool have_q = false;

    auto monitor = [&](long k) {
        const double t = k * icfg.dt;
        const FieldNorms n = field_norms(psi, prm.p);
        rec.times.push_back(t);
        rec.mass_series.push_back(std::sqrt(n.mass2));
        rec.energy_series.push_back(energy_scalars(n.bilap2, n.grad2, n.lp, prm));
        const double q = pohozaev_scalars(n.bilap2, n.grad2, n.lp, prm);
        rec.q_series.push_back(q);
        rec.bilap_series.push_back(std::sqrt(n.bilap2));
        if (have_q && !rec.q_sign_flip_time && q * prev_q < 0.0)
            rec.q_sign_flip_time = t;
        prev_q = q;
        have_q = true;
        if (bilap0 > 0.0 && std::sqrt(n.bilap2) > icfg.blowup_threshold * bilap0)
            rec.blowup_indicated = true;
        while (next_snapshot != icfg.snapshot_times.end() &&
               t >= *next_snapshot - 0.5 * icfg.dt) {
            rec.snapshots.emplace_back(t, psi);
            ++next_snapshot;
        }
    };

    monitor(0);
    for (long k = 1; k <= steps; ++k) {
        step_strang(psi, icfg.dt, prm, prop);
        bool bad = false;
        for (const cplx& z : psi.values)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
                bad = true;
                break;
            }
        if (bad) {
            rec.aborted = true;
            rec.abort_time = k * icfg.dt;
            break;
        }
        if (k % icfg.monitor_every == 0 || k == steps) monitor(k);
    }
    return rec;
}

GammaRegion check_gamma_region(const Field& psi0, const ProblemParams& prm,
                               double M_value) {
    const FieldNorms n = field_norms(psi0, prm.p);
    const double mass = std::sqrt(n.mass2);
    if (std::abs(mass - prm.a) > 1e-6 * prm.a)
        throw consistency_error("check_gamma_region: mass off the sphere S_a");
    GammaRegion g;
    const double psi = energy_scalars(n.bilap2, n.grad2, n.lp, prm);
    const double q = pohozaev_scalars(n.bilap2, n.grad2, n.lp, prm);
    g.energy_margin = M_value - psi;
    g.q_margin = q;
    g.member = (g.energy_margin > 0.0) && (g.q_margin > 0.0);
    return g;
}

GlobalExistenceResult global_existence_experiment(const SolveReport& excited,
                                                  const ProblemParams& prm,
                                                  const IntegratorConfig& icfg) {
    if (!excited.converged)
        throw structural_error("global_existence_experiment: excited report not converged");
    const double M = excited.level;

    GlobalExistenceResult out;
    Field psi0 = excited.state;
    bool found = false;
    for (double s = 0.999; s > 0.5; s *= 0.995) {
        Field cand = renormalize_to_mass(dilate(excited.state, s), prm.a);
        const GammaRegion g = check_gamma_region(cand, prm, M);
        if (g.member) {
            psi0 = std::move(cand);
            out.s_used = s;
            found = true;
            break;
        }
    }
    if (!found)
        throw convergence_error(
            "global_existence_experiment: no dilation produced a Gamma_a member");

    const FieldNorms n0 = field_norms(psi0, prm.p);
    const double psi_energy = energy_scalars(n0.bilap2, n0.grad2, n0.lp, prm);
    const double pg = prm.p * prm.gamma_p;
    const double A2 = (pg - 2.0) / (2.0 * pg);
    const double A1 = prm.mu * prm.a * (pg - 1.0) / (2.0 * pg);
    out.apriori_bound = (A1 + std::sqrt(A1 * A1 + 4.0 * A2 * psi_energy)) / (2.0 * A2);

    out.record = evolve(psi0, prm, icfg);
    out.q_positive_throughout =
        std::all_of(out.record.q_series.begin(), out.record.q_series.end(),
                    [](double q) { return q > 0.0; });
    out.max_bilap = *std::max_element(out.record.bilap_series.begin(),
                                      out.record.bilap_series.end());
    out.bound_respected = out.max_bilap <= out.apriori_bound;
    out.verdict = (!out.record.blowup_indicated && !out.record.aborted &&
                   out.q_positive_throughout && out.bound_respected)
                      ? "global (windowed)"
                      : "inconclusive";
    return out;
}

double orbit_distance_h2(const Field& psi, const Field& u) {
    check_same_grid(psi, u);
    const Grid& g = *psi.grid;

    const Field* uref = &u;
    Field shifted(psi.grid);
    if (const auto* pg = dynamic_cast<const PeriodicGrid*>(psi.grid.get())) {
        // translation alignment from the cross-correlation peak of |psi| vs |u|
        const std::size_t n = pg->n_per_dim(), total = pg->size();
        std::vector<cplx> ap(total), au(total), hp(total), hu(total);
        for (std::size_t i = 0; i < total; ++i) {
            ap[i] = std::abs(psi.values[i]);
            au[i] = std::abs(u.values[i]);
        }
        pg->fft_forward(ap.data(), hp.data());
        pg->fft_forward(au.data(), hu.data());
        for (std::size_t i = 0; i < total; ++i) hp[i] *= std::conj(hu[i]);
        std::vector<cplx> corr(total);
        pg->fft_inverse(hp.data(), corr.data());
        std::size_t best = 0;
        for (std::size_t i = 1; i < total; ++i)
            if (corr[i].real() > corr[best].real()) best = i;
        // u shifted by the peak offset
        if (pg->dim() == 1) {
            for (std::size_t j = 0; j < n; ++j)
                shifted.values[j] = u.values[(j + n - best % n) % n];
        } else {
            const std::size_t sx = best / n, sy = best % n;
            for (std::size_t jx = 0; jx < n; ++jx)
                for (std::size_t jy = 0; jy < n; ++jy)
                    shifted.values[jx * n + jy] =
                        u.values[((jx + n - sx) % n) * n + ((jy + n - sy) % n)];
        }
        uref = &shifted;
    }

    const cplx ip = inner(psi, *uref);
    const double theta = std::arg(ip);
    const cplx rot = std::polar(1.0, theta);

    Field diff(psi.grid);
    for (std::size_t i = 0; i < psi.size(); ++i)
        diff.values[i] = psi.values[i] - rot * uref->values[i];
    Field ld(psi.grid);
    g.apply_laplacian(diff.data(), ld.data());
    const double d2 = g.quad_norm2sq(diff.data()) + g.quad_norm2sq(ld.data());
    return std::sqrt(std::max(d2, 0.0));
}

StabilityResult orbital_stability_experiment(const SolveReport& ground,
                                             double kappa,
                                             const ProblemParams& prm,
                                             const IntegratorConfig& icfg,
                                             std::uint64_t seed) {
    if (!ground.converged)
        throw structural_error("orbital_stability_experiment: ground report not converged");
    icfg.validate();

    const Field& u = ground.state;
    Field psi0 = u;
    if (kappa > 0.0) {
        // smooth H^2 noise: a few random radial bumps (periodic: random low modes)
        Field noise(u.grid);
        std::mt19937_64 rng(seed ? seed : 1);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        if (const auto* rg = dynamic_cast<const RadialGrid*>(u.grid.get())) {
            const auto& r = rg->nodes();
            for (int b = 0; b < 4; ++b) {
                const double amp = unif(rng);
                const double at = 0.45 * rg->r_max() * std::abs(unif(rng));
                const double wd = 0.3 + 0.2 * std::abs(unif(rng));
                for (std::size_t i = 0; i < noise.size(); ++i) {
                    const double z = (r[i] - at) / (wd * rg->r_max() * 0.1 + wd);
                    noise.values[i] += amp * std::exp(-z * z);
                }
            }
        } else {
            const auto* pg = static_cast<const PeriodicGrid*>(u.grid.get());
            const std::size_t n = pg->n_per_dim();
            for (int b = 0; b < 6; ++b) {
                const double ax = unif(rng), bx = unif(rng);
                const int kx = 1 + static_cast<int>(3.0 * std::abs(unif(rng)));
                for (std::size_t j = 0; j < pg->size(); ++j) {
                    const double x = pg->coord(pg->dim() == 1 ? j : j / n);
                    noise.values[j] +=
                        cplx{ax, bx} *
                        std::sin(2.0 * std::numbers::pi * kx * x / pg->box_length());
                }
            }
        }
        const double nn = norm_l2(noise);
        for (std::size_t i = 0; i < psi0.size(); ++i)
            psi0.values[i] += (kappa / nn) * noise.values[i];
        psi0 = renormalize_to_mass(psi0, prm.a);
    }

    StabilityResult res;
    res.dist0 = orbit_distance_h2(psi0, u);

    Field psi = psi0;
    const LinearPropagator prop(psi.grid, prm.mu, icfg.dt);
    const auto steps = static_cast<long>(std::llround(icfg.T / icfg.dt));
    for (long k = 0; k <= steps; ++k) {
        if (k > 0) step_strang(psi, icfg.dt, prm, prop);
        if (k % icfg.monitor_every == 0 || k == steps) {
            res.times.push_back(k * icfg.dt);
            res.dist.push_back(orbit_distance_h2(psi, u));
        }
    }
    res.sup_dist = *std::max_element(res.dist.begin(), res.dist.end());
    return res;
}

}  // namespace bnls
