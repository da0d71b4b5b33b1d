#include "bnls/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

namespace bnls {

namespace {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

double unit_sphere_area(int N) {
    // |S^{N-1}| = 2 pi^{N/2} / Gamma(N/2)
    return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

// solve a small dense system in place (partial pivoting); A is m x m row-major
void solve_small(int m, double* A, double* b) {
    for (int c = 0; c < m; ++c) {
        int piv = c;
        for (int r = c + 1; r < m; ++r)
            if (std::abs(A[r * m + c]) > std::abs(A[piv * m + c])) piv = r;
        if (piv != c) {
            for (int k = 0; k < m; ++k) std::swap(A[c * m + k], A[piv * m + k]);
            std::swap(b[c], b[piv]);
        }
        const double d = A[c * m + c];
        for (int r = c + 1; r < m; ++r) {
            const double f = A[r * m + c] / d;
            for (int k = c; k < m; ++k) A[r * m + k] -= f * A[c * m + k];
            b[r] -= f * b[c];
        }
    }
    for (int r = m - 1; r >= 0; --r) {
        double s = b[r];
        for (int k = r + 1; k < m; ++k) s -= A[r * m + k] * b[k];
        b[r] = s / A[r * m + r];
    }
}

}  // namespace

// ---------------------------------------------------------------- Grid base

namespace {

// pairwise reduction keeps the large weighted sums accurate
template <typename T, typename F>
T pairwise_sum(std::size_t lo, std::size_t hi, const F& term) {
    if (hi - lo <= 64) {
        T s{};
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum<T>(lo, mid, term) + pairwise_sum<T>(mid, hi, term);
}

}  // namespace

cplx Grid::quad_inner(const cplx* u, const cplx* v) const {
    return pairwise_sum<cplx>(0, w_.size(), [&](std::size_t i) {
        return w_[i] * u[i] * std::conj(v[i]);
    });
}

double Grid::quad_norm2sq(const cplx* u) const {
    return pairwise_sum<double>(0, w_.size(), [&](std::size_t i) {
        return w_[i] * std::norm(u[i]);
    });
}

double Grid::quad_lp(const cplx* u, double p) const {
    return pairwise_sum<double>(0, w_.size(), [&](std::size_t i) {
        return w_[i] * std::pow(std::abs(u[i]), p);
    });
}

// ---------------------------------------------------------------- RadialGrid

RadialGrid::RadialGrid(int N, double r_max, std::size_t n)
    : N_(N), r_max_(r_max), n_(n) {
    if (N < 1) throw structural_error("RadialGrid: dimension must be >= 1");
    if (!(r_max > 0)) throw structural_error("RadialGrid: r_max must be positive");
    if (n < 16) throw structural_error("RadialGrid: need at least 16 nodes");

    const std::size_t nc = n - 2;
    h_ = r_max / static_cast<double>(nc);
    omega_ = unit_sphere_area(N);

    r_.resize(n);
    r_[0] = 0.0;
    for (std::size_t i = 1; i <= nc; ++i) r_[i] = (static_cast<double>(i) - 0.5) * h_;
    r_[n - 1] = r_max;

    // exact cell volumes: the flux-form operator is pointwise consistent with
    // them all the way to the origin, and the rule integrates 1 over the
    // ball exactly; the end nodes are spectators with zero weight
    w_.assign(n, 0.0);
    for (std::size_t i = 1; i <= nc; ++i) {
        const double lo = static_cast<double>(i - 1) * h_;
        const double hi = static_cast<double>(i) * h_;
        w_[i] = omega_ * (std::pow(hi, N) - std::pow(lo, N)) / N;
    }

    // interior faces j = 1..nc-1 at radius j*h
    face_m_.assign(nc, 0.0);  // index j, entries 1..nc-1 used
    for (std::size_t j = 1; j < nc; ++j)
        face_m_[j] = omega_ * std::pow(static_cast<double>(j) * h_, N - 1) / h_;

    // even-quartic fit u ~ a0 + a1 rho + a2 rho^2 + a3 rho^3, rho = r^2,
    // through the first four interior nodes; laplacian(0) = 2 N a1
    {
        double V[16], b[4];
        for (int j = 0; j < 4; ++j) {
            const double rho = r_[j + 1] * r_[j + 1];
            double p = 1.0;
            for (int k = 0; k < 4; ++k) { V[j * 4 + k] = p; p *= rho; }
        }
        for (int comp = 0; comp < 2; ++comp) {
            // solve V^T c = e_comp so that a_comp = c . u
            double VT[16];
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k) VT[j * 4 + k] = V[k * 4 + j];
            for (int k = 0; k < 4; ++k) b[k] = (k == comp) ? 1.0 : 0.0;
            solve_small(4, VT, b);
            for (int k = 0; k < 4; ++k)
                (comp == 0 ? fit0_ : row0_)[k] = b[k] * (comp == 1 ? 2.0 * N : 1.0);
        }
    }

    // one-sided cubic fit at r_max for the diagnostic end row
    {
        double V[16], b[4];
        const double* rr = &r_[n - 5];  // last four interior nodes
        for (int j = 0; j < 4; ++j) {
            double p = 1.0;
            for (int k = 0; k < 4; ++k) { V[j * 4 + k] = p; p *= rr[j]; }
        }
        const double R = r_max_;
        // Delta u(R) = u''(R) + (N-1)/R u'(R) in the monomial basis
        double want[4] = {0.0, (N - 1.0) / R, 2.0 + (N - 1.0) / R * 2.0 * R,
                          6.0 * R + (N - 1.0) / R * 3.0 * R * R};
        double VT[16];
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) VT[j * 4 + k] = V[k * 4 + j];
        for (int k = 0; k < 4; ++k) b[k] = want[k];
        solve_small(4, VT, b);
        for (int k = 0; k < 4; ++k) rowN_[k] = b[k];
    }
}

void RadialGrid::apply_laplacian(const cplx* in, cplx* out) const {
    const std::size_t nc = n_ - 2;
    // flux through face j (j = 1..nc-1); zero flux at r = 0 and r_max
    cplx prev_flux{0.0, 0.0};
    for (std::size_t i = 1; i <= nc; ++i) {
        const cplx next_flux =
            (i < nc) ? face_m_[i] * (in[i + 1] - in[i]) : cplx{0.0, 0.0};
        out[i] = (next_flux - prev_flux) / w_[i];
        prev_flux = next_flux;
    }
    cplx v0{0.0, 0.0}, vN{0.0, 0.0};
    for (int k = 0; k < 4; ++k) {
        v0 += row0_[k] * in[k + 1];
        vN += rowN_[k] * in[n_ - 5 + k];
    }
    out[0] = v0;
    out[n_ - 1] = vN;
}

void RadialGrid::apply_bilaplacian(const cplx* in, cplx* out) const {
    std::vector<cplx> mid(n_);
    apply_laplacian(in, mid.data());
    apply_laplacian(mid.data(), out);
}

double RadialGrid::grad_form(const cplx* u) const {
    const std::size_t nc = n_ - 2;
    double s = 0.0;
    for (std::size_t j = 1; j < nc; ++j) s += face_m_[j] * std::norm(u[j + 1] - u[j]);
    return s;
}

double RadialGrid::bilap_form(const cplx* u) const {
    std::vector<cplx> mid(n_);
    apply_laplacian(u, mid.data());
    return quad_norm2sq(mid.data());
}

std::vector<cplx> RadialGrid::resample_scaled(const cplx* u, double s) const {
    const std::size_t nc = n_ - 2;
    std::vector<cplx> out(n_, cplx{0.0, 0.0});
    const cplx* v = u + 1;  // interior values at (i+1/2)h, i = 0..nc-1
    auto at = [&](long idx) -> cplx {
        if (idx < 0) idx = -idx - 1;  // even reflection through r = 0
        if (idx >= static_cast<long>(nc)) return {0.0, 0.0};
        return v[idx];
    };
    for (std::size_t i = 0; i < nc; ++i) {
        const double x = s * (static_cast<double>(i) + 0.5);  // in units of h
        const double t = x - 0.5;
        const long k = static_cast<long>(std::floor(t));
        const double f = t - static_cast<double>(k);
        // cubic Lagrange on offsets -1,0,1,2
        const double cm1 = -f * (f - 1.0) * (f - 2.0) / 6.0;
        const double c0 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
        const double c1 = -(f + 1.0) * f * (f - 2.0) / 2.0;
        const double c2 = (f + 1.0) * f * (f - 1.0) / 6.0;
        out[i + 1] = cm1 * at(k - 1) + c0 * at(k) + c1 * at(k + 1) + c2 * at(k + 2);
    }
    refresh_end_values(out.data());
    return out;
}

void RadialGrid::refresh_end_values(cplx* u) const {
    cplx v0{0.0, 0.0};
    for (int k = 0; k < 4; ++k) v0 += fit0_[k] * u[k + 1];
    u[0] = v0;
    u[n_ - 1] = 1.5 * u[n_ - 2] - 0.5 * u[n_ - 3];
}

void RadialGrid::symmetric_tridiagonal(std::vector<double>& diag,
                                       std::vector<double>& offdiag) const {
    const std::size_t nc = n_ - 2;
    diag.assign(nc, 0.0);
    offdiag.assign(nc - 1, 0.0);
    for (std::size_t i = 1; i <= nc; ++i) {
        const double ml = (i >= 2) ? face_m_[i - 1] : 0.0;
        const double mr = (i < nc) ? face_m_[i] : 0.0;
        diag[i - 1] = (ml + mr) / w_[i];
    }
    for (std::size_t i = 1; i < nc; ++i)
        offdiag[i - 1] = -face_m_[i] / std::sqrt(w_[i] * w_[i + 1]);
}

std::shared_ptr<RadialGrid> RadialGrid::with_extent(double new_r_max) const {
    const std::size_t extra = static_cast<std::size_t>(
        std::ceil((new_r_max - r_max_) / h_));
    return std::make_shared<RadialGrid>(N_, r_max_ + extra * h_, n_ + extra);
}

// -------------------------------------------------------------- PeriodicGrid

PeriodicGrid::PeriodicGrid(int dim, double box_length, std::size_t n_per_dim)
    : dim_(dim), L_(box_length), n_(n_per_dim) {
    if (dim != 1 && dim != 2)
        throw structural_error("PeriodicGrid: dim must be 1 or 2");
    if (!(box_length > 0))
        throw structural_error("PeriodicGrid: box length must be positive");
    if (n_per_dim < 4 || n_per_dim % 2 != 0)
        throw structural_error("PeriodicGrid: n_per_dim must be even and >= 4");

    h_ = L_ / static_cast<double>(n_);
    total_ = (dim_ == 1) ? n_ : n_ * n_;
    w_.assign(total_, std::pow(h_, dim_));

    xi_.resize(n_);
    const double dxi = 2.0 * std::numbers::pi / L_;
    for (std::size_t k = 0; k < n_; ++k) {
        const long kk = (k <= n_ / 2) ? static_cast<long>(k)
                                      : static_cast<long>(k) - static_cast<long>(n_);
        xi_[k] = dxi * static_cast<double>(kk);
    }

    std::scoped_lock lk(fftw_planner_mutex());
    std::vector<cplx> tmp_in(total_), tmp_out(total_);
    auto* in = reinterpret_cast<fftw_complex*>(tmp_in.data());
    auto* out = reinterpret_cast<fftw_complex*>(tmp_out.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if (dim_ == 1) {
        plan_fwd_ = fftw_plan_dft_1d(static_cast<int>(n_), in, out, FFTW_FORWARD, flags);
        plan_bwd_ = fftw_plan_dft_1d(static_cast<int>(n_), in, out, FFTW_BACKWARD, flags);
    } else {
        plan_fwd_ = fftw_plan_dft_2d(static_cast<int>(n_), static_cast<int>(n_),
                                     in, out, FFTW_FORWARD, flags);
        plan_bwd_ = fftw_plan_dft_2d(static_cast<int>(n_), static_cast<int>(n_),
                                     in, out, FFTW_BACKWARD, flags);
    }
    if (!plan_fwd_ || !plan_bwd_) throw structural_error("PeriodicGrid: FFTW planning failed");
}

PeriodicGrid::~PeriodicGrid() {
    std::scoped_lock lk(fftw_planner_mutex());
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void PeriodicGrid::fft_forward(const cplx* in, cplx* out) const {
    fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_),
                     reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

void PeriodicGrid::fft_inverse(const cplx* in, cplx* out) const {
    fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_),
                     reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
    const double inv = 1.0 / static_cast<double>(total_);
    for (std::size_t i = 0; i < total_; ++i) out[i] *= inv;
}

void PeriodicGrid::apply_multiplier(const cplx* in, cplx* out,
                                    double (*mult)(double xi2)) const {
    std::vector<cplx> hat(total_);
    fft_forward(in, hat.data());
    const double inv = 1.0 / static_cast<double>(total_);
    if (dim_ == 1) {
        for (std::size_t k = 0; k < n_; ++k)
            hat[k] *= mult(xi_[k] * xi_[k]) * inv;
    } else {
        for (std::size_t kx = 0; kx < n_; ++kx)
            for (std::size_t ky = 0; ky < n_; ++ky)
                hat[kx * n_ + ky] *= mult(xi_[kx] * xi_[kx] + xi_[ky] * xi_[ky]) * inv;
    }
    fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_),
                     reinterpret_cast<fftw_complex*>(hat.data()),
                     reinterpret_cast<fftw_complex*>(out));
}

void PeriodicGrid::apply_laplacian(const cplx* in, cplx* out) const {
    apply_multiplier(in, out, [](double xi2) { return -xi2; });
}

void PeriodicGrid::apply_bilaplacian(const cplx* in, cplx* out) const {
    apply_multiplier(in, out, [](double xi2) { return xi2 * xi2; });
}

double PeriodicGrid::spectral_form(const cplx* u, int pw) const {
    std::vector<cplx> hat(total_);
    fft_forward(u, hat.data());
    const double parseval = std::pow(h_, dim_) / static_cast<double>(total_);
    double s = 0.0;
    if (dim_ == 1) {
        for (std::size_t k = 0; k < n_; ++k) {
            const double xi2 = xi_[k] * xi_[k];
            s += (pw == 1 ? xi2 : xi2 * xi2) * std::norm(hat[k]);
        }
    } else {
        for (std::size_t kx = 0; kx < n_; ++kx)
            for (std::size_t ky = 0; ky < n_; ++ky) {
                const double xi2 = xi_[kx] * xi_[kx] + xi_[ky] * xi_[ky];
                s += (pw == 1 ? xi2 : xi2 * xi2) * std::norm(hat[kx * n_ + ky]);
            }
    }
    return s * parseval;
}

double PeriodicGrid::grad_form(const cplx* u) const { return spectral_form(u, 1); }
double PeriodicGrid::bilap_form(const cplx* u) const { return spectral_form(u, 2); }

std::vector<cplx> PeriodicGrid::resample_scaled(const cplx* u, double s) const {
    std::vector<cplx> out(total_);
    const auto nn = static_cast<long>(n_);
    auto wrap = [&](long idx) -> std::size_t {
        idx %= nn;
        if (idx < 0) idx += nn;
        return static_cast<std::size_t>(idx);
    };
    auto cubic_w = [](double f, double c[4]) {
        c[0] = -f * (f - 1.0) * (f - 2.0) / 6.0;
        c[1] = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
        c[2] = -(f + 1.0) * f * (f - 2.0) / 2.0;
        c[3] = (f + 1.0) * f * (f - 1.0) / 6.0;
    };
    if (dim_ == 1) {
        for (std::size_t j = 0; j < n_; ++j) {
            const double t = s * static_cast<double>(j);
            const long k = static_cast<long>(std::floor(t));
            double c[4];
            cubic_w(t - static_cast<double>(k), c);
            cplx acc{0.0, 0.0};
            for (int m = -1; m <= 2; ++m) acc += c[m + 1] * u[wrap(k + m)];
            out[j] = acc;
        }
    } else {
        for (std::size_t jx = 0; jx < n_; ++jx) {
            const double tx = s * static_cast<double>(jx);
            const long kx = static_cast<long>(std::floor(tx));
            double cx[4];
            cubic_w(tx - static_cast<double>(kx), cx);
            for (std::size_t jy = 0; jy < n_; ++jy) {
                const double ty = s * static_cast<double>(jy);
                const long ky = static_cast<long>(std::floor(ty));
                double cy[4];
                cubic_w(ty - static_cast<double>(ky), cy);
                cplx acc{0.0, 0.0};
                for (int mx = -1; mx <= 2; ++mx)
                    for (int my = -1; my <= 2; ++my)
                        acc += cx[mx + 1] * cy[my + 1] *
                               u[wrap(kx + mx) * n_ + wrap(ky + my)];
                out[jx * n_ + jy] = acc;
            }
        }
    }
    return out;
}

// --------------------------------------------------------------------- Field

Field::Field(std::shared_ptr<const Grid> g, std::vector<cplx> v)
    : grid(std::move(g)), values(std::move(v)) {
    if (!grid) throw structural_error("Field: null grid");
    if (values.size() != grid->size())
        throw structural_error("Field: value count does not match grid");
}

Field::Field(std::shared_ptr<const Grid> g) : grid(std::move(g)) {
    if (!grid) throw structural_error("Field: null grid");
    values.assign(grid->size(), cplx{0.0, 0.0});
}

void check_same_grid(const Field& u, const Field& v) {
    if (u.grid.get() != v.grid.get())
        throw structural_error("fields live on different grids");
}

void check_finite(const Field& u, const char* where) {
    for (const cplx& z : u.values)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw consistency_error(std::string(where) + ": non-finite field value");
}

Field laplacian(const Field& u) {
    if (u.values.size() != u.grid->size())
        throw structural_error("laplacian: field/grid size mismatch");
    Field out(u.grid);
    u.grid->apply_laplacian(u.data(), out.data());
    check_finite(out, "laplacian");
    return out;
}

Field bilaplacian(const Field& u) {
    if (u.values.size() != u.grid->size())
        throw structural_error("bilaplacian: field/grid size mismatch");
    Field out(u.grid);
    u.grid->apply_bilaplacian(u.data(), out.data());
    check_finite(out, "bilaplacian");
    return out;
}

namespace {
double sqrt_clamped(double radicand, const char* what) {
    if (radicand < -1e-12)
        throw consistency_error(std::string(what) + ": negative radicand beyond tolerance");
    return std::sqrt(std::max(radicand, 0.0));
}
}  // namespace

double norm_l2(const Field& u) {
    return sqrt_clamped(u.grid->quad_norm2sq(u.data()), "norm_l2");
}

double norm_lp(const Field& u, double p) {
    if (p < 1.0) throw regime_error("norm_lp: p must be >= 1");
    return std::pow(u.grid->quad_lp(u.data(), p), 1.0 / p);
}

double seminorm_grad(const Field& u) {
    return sqrt_clamped(u.grid->grad_form(u.data()), "seminorm_grad");
}

double seminorm_bilap(const Field& u) {
    return sqrt_clamped(u.grid->bilap_form(u.data()), "seminorm_bilap");
}

cplx inner(const Field& u, const Field& v) {
    check_same_grid(u, v);
    return u.grid->quad_inner(u.data(), v.data());
}

FieldNorms field_norms(const Field& u, double p) {
    FieldNorms n{};
    n.mass2 = u.grid->quad_norm2sq(u.data());
    n.grad2 = u.grid->grad_form(u.data());
    n.bilap2 = u.grid->bilap_form(u.data());
    n.lp = u.grid->quad_lp(u.data(), p);
    return n;
}

}  // namespace bnls
