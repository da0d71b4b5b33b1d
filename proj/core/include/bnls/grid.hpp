#ifndef BNLS_GRID_HPP
#define BNLS_GRID_HPP

#include <complex>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "bnls/errors.hpp"

namespace bnls {

using cplx = std::complex<double>;

/// Spatial discretization of R^N with Laplacian, bilaplacian and
/// quadrature-consistent norms. Two flavors: RadialGrid (any N >= 1)
/// and PeriodicGrid (N in {1,2}). All operations are const and safe to
/// call concurrently on shared grids.
class Grid {
  public:
    virtual ~Grid() = default;

    virtual std::size_t size() const = 0;
    virtual int dim() const = 0;
    virtual std::string flavor() const = 0;   // "radial" | "periodic"
    virtual double extent() const = 0;        // r_max resp. box length

    /// quadrature weights; sum integrates 1 over the domain
    const std::vector<double>& weights() const { return w_; }

    /// apply the discrete Laplacian (in and out of length size())
    virtual void apply_laplacian(const cplx* in, cplx* out) const = 0;
    /// apply the discrete bilaplacian
    virtual void apply_bilaplacian(const cplx* in, cplx* out) const = 0;

    /// ||grad u||_2^2 through the operator quadratic form; exactly >= 0
    virtual double grad_form(const cplx* u) const = 0;
    /// ||Delta u||_2^2 through the operator quadratic form; exactly >= 0
    virtual double bilap_form(const cplx* u) const = 0;

    /// sample u(s x), used by the mass-preserving dilation
    virtual std::vector<cplx> resample_scaled(const cplx* u, double s) const = 0;

    cplx quad_inner(const cplx* u, const cplx* v) const;
    double quad_norm2sq(const cplx* u) const;
    double quad_lp(const cplx* u, double p) const;  // ||u||_p^p

  protected:
    std::vector<double> w_;
};

/// Uniform finite-volume discretization of radial functions on [0, r_max].
/// Interior nodes sit at cell centers (i-1/2)h; the two end nodes r = 0 and
/// r = r_max carry zero quadrature weight and hold fitted point values, so
/// the flux-form operator is exactly self-adjoint w.r.t. the weights and the
/// quadrature integrates 1 over the ball exactly.
class RadialGrid final : public Grid {
  public:
    RadialGrid(int N, double r_max, std::size_t n);

    std::size_t size() const override { return n_; }
    int dim() const override { return N_; }
    std::string flavor() const override { return "radial"; }
    double extent() const override { return r_max_; }

    double r_max() const { return r_max_; }
    double h() const { return h_; }
    const std::vector<double>& nodes() const { return r_; }
    double sphere_area() const { return omega_; }  // |S^{N-1}|

    void apply_laplacian(const cplx* in, cplx* out) const override;
    void apply_bilaplacian(const cplx* in, cplx* out) const override;
    double grad_form(const cplx* u) const override;
    double bilap_form(const cplx* u) const override;
    std::vector<cplx> resample_scaled(const cplx* u, double s) const override;

    /// fill the r=0 and r=r_max diagnostic values from the interior profile
    void refresh_end_values(cplx* u) const;

    /// symmetric tridiagonal representation of the (negated) Laplacian on the
    /// weighted interior: T = -W^{1/2} L W^{-1/2}, positive semidefinite.
    /// Returns diagonal (size n-2) and off-diagonal (size n-3).
    void symmetric_tridiagonal(std::vector<double>& diag,
                               std::vector<double>& offdiag) const;

    /// grow the domain keeping the cell width fixed
    std::shared_ptr<RadialGrid> with_extent(double new_r_max) const;

  private:
    int N_;
    double r_max_, h_, omega_;
    std::size_t n_;                 // total nodes incl. the two end nodes
    std::vector<double> r_;
    std::vector<double> face_m_;    // omega * (jh)^{N-1} / h, faces j=1..nc-1
    double row0_[4];                // laplacian-at-origin fit on nodes 1..4
    double rowN_[4];                // one-sided laplacian at r_max
    double fit0_[4];                // value-at-origin fit on nodes 1..4
};

/// Periodic Cartesian box [0,L)^dim, dim in {1,2}, with Fourier-multiplier
/// operators (exact on every resolvable mode).
class PeriodicGrid final : public Grid {
  public:
    PeriodicGrid(int dim, double box_length, std::size_t n_per_dim);
    ~PeriodicGrid() override;

    PeriodicGrid(const PeriodicGrid&) = delete;
    PeriodicGrid& operator=(const PeriodicGrid&) = delete;

    std::size_t size() const override { return total_; }
    int dim() const override { return dim_; }
    std::string flavor() const override { return "periodic"; }
    double extent() const override { return L_; }

    std::size_t n_per_dim() const { return n_; }
    double box_length() const { return L_; }
    double h() const { return h_; }
    /// wavenumber of mode index k in one dimension (FFT layout)
    double wavenumber(std::size_t k) const { return xi_[k]; }
    const std::vector<double>& wavenumbers() const { return xi_; }
    /// coordinate of node j in one dimension
    double coord(std::size_t j) const { return h_ * static_cast<double>(j); }

    void apply_laplacian(const cplx* in, cplx* out) const override;
    void apply_bilaplacian(const cplx* in, cplx* out) const override;
    double grad_form(const cplx* u) const override;
    double bilap_form(const cplx* u) const override;
    std::vector<cplx> resample_scaled(const cplx* u, double s) const override;

    void fft_forward(const cplx* in, cplx* out) const;   // unnormalized
    void fft_inverse(const cplx* in, cplx* out) const;   // divides by n^dim

  private:
    void apply_multiplier(const cplx* in, cplx* out,
                          double (*mult)(double xi2)) const;
    double spectral_form(const cplx* u, int pow) const;

    int dim_;
    double L_, h_;
    std::size_t n_, total_;
    std::vector<double> xi_;
    void* plan_fwd_ = nullptr;   // fftw_plan
    void* plan_bwd_ = nullptr;
};

/// Discretized complex field on a grid.
struct Field {
    std::shared_ptr<const Grid> grid;
    std::vector<cplx> values;

    Field() = default;
    Field(std::shared_ptr<const Grid> g, std::vector<cplx> v);
    explicit Field(std::shared_ptr<const Grid> g);

    std::size_t size() const { return values.size(); }
    const cplx* data() const { return values.data(); }
    cplx* data() { return values.data(); }
};

Field laplacian(const Field& u);
Field bilaplacian(const Field& u);
double norm_l2(const Field& u);
double norm_lp(const Field& u, double p);
double seminorm_grad(const Field& u);
double seminorm_bilap(const Field& u);
cplx inner(const Field& u, const Field& v);

/// ||u||_2^2, ||grad u||_2^2, ||Delta u||_2^2 and ||u||_p^p in one pass
struct FieldNorms {
    double mass2;   // ||u||_2^2
    double grad2;   // ||grad u||_2^2
    double bilap2;  // ||Delta u||_2^2
    double lp;      // ||u||_p^p
};
FieldNorms field_norms(const Field& u, double p);

void check_same_grid(const Field& u, const Field& v);
void check_finite(const Field& u, const char* where);

}  // namespace bnls

#endif
