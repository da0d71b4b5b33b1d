#ifndef BNLS_FUNCTIONALS_HPP
#define BNLS_FUNCTIONALS_HPP

#include <optional>

#include "bnls/grid.hpp"

namespace bnls {

/// Equation parameters (N, p, mu, a) with the derived exponents.
struct ProblemParams {
    int N = 1;
    double p = 3.0;
    double mu = 0.0;
    double a = 1.0;

    ProblemParams() = default;
    ProblemParams(int N_, double p_, double mu_, double a_);

    double gamma_p = 0.0;  // N(p-2)/(4p)
    double p_bar = 0.0;    // 2 + 8/N, mass-critical exponent
    double p_star = 0.0;   // 2N/(N-4) for N >= 5, +inf otherwise
};

double gamma_p(int N, double p);
double mass_critical_exponent(int N);   // p_bar
double sobolev_critical_exponent(int N);  // 4*, +inf for N <= 4

/// Cached norms plus the fibering critical points of phi_u(s) = Psi(u_s).
struct FiberingDiagnostics {
    double A = 0.0;  // ||Delta u||_2^2
    double G = 0.0;  // ||grad u||_2^2
    double P = 0.0;  // ||u||_p^p
    double s_tilde = 0.0;                 // maximizer of f~
    double f_tilde_max = 0.0;             // f~(s_tilde)
    std::optional<double> s_plus;         // smaller root (local min of phi)
    std::optional<double> s_minus;        // larger root (local max of phi)
    std::optional<double> phi_dd_plus;    // phi''(s_plus)
    std::optional<double> phi_dd_minus;   // phi''(s_minus)
};

// scalar-level forms used throughout the solvers (same cached quantities)
double energy_scalars(double A, double G, double P, const ProblemParams& prm);
double pohozaev_scalars(double A, double G, double P, const ProblemParams& prm);
double phi_value(double s, double A, double G, double P, const ProblemParams& prm);
double phi_dd(double s, double A, double G, double P, const ProblemParams& prm);

double energy(const Field& u, const ProblemParams& prm);
double pohozaev(const Field& u, const ProblemParams& prm);
double action(const Field& u, double lambda, const ProblemParams& prm);

/// mass-preserving dilation u_s(x) = s^{N/2} u(s x)
Field dilate(const Field& u, double s);

FiberingDiagnostics fibering_scalars(double A, double G, double P,
                                     const ProblemParams& prm);
FiberingDiagnostics fibering(const Field& u, const ProblemParams& prm);

Field project_plus(const Field& u, const ProblemParams& prm);
Field project_minus(const Field& u, const ProblemParams& prm);

/// scalar t with t u on the Nehari set of the action I_lambda
double nehari_scale(const Field& u, double lambda, const ProblemParams& prm);

/// Lagrange multiplier lambda = (-A + mu G + P)/a^2; requires ||u||_2 = a
double multiplier(const Field& u, const ProblemParams& prm);

/// gradient of the energy; with tangent set, projected onto the tangent
/// space of the mass sphere at u
Field grad_energy(const Field& u, const ProblemParams& prm, bool tangent);

}  // namespace bnls

#endif
