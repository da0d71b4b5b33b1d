#ifndef BNLS_THRESHOLDS_HPP
#define BNLS_THRESHOLDS_HPP

#include <optional>
#include <string>

#include "bnls/functionals.hpp"
#include "bnls/grid.hpp"

namespace bnls {

/// landmarks of g_p(s) = s^2/2 - (mu a/2) s - (C^p/p) a^{p(1-gamma)} s^{p gamma}
struct GLandmarks {
    double s1 = 0.0;     // local strict minimum of g_p
    double s2 = 0.0;     // global strict maximum of g_p
    double R0 = 0.0;     // first positive zero
    double R1 = 0.0;     // second positive zero
    double s_bar = 0.0;  // inflection landmark between R0 and s2
    double g_s1 = 0.0;
    double g_s2 = 0.0;
};

/// All closed-form constants for one (N, p, mu, a) with the C_{N,p} used.
struct ConstantsReport {
    int N = 0;
    double p = 0.0, mu = 0.0, a = 0.0;
    double C_Np = 0.0;
    std::string C_source;  // "weinstein" | "sobolev" | "given"
    std::optional<double> S;  // Sobolev constant estimate when computed
    double a0 = 0.0;
    double rho_a = 0.0;
    double rho_0 = 0.0;
    double C0 = 0.0;
    double h_max = 0.0;  // h_a(rho_a)
    bool condition_holds = false;  // mu^{p gamma - 2} a^{p-2} < C0
    std::optional<GLandmarks> landmarks;  // present when the condition holds
    double b = 0.0, c = 0.0;  // mass-rescaling exponents
};

double h_a(double s, double a, const ProblemParams& prm, double C_Np);
double rho_a(double a, const ProblemParams& prm, double C_Np);
double a0_threshold(const ProblemParams& prm, double C_Np);
double C0_threshold(const ProblemParams& prm, double C_Np);
double h_a_max(double a, const ProblemParams& prm, double C_Np);
double rho_0(const ProblemParams& prm, double C_Np);
bool condition_e4(const ProblemParams& prm, double C_Np);

GLandmarks g_landmarks(const ProblemParams& prm, double a, double C_Np);

/// (b, c) = (2(p-2)/(8-N(p-2)), 8/(8-N(p-2)))
struct ScalingExponents {
    double b, c;
};
ScalingExponents scaling_exponents(const ProblemParams& prm);

struct GnEstimateOptions {
    int max_iters = 20000;
    double tol = 1e-10;  // relative quotient change per step
};

/// best Gagliardo-Nirenberg constant by maximizing the Weinstein quotient
/// W(u) = ||u||_p / (||u||_2^{1-gamma} ||Delta u||_2^{gamma}) over radial fields
double gn_constant_estimate(const ProblemParams& prm,
                            std::shared_ptr<const RadialGrid> grid,
                            const GnEstimateOptions& opt = {});

/// the explicit extremal of the Sobolev inequality, sampled on the grid
Field bubble(double epsilon, std::shared_ptr<const RadialGrid> grid);

/// S estimated from the epsilon = 1 bubble as ||Delta u||^2 / ||u||_{4*}^2
double sobolev_constant_estimate(int N, std::shared_ptr<const RadialGrid> grid);

/// bubble with a quintic cutoff: identity on |x| <= R, zero beyond 2R
Field truncated_bubble(double epsilon, double R,
                       std::shared_ptr<const RadialGrid> grid);

ConstantsReport constants_report(const ProblemParams& prm, double C_Np,
                                 const std::string& source,
                                 std::optional<double> S = std::nullopt);

}  // namespace bnls

#endif
