#ifndef BNLS_SOLVERS_HPP
#define BNLS_SOLVERS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "bnls/functionals.hpp"
#include "bnls/grid.hpp"
#include "bnls/thresholds.hpp"

namespace bnls {

struct SolverConfig {
    double step = 1.0;          // initial flow step
    int max_iters = 40000;
    double tol_grad = 1e-6;     // tangent-gradient tolerance, relative to the
                                // gradient scale (A + mu G + P)/a
    std::uint64_t seed = 0;     // perturbation seed for multi-start
    double backtrack_factor = 0.5;
    int backtrack_max = 60;
    bool r_max_check = false;   // rerun on a doubled domain and report the drift
};

/// Outcome of a constrained solve; `state` sits on the Pohozaev manifold
/// (for ground/excited) or the Nehari set (action) to roundoff.
struct SolveReport {
    Field state;
    double level = 0.0;       // alpha_p(a), M_{mu,p}(a) or theta_lambda
    double lambda = 0.0;      // multiplier from lambda a^2 = -A + mu G + P
    double lambda_rayleigh = 0.0;
    bool multiplier_mismatch = false;  // relative gap > 1e-4 flags under-convergence
    double residual = 0.0;     // tangent-gradient norm at the reported state
    double residual_rel = 0.0;
    double A = 0.0, G = 0.0, P = 0.0;
    double mass = 0.0;
    double q_value = 0.0;      // Q_p(state)
    double phi_dd_1 = 0.0;     // phi''(1) at the reported state
    int iterations = 0;
    bool converged = false;
    std::optional<double> level_doubled_domain;  // set when r_max_check ran
    std::optional<ConstantsReport> constants;    // thresholds used, if any
    std::string kind;          // "ground" | "excited" | "action"
};

/// local minimizer of Psi on M_a (Pohozaev-plus branch)
SolveReport ground_state(const ProblemParams& prm,
                         std::shared_ptr<const Grid> grid,
                         const SolverConfig& cfg,
                         const ConstantsReport* constants = nullptr);

/// minimizer of Psi over the Pohozaev-minus branch (high-energy state)
SolveReport excited_state(const ProblemParams& prm,
                          std::shared_ptr<const Grid> grid,
                          const SolverConfig& cfg,
                          const ConstantsReport* constants = nullptr,
                          const Field* initial = nullptr);

/// least-action state at fixed frequency lambda (Nehari minimization)
SolveReport action_state(double lambda, const ProblemParams& prm,
                         std::shared_ptr<const Grid> grid,
                         const SolverConfig& cfg,
                         const Field* initial = nullptr);

enum class SweepKind { mass, mu };
enum class SweepSolver { ground, excited };

struct SweepPoint {
    double value = 0.0;  // the swept mass or mu
    SolveReport report;
};

/// run the requested solver over the range, warm-starting each point
std::vector<SweepPoint> sweep(SweepKind kind, SweepSolver which,
                              const std::vector<double>& values,
                              ProblemParams prm,
                              std::shared_ptr<const Grid> grid,
                              const SolverConfig& cfg,
                              const ConstantsReport* constants = nullptr);

// --- shared machinery (exposed for tests and the dynamics experiments) ---

class Preconditioner {
  public:
    virtual ~Preconditioner() = default;
    virtual void apply(const Grid& g, const cplx* in, cplx* out) const = 0;
};

std::unique_ptr<Preconditioner> make_preconditioner(const Grid& g, double alpha);

Field renormalize_to_mass(const Field& u, double a);

}  // namespace bnls

#endif
