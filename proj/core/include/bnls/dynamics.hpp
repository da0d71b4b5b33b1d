#ifndef BNLS_DYNAMICS_HPP
#define BNLS_DYNAMICS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "bnls/functionals.hpp"
#include "bnls/grid.hpp"
#include "bnls/solvers.hpp"

namespace bnls {

struct instability_error : error {
    double t;
    instability_error(const std::string& msg, double time) : error(msg), t(time) {}
};

struct IntegratorConfig {
    double dt = 1e-3;
    double T = 10.0;
    int monitor_every = 10;
    double blowup_threshold = 10.0;  // multiple of the initial ||Delta psi||_2
    std::vector<double> snapshot_times;

    void validate() const {
        if (!(dt > 0.0)) throw structural_error("IntegratorConfig: dt must be positive");
        if (!(T > 0.0)) throw structural_error("IntegratorConfig: T must be positive");
        if (monitor_every < 1)
            throw structural_error("IntegratorConfig: monitor_every must be >= 1");
    }
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<double> mass_series;    // ||psi||_2
    std::vector<double> energy_series;  // Psi_{mu,p}(psi)
    std::vector<double> q_series;       // Q_p(psi)
    std::vector<double> bilap_series;   // ||Delta psi||_2
    std::vector<std::pair<double, Field>> snapshots;
    bool blowup_indicated = false;
    std::optional<double> q_sign_flip_time;
    bool aborted = false;
    std::optional<double> abort_time;
};

/// exact discrete group e^{-i dt (Delta^2 + mu Delta)}: Fourier multiplier on
/// periodic grids, precomputed eigenbasis of the symmetric operator on radial
/// grids; exactly unitary in the discrete L^2 inner product
class LinearPropagator {
  public:
    LinearPropagator(std::shared_ptr<const Grid> grid, double mu, double dt);

    void advance(Field& psi) const;
    double dt() const { return dt_; }
    double mu() const { return mu_; }
    const Grid& grid() const { return *grid_; }

  private:
    std::shared_ptr<const Grid> grid_;
    double mu_, dt_;
    // periodic: phase table over modes; radial: eigenbasis data
    std::vector<cplx> phase_;
    struct RadialData;
    std::shared_ptr<RadialData> radial_;
};

/// one Strang step: half nonlinear phase, full linear group, half nonlinear
void step_strang(Field& psi, double dt, const ProblemParams& prm,
                 const LinearPropagator& prop);

TrajectoryRecord evolve(const Field& psi0, const ProblemParams& prm,
                        const IntegratorConfig& icfg);

struct GammaRegion {
    bool member = false;
    double energy_margin = 0.0;  // M - Psi(u), positive inside
    double q_margin = 0.0;       // Q_p(u), positive inside
};

/// membership in Gamma_a = { Psi < M and Q_p > 0 } with margins
GammaRegion check_gamma_region(const Field& psi0, const ProblemParams& prm,
                               double M_value);

struct GlobalExistenceResult {
    TrajectoryRecord record;
    double s_used = 0.0;       // dilation parameter of the initial datum
    double apriori_bound = 0.0;  // root of the energy-trapping quadratic
    double max_bilap = 0.0;
    bool q_positive_throughout = false;
    bool bound_respected = false;
    std::string verdict;
};

GlobalExistenceResult global_existence_experiment(const SolveReport& excited,
                                                  const ProblemParams& prm,
                                                  const IntegratorConfig& icfg);

struct StabilityResult {
    std::vector<double> times;
    std::vector<double> dist;  // aligned H^2 orbit distance
    double sup_dist = 0.0;
    double dist0 = 0.0;
};

/// perturb a converged ground state by kappa * smooth noise and track the
/// phase-(and translation-)aligned H^2 distance to the unperturbed orbit
StabilityResult orbital_stability_experiment(const SolveReport& ground,
                                             double kappa,
                                             const ProblemParams& prm,
                                             const IntegratorConfig& icfg,
                                             std::uint64_t seed);

/// aligned H^2 distance of psi to the orbit of u (phase always, translation
/// on periodic grids)
double orbit_distance_h2(const Field& psi, const Field& u);

}  // namespace bnls

#endif
