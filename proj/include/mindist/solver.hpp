#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mindist/dynamics.hpp"
#include "mindist/errors.hpp"
#include "mindist/surface.hpp"

namespace mindist {

struct SolverConfig {
    double dt = 1e-3;
    double damping = 1.0;
    double tol_velocity = 1e-8; // on <v,v>_g^1/2
    double tol_gradient = 1e-8; // on the inverse-metric norm of the potential gradient
    std::size_t max_steps = 2'000'000;
    std::size_t starts = 8;
    std::uint64_t seed = 0;
    // When set, override the surfaces' own mass constants for this run.
    std::optional<double> mass1;
    std::optional<double> mass2;
    bool record_trajectory = false;
    std::size_t sample_every = 10; // trajectory decimation; final state always sampled

    void validate() const; // throws ValidationError
};

struct TrajectorySample {
    double time;
    Vec q;
    double r;
    double energy;
};

// Everything is reported at the returned state: for a converged run that is
// the equilibrium, for a capped run the best (smallest-r) state seen, so
// distance == |closest_point_b - closest_point_a| always holds exactly.
struct SolveResult {
    bool converged = false;
    double distance = 0.0;
    Vec closest_point_a; // x(xi*) in ambient coordinates
    Vec closest_point_b; // y(eta*)
    Vec minimizer;       // stacked parameters at the returned state
    std::size_t steps = 0;
    double final_energy = 0.0;
    double final_gradient_norm = 0.0;
    std::uint64_t seed = 0; // the config seed, echoed for reproducibility
    std::size_t reseeds = 0;
    std::vector<TrajectorySample> trajectory; // empty unless recording was requested
};

// No start of a multi-start run converged. Carries the best non-converged
// result (when any trajectory at least produced one) for diagnostics.
class AllStartsFailed : public Error {
public:
    AllStartsFailed(const std::string& msg, SolveResult best)
        : Error(msg), best_(std::move(best)) {}
    const SolveResult& best() const { return best_; }

private:
    SolveResult best_;
};

// True iff both convergence norms are at or below their tolerances
// (inclusive, so a state exactly on the threshold counts as converged).
bool check_convergence(const ProductState& state, const Surface& surface1,
                       const Surface& surface2, const Potential& potential,
                       const SolverConfig& config);

// Integrate one trajectory from `initial` (velocity zero) until convergence
// or the step cap. Without an explicit initial point the first admissible
// quasi-random start for config.seed is used, so solve() coincides with
// trajectory 0 of multi_start(). A singular metric mid-run triggers one
// quasi-random re-seed of the trajectory before giving up.
SolveResult solve(const Surface& surface1, const Surface& surface2, const Potential& potential,
                  const SolverConfig& config, std::optional<Vec> initial = std::nullopt);

// Run config.starts trajectories from low-discrepancy starting points and
// return the best converged result (smallest distance, ties by lower final
// energy, then by start order). Individual trajectory failures are absorbed;
// AllStartsFailed is thrown only when no trajectory converges.
SolveResult multi_start(const Surface& surface1, const Surface& surface2,
                        const Potential& potential, const SolverConfig& config);

} // namespace mindist
