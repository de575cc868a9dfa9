#include "mindist/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mindist/linalg.hpp"
#include "mindist/metric.hpp"

namespace mindist {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

// Radical-inverse of i in the given base (the classic Halton construction).
double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double f = 1.0, r = 0.0;
    while (i != 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

constexpr std::uint64_t kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23,  29,  31,
                                     37, 41, 43, 47, 53, 59, 61, 67, 71,  73,  79,
                                     83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

// Low-discrepancy starting points over the product parameter box: a Halton
// sequence (one prime base per parameter) under a Cranley-Patterson rotation
// drawn from the run seed. Candidates whose jets are ill-conditioned, flagged
// singular, or not evaluable (finite-difference margin at a clamped edge) are
// skipped; the sequence position advances so retries are deterministic.
class StartGenerator {
public:
    StartGenerator(const Surface& a, const Surface& b, std::uint64_t seed) : a_(a), b_(b) {
        const std::size_t d = a.param_dim() + b.param_dim();
        if (d > std::size(kPrimes))
            throw ValidationError("too many parameters for the start generator (" +
                                  std::to_string(d) + " > " + std::to_string(std::size(kPrimes)) +
                                  ")");
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        shift_.resize(d);
        for (auto& s : shift_) s = unit(rng);
    }

    Vec next() {
        const std::size_t n = a_.param_dim(), d = n + b_.param_dim();
        Vec q(d);
        for (int attempt = 0; attempt < 1000; ++attempt) {
            ++index_;
            for (std::size_t k = 0; k < d; ++k) {
                const auto& dom = k < n ? a_.domains()[k] : b_.domains()[k - n];
                double u = radical_inverse(index_, kPrimes[k]) + shift_[k];
                u -= std::floor(u); // rotate modulo 1
                q[k] = dom.lo + u * (dom.hi - dom.lo);
            }
            if (admissible(a_, std::span<const double>(q).subspan(0, n)) &&
                admissible(b_, std::span<const double>(q).subspan(n)))
                return q;
        }
        throw ValidationError("no well-conditioned starting point found after 1000 candidates; "
                              "the parameter domains may be almost everywhere degenerate");
    }

private:
    // Reject starts whose tangent basis is singular or nearly so: the
    // steepest eigenvalue ratio tolerated is 1e-4 (condition ~100 on the
    // Jacobian), well clear of chart poles where the inverse metric
    // amplifies pure roundoff into O(1) spurious forces.
    static bool admissible(const Surface& s, std::span<const double> params) {
        try {
            const SurfaceJet jet = s.jet(params);
            if (jet.singular) return false;
            const std::size_t n = s.param_dim();
            Mat gram(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) gram(i, j) = dot(jet.partial(i), jet.partial(j));
            Vec eig(n);
            sym_eigenvalues(gram, eig);
            return eig[0] > 1e-4 * eig[n - 1];
        } catch (const Error&) {
            return false; // not evaluable here (e.g. finite-difference margin)
        }
    }

    Surface a_, b_;
    Vec shift_;
    std::uint64_t index_ = 0;
};

struct TrajectoryOutcome {
    SolveResult result;
    bool completed = false; // false when the trajectory aborted with an error
    std::string failure;    // diagnostic when !completed
};

void record_sample(SolveResult& out, const ProductState& state,
                   const FieldEvaluator::Diagnostics& d) {
    TrajectorySample s;
    s.time = state.time;
    s.q = state.q;
    s.r = d.r;
    s.energy = d.energy;
    out.trajectory.push_back(std::move(s));
}

// Fill every reported field of `out` at the given state.
void finalize_at(SolveResult& out, FieldEvaluator& f, const ProductState& state) {
    const auto d = f.diagnostics(state.q, state.v);
    out.distance = d.r;
    out.final_energy = d.energy;
    out.final_gradient_norm = d.gradnorm;
    out.minimizer = state.q;
    out.closest_point_a.assign(f.last_x().begin(), f.last_x().end());
    out.closest_point_b.assign(f.last_y().begin(), f.last_y().end());
}

// One trajectory, never throwing: errors come back as a failed outcome so
// multi-start can absorb them. `gen` supplies the automatic re-seed drawn
// when the metric turns singular mid-run.
TrajectoryOutcome run_trajectory(FieldEvaluator& f, const SolverConfig& config, Vec start,
                                 StartGenerator& gen) {
    TrajectoryOutcome out;
    out.result.seed = config.seed;
    ProductState state;
    state.q = std::move(start);
    state.v.assign(f.dim(), 0.0);

    Rk4Integrator rk(f.dim());
    for (bool reseeded = false;;) {
        try {
            ProductState best = state;
            double best_r = 0.0;
            const bool record = config.record_trajectory;
            out.result.steps = 0;
            out.result.trajectory.clear();

            {
                const auto d0 = f.diagnostics(state.q, state.v);
                best_r = d0.r;
                if (record) record_sample(out.result, state, d0);
                if (d0.vnorm <= config.tol_velocity && d0.gradnorm <= config.tol_gradient) {
                    out.result.converged = true;
                    finalize_at(out.result, f, state);
                    out.completed = true;
                    return out;
                }
            }

            for (std::size_t k = 1; k <= config.max_steps; ++k) {
                rk.step(state, f, config.dt, f.surface1(), f.surface2());
                out.result.steps = k;
                const auto d = f.diagnostics(state.q, state.v);
                if (d.r < best_r) {
                    best_r = d.r;
                    best = state;
                }
                const bool done =
                    d.vnorm <= config.tol_velocity && d.gradnorm <= config.tol_gradient;
                if (record && (done || k % config.sample_every == 0))
                    record_sample(out.result, state, d);
                if (done) {
                    out.result.converged = true;
                    finalize_at(out.result, f, state);
                    out.completed = true;
                    return out;
                }
            }

            // Step cap reached: the trajectory log keeps the actual path's
            // tail, but the reported fields use the best state seen.
            if (record && config.max_steps % config.sample_every != 0)
                record_sample(out.result, state, f.diagnostics(state.q, state.v));
            out.result.converged = false;
            finalize_at(out.result, f, best);
            out.completed = true;
            return out;
        } catch (const SingularMetric& e) {
            if (reseeded) {
                out.completed = false;
                out.failure = std::string("singular metric after re-seed: ") + e.what();
                return out;
            }
            reseeded = true;
            out.result.reseeds = 1;
            try {
                state.q = gen.next();
            } catch (const Error& e2) {
                out.completed = false;
                out.failure = std::string("singular metric and no admissible re-seed: ") +
                              e2.what();
                return out;
            }
            state.v.assign(f.dim(), 0.0);
            state.time = 0.0;
        } catch (const Error& e) {
            out.completed = false;
            out.failure = e.what();
            return out;
        }
    }
}

FieldEvaluator make_evaluator(const Surface& surface1, const Surface& surface2,
                              const Potential& potential, const SolverConfig& config) {
    Surface a = config.mass1 ? surface1.with_mass(*config.mass1) : surface1;
    Surface b = config.mass2 ? surface2.with_mass(*config.mass2) : surface2;
    return FieldEvaluator(std::move(a), std::move(b), potential,
                          DissipationModel{config.damping});
}

// Strict lexicographic improvement: smaller distance, then smaller final
// energy; on exact ties the earlier start wins.
bool improves(const SolveResult& candidate, const SolveResult& incumbent) {
    if (candidate.distance != incumbent.distance) return candidate.distance < incumbent.distance;
    return candidate.final_energy < incumbent.final_energy;
}

} // namespace

void SolverConfig::validate() const {
    require(std::isfinite(dt) && dt > 0.0, "dt must be strictly positive");
    require(std::isfinite(damping) && damping > 0.0, "damping must be strictly positive");
    require(std::isfinite(tol_velocity) && tol_velocity > 0.0,
            "tol_velocity must be strictly positive");
    require(std::isfinite(tol_gradient) && tol_gradient > 0.0,
            "tol_gradient must be strictly positive");
    require(max_steps >= 1, "max_steps must be at least 1");
    require(starts >= 1, "starts must be at least 1");
    require(sample_every >= 1, "sample_every must be at least 1");
    if (mass1) require(std::isfinite(*mass1) && *mass1 > 0.0, "mass1 must be strictly positive");
    if (mass2) require(std::isfinite(*mass2) && *mass2 > 0.0, "mass2 must be strictly positive");
}

bool check_convergence(const ProductState& state, const Surface& surface1,
                       const Surface& surface2, const Potential& potential,
                       const SolverConfig& config) {
    config.validate();
    FieldEvaluator f = make_evaluator(surface1, surface2, potential, config);
    const auto d = f.diagnostics(state.q, state.v);
    return d.vnorm <= config.tol_velocity && d.gradnorm <= config.tol_gradient;
}

SolveResult solve(const Surface& surface1, const Surface& surface2, const Potential& potential,
                  const SolverConfig& config, std::optional<Vec> initial) {
    config.validate();
    FieldEvaluator f = make_evaluator(surface1, surface2, potential, config);
    StartGenerator gen(f.surface1(), f.surface2(), config.seed);

    Vec start;
    if (initial) {
        start = std::move(*initial);
        if (start.size() != f.dim())
            throw ValidationError("initial point has " + std::to_string(start.size()) +
                                  " parameters, expected " + std::to_string(f.dim()));
        f.wrap_state(start); // periodic reduce; clamped violations throw here
    } else {
        start = gen.next();
    }

    TrajectoryOutcome out = run_trajectory(f, config, std::move(start), gen);
    if (!out.completed) throw SingularMetric(out.failure);
    return out.result;
}

SolveResult multi_start(const Surface& surface1, const Surface& surface2,
                        const Potential& potential, const SolverConfig& config) {
    config.validate();
    FieldEvaluator f = make_evaluator(surface1, surface2, potential, config);
    StartGenerator gen(f.surface1(), f.surface2(), config.seed);

    std::optional<SolveResult> best_converged;
    std::optional<SolveResult> best_other;
    std::size_t failures = 0;

    for (std::size_t s = 0; s < config.starts; ++s) {
        Vec start;
        try {
            start = gen.next();
        } catch (const ValidationError&) {
            ++failures;
            continue;
        }
        TrajectoryOutcome out = run_trajectory(f, config, std::move(start), gen);
        if (!out.completed) {
            ++failures;
            continue;
        }
        auto& slot = out.result.converged ? best_converged : best_other;
        if (!slot || improves(out.result, *slot)) slot = std::move(out.result);
    }

    if (best_converged) return std::move(*best_converged);

    std::string msg = "none of " + std::to_string(config.starts) +
                      " starts converged within " + std::to_string(config.max_steps) + " steps";
    if (failures > 0)
        msg += " (" + std::to_string(failures) + " trajectories aborted with errors)";
    throw AllStartsFailed(msg, best_other ? std::move(*best_other) : SolveResult{});
}

} // namespace mindist
