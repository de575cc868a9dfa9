#include <doctest.h>

#include <cmath>
#include <cstring>

#include "mindist/dynamics.hpp"
#include "mindist/errors.hpp"
#include "mindist/solver.hpp"
#include "mindist/surface.hpp"

using namespace mindist;

namespace {

Surface unit_sphere_at(double cx) { return Surface::sphere({cx, 0.0, 0.0}, 1.0); }

Surface line_z(double z) {
    return Surface::line({0.0, 0.0, z}, {1.0, 0.0, 0.0}, {-50.0, 50.0, false});
}

Surface circle_r(double r) { return Surface::circle({0.0, 0.0, 0.0}, r, {0.0, 0.0, 1.0}); }

ProductState state_of(Vec q, Vec v) {
    ProductState s;
    s.q = std::move(q);
    s.v = std::move(v);
    return s;
}

// |(y-x) . t| / (r |t|) over every tangent direction of both surfaces: the
// normalized tangential leakage of the separation vector.
double tangential_leakage(const Surface& a, const Surface& b, const SolveResult& res) {
    const std::size_t n = a.param_dim();
    const auto ja = a.jet(std::span<const double>(res.minimizer).subspan(0, n));
    const auto jb = b.jet(std::span<const double>(res.minimizer).subspan(n));
    Vec rvec(ja.position.size());
    for (std::size_t i = 0; i < rvec.size(); ++i) rvec[i] = jb.position[i] - ja.position[i];
    const double r = norm(rvec);
    double worst = 0.0;
    for (std::size_t i = 0; i < ja.jacobian.rows(); ++i)
        worst = std::max(worst, std::abs(dot(rvec, ja.partial(i))) / (r * norm(ja.partial(i))));
    for (std::size_t i = 0; i < jb.jacobian.rows(); ++i)
        worst = std::max(worst, std::abs(dot(rvec, jb.partial(i))) / (r * norm(jb.partial(i))));
    return worst;
}

bool bitwise_equal(const Vec& a, const Vec& b) {
    return a.size() == b.size() &&
           (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

} // namespace

TEST_CASE("solver configuration validation") {
    SolverConfig good;
    CHECK_NOTHROW(good.validate());

    SolverConfig c;
    c.dt = 0.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = SolverConfig{};
    c.damping = -1.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = SolverConfig{};
    c.tol_velocity = 0.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = SolverConfig{};
    c.starts = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = SolverConfig{};
    c.mass1 = -2.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = SolverConfig{};
    c.sample_every = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("convergence check") {
    const Surface a = circle_r(1.0), b = circle_r(3.0);
    const Potential pot = Potential::harmonic(1.0);
    SolverConfig cfg;

    SUBCASE("exact equilibrium converges") {
        CHECK(check_convergence(state_of({0.0, 0.0}, {0.0, 0.0}), a, b, pot, cfg));
    }

    SUBCASE("at rest with a live gradient does not converge") {
        CHECK_FALSE(
            check_convergence(state_of({0.0, 1.0}, {0.0, 0.0}), a, b, pot, cfg));
    }

    SUBCASE("moving at the equilibrium does not converge") {
        CHECK_FALSE(
            check_convergence(state_of({0.0, 0.0}, {0.1, 0.0}), a, b, pot, cfg));
    }

    SUBCASE("thresholds are inclusive") {
        // Measure the exact norms of a generic state, then hand the solver
        // those very values as tolerances: inclusive comparison must accept.
        FieldEvaluator f(a, b, pot, DissipationModel{1.0});
        const Vec q{0.3, 0.9}, v{0.02, -0.01};
        const auto d = f.diagnostics(q, v);
        REQUIRE(d.vnorm > 0.0);
        REQUIRE(d.gradnorm > 0.0);
        cfg.tol_velocity = d.vnorm;
        cfg.tol_gradient = d.gradnorm;
        CHECK(check_convergence(state_of(q, v), a, b, pot, cfg));
        cfg.tol_gradient = d.gradnorm * (1.0 - 1e-12);
        CHECK_FALSE(check_convergence(state_of(q, v), a, b, pot, cfg));
    }
}

TEST_CASE("single-trajectory solve") {
    SUBCASE("facing unit spheres settle to gap two") {
        SolverConfig cfg;
        cfg.damping = 2.5;
        const Surface a = unit_sphere_at(0.0), b = unit_sphere_at(4.0);
        const Vec start{1.2, 0.3, 1.8, 2.9};
        const auto res = solve(a, b, Potential::harmonic(1.0), cfg, start);
        CHECK(res.converged);
        CHECK(res.distance == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(res.final_gradient_norm <= cfg.tol_gradient);
        CHECK(res.steps > 0);
        CHECK(res.reseeds == 0);

        // The reported points really are the mapped minimizer, and their
        // gap really is the reported distance.
        Vec diff(3);
        for (int i = 0; i < 3; ++i) diff[i] = res.closest_point_b[i] - res.closest_point_a[i];
        CHECK(norm(diff) == doctest::Approx(res.distance).epsilon(1e-14));

        // Common-normal property at convergence.
        CHECK(tangential_leakage(a, b, res) < 1e-5);

        // Monotone settling from a rest start: E(0) = U(r0).
        const double e0 =
            energy(state_of(start, {0, 0, 0, 0}), a, b, Potential::harmonic(1.0));
        CHECK(res.final_energy <= e0);
    }

    SUBCASE("line against unit sphere settles to gap one across the chart pole") {
        SolverConfig cfg;
        cfg.damping = 3.0; // overdamped: the approach to the pole is monotone
        const Surface ln = line_z(2.0);
        const Surface sph = unit_sphere_at(0.0);
        const auto res = solve(ln, sph, Potential::harmonic(1.0), cfg, Vec{3.0, 1.2, 0.7});
        CHECK(res.converged);
        CHECK(res.distance == doctest::Approx(1.0).epsilon(1e-6));
        // Optimum: line point (0,0,2) above the sphere's top (0,0,1).
        CHECK(res.closest_point_a[0] == doctest::Approx(0.0).epsilon(1e-5));
        CHECK(res.closest_point_b[2] == doctest::Approx(1.0).epsilon(1e-5));
    }

    SUBCASE("a start at the equilibrium returns immediately") {
        SolverConfig cfg;
        cfg.record_trajectory = true;
        const auto res =
            solve(circle_r(1.0), circle_r(3.0), Potential::harmonic(1.0), cfg, Vec{0.0, 0.0});
        CHECK(res.converged);
        CHECK(res.steps == 0);
        CHECK(res.trajectory.size() == 1);
        CHECK(res.distance == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(bitwise_equal(res.minimizer, Vec{0.0, 0.0}));
    }

    SUBCASE("hitting the step cap reports best-so-far without converging") {
        SolverConfig cfg;
        cfg.max_steps = 10;
        const auto res = solve(line_z(0.0), line_z(2.0), Potential::harmonic(1.0), cfg,
                               Vec{0.0, 3.0});
        CHECK_FALSE(res.converged);
        CHECK(res.steps == 10);
        CHECK(res.distance < std::sqrt(13.0)); // improved on the start...
        CHECK(res.distance >= 2.0);            // ...but cannot beat the true gap
        Vec diff(3);
        for (int i = 0; i < 3; ++i) diff[i] = res.closest_point_b[i] - res.closest_point_a[i];
        CHECK(norm(diff) == doctest::Approx(res.distance).epsilon(1e-14));
    }

    SUBCASE("identical seed reproduces the result bitwise") {
        SolverConfig cfg;
        cfg.damping = 2.5;
        cfg.seed = 1234;
        const Surface a = unit_sphere_at(0.0), b = unit_sphere_at(4.0);
        const auto r1 = solve(a, b, Potential::harmonic(1.0), cfg);
        const auto r2 = solve(a, b, Potential::harmonic(1.0), cfg);
        CHECK(r1.converged == r2.converged);
        CHECK(std::memcmp(&r1.distance, &r2.distance, sizeof(double)) == 0);
        CHECK(r1.steps == r2.steps);
        CHECK(bitwise_equal(r1.minimizer, r2.minimizer));
        CHECK(bitwise_equal(r1.closest_point_a, r2.closest_point_a));
        CHECK(bitwise_equal(r1.closest_point_b, r2.closest_point_b));
    }

    SUBCASE("mass overrides change the transient, not the answer") {
        SolverConfig cfg;
        cfg.damping = 2.5;
        cfg.mass1 = 2.0;
        cfg.mass2 = 0.5;
        const auto res = solve(unit_sphere_at(0.0), unit_sphere_at(4.0),
                               Potential::harmonic(1.0), cfg, Vec{1.2, 0.3, 1.8, 2.9});
        CHECK(res.converged);
        CHECK(res.distance == doctest::Approx(2.0).epsilon(1e-6));
    }

    SUBCASE("trajectory recording decimates and always keeps the last state") {
        SolverConfig cfg;
        cfg.max_steps = 100;
        cfg.record_trajectory = true;
        cfg.sample_every = 7;
        const auto res = solve(line_z(0.0), line_z(2.0), Potential::harmonic(1.0), cfg,
                               Vec{0.0, 3.0});
        REQUIRE_FALSE(res.converged);
        // Initial state + floor(100/7) in-run samples + the unaligned tail.
        CHECK(res.trajectory.size() == 1 + 14 + 1);
        CHECK(res.trajectory.front().time == 0.0);
        CHECK(res.trajectory.back().time == doctest::Approx(100 * cfg.dt).epsilon(1e-12));
        for (std::size_t i = 1; i < res.trajectory.size(); ++i) {
            CHECK(res.trajectory[i].time > res.trajectory[i - 1].time);
            CHECK(res.trajectory[i].energy <= res.trajectory[i - 1].energy + 1e-12);
        }

        cfg.sample_every = 1;
        cfg.max_steps = 50;
        const auto dense = solve(line_z(0.0), line_z(2.0), Potential::harmonic(1.0), cfg,
                                 Vec{0.0, 3.0});
        CHECK(dense.trajectory.size() == 51);
    }

    SUBCASE("input validation") {
        const Surface a = circle_r(1.0), b = circle_r(3.0);
        CHECK_THROWS_AS(
            solve(a, b, Potential::harmonic(1.0), SolverConfig{}, Vec{0.0, 0.0, 0.0}),
            ValidationError);
        // Clamped parameter outside its interval.
        CHECK_THROWS_AS(solve(line_z(0.0), line_z(2.0), Potential::harmonic(1.0), SolverConfig{},
                              Vec{100.0, 0.0}),
                        DomainViolation);
    }
}

TEST_CASE("multi-start solve") {
    SUBCASE("facing spheres from quasi-random seeds") {
        SolverConfig cfg;
        cfg.damping = 2.5;
        cfg.starts = 4;
        const Surface a = unit_sphere_at(0.0), b = unit_sphere_at(4.0);
        const auto res = multi_start(a, b, Potential::harmonic(1.0), cfg);
        CHECK(res.converged);
        CHECK(res.distance == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(tangential_leakage(a, b, res) < 1e-5);

        // Bitwise reproducibility of the whole reduction.
        const auto res2 = multi_start(a, b, Potential::harmonic(1.0), cfg);
        CHECK(std::memcmp(&res.distance, &res2.distance, sizeof(double)) == 0);
        CHECK(bitwise_equal(res.minimizer, res2.minimizer));
    }

    SUBCASE("a different seed still finds the same distance") {
        SolverConfig cfg;
        cfg.damping = 2.5;
        cfg.starts = 3;
        cfg.seed = 99991;
        const auto res = multi_start(unit_sphere_at(0.0), unit_sphere_at(4.0),
                                     Potential::harmonic(1.0), cfg);
        CHECK(res.converged);
        CHECK(res.distance == doctest::Approx(2.0).epsilon(1e-6));
    }

    SUBCASE("parallel lines: a non-isolated minimum still yields the right gap") {
        SolverConfig cfg;
        cfg.damping = 2.83; // near critical for the gap oscillator
        cfg.starts = 3;
        const auto res = multi_start(line_z(0.0), line_z(2.0), Potential::harmonic(1.0), cfg);
        CHECK(res.converged);
        CHECK(res.distance == doctest::Approx(2.0).epsilon(1e-6));
        // Any aligned pair of parameters is a valid minimizer.
        CHECK(res.minimizer[0] == doctest::Approx(res.minimizer[1]).epsilon(1e-5));
    }

    SUBCASE("when nothing converges the failure carries the best attempt") {
        SolverConfig cfg;
        cfg.max_steps = 5;
        cfg.starts = 3;
        bool thrown = false;
        try {
            multi_start(unit_sphere_at(0.0), unit_sphere_at(4.0), Potential::harmonic(1.0), cfg);
        } catch (const AllStartsFailed& e) {
            thrown = true;
            CHECK_FALSE(e.best().converged);
            CHECK(e.best().steps == 5);
            CHECK(e.best().distance > 0.0);
            CHECK(std::string(e.what()).find("starts") != std::string::npos);
        }
        CHECK(thrown);
    }
}
