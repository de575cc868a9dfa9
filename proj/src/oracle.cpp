#include "mindist/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "mindist/errors.hpp"

namespace mindist {

CapExceeded::CapExceeded(const std::string& msg, double requested, double limit)
    : Error(msg), requested_pairs(requested), cap(limit) {}

namespace {

struct AxisGrid {
    double lo;
    double step;
    std::size_t count;
};

// Per-axis layouts plus the flattened point count. Steps are computed as
// span/count so that halving/doubling a count scales the step by an exact
// power of two, which is what keeps refined grids bitwise-nested.
std::vector<AxisGrid> make_axes(const Surface& s, const std::vector<std::size_t>& samples,
                                const char* which) {
    if (samples.size() != s.param_dim())
        throw ValidationError(std::string("grid for ") + which + " has " +
                              std::to_string(samples.size()) + " axis counts, surface has " +
                              std::to_string(s.param_dim()) + " parameters");
    std::vector<AxisGrid> axes;
    axes.reserve(samples.size());
    for (std::size_t a = 0; a < samples.size(); ++a) {
        if (samples[a] == 0)
            throw ValidationError(std::string("grid for ") + which + ", axis " +
                                  std::to_string(a) + ": sample count must be positive");
        const auto& dom = s.domains()[a];
        axes.push_back({dom.lo, (dom.hi - dom.lo) / static_cast<double>(samples[a]), samples[a]});
    }
    return axes;
}

double grid_size(const std::vector<AxisGrid>& axes) {
    double n = 1.0;
    for (const auto& ax : axes) n *= static_cast<double>(ax.count);
    return n;
}

// Full cell diagonal: the farthest any domain point can be from its nearest
// grid point along every axis at once (the right edge of a clamped axis is a
// whole step away from the last sample, hence full steps, not half).
double cell_diagonal(const std::vector<AxisGrid>& axes) {
    double s = 0.0;
    for (const auto& ax : axes) s += ax.step * ax.step;
    return std::sqrt(s);
}

void point_at(const std::vector<AxisGrid>& axes, const std::vector<std::size_t>& idx, Vec& p) {
    for (std::size_t a = 0; a < axes.size(); ++a)
        p[a] = axes[a].lo + static_cast<double>(idx[a]) * axes[a].step;
}

bool advance(std::vector<std::size_t>& idx, const std::vector<AxisGrid>& axes) {
    for (std::size_t a = axes.size(); a-- > 0;) {
        if (++idx[a] < axes[a].count) return true;
        idx[a] = 0;
    }
    return false;
}

// Largest Jacobian Frobenius norm over a low-discrepancy subsample of the
// domain (capped at 500 points): a practical Lipschitz bound for the
// embedding. Points where the jet is not evaluable (finite-difference
// margins at clamped edges) are skipped.
double lipschitz_bound(const Surface& s) {
    static constexpr std::uint64_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19,
                                               23, 29, 31, 37, 41, 43, 47, 53};
    const std::size_t n = s.param_dim();
    Vec p(n);
    double worst = 0.0;
    for (std::uint64_t i = 1; i <= 500; ++i) {
        for (std::size_t a = 0; a < n; ++a) {
            double f = 1.0, r = 0.0;
            std::uint64_t k = i;
            const std::uint64_t base = primes[a % std::size(primes)];
            while (k != 0) {
                f /= static_cast<double>(base);
                r += f * static_cast<double>(k % base);
                k /= base;
            }
            const auto& dom = s.domains()[a];
            p[a] = dom.lo + r * (dom.hi - dom.lo);
        }
        try {
            const SurfaceJet jet = s.jet(p);
            double frob2 = 0.0;
            for (std::size_t r = 0; r < jet.jacobian.rows(); ++r)
                for (double x : jet.jacobian.row(r)) frob2 += x * x;
            worst = std::max(worst, std::sqrt(frob2));
        } catch (const Error&) {
            // outside the evaluable margin; the neighbours cover the bound
        }
    }
    return worst;
}

} // namespace

GridSpec GridSpec::uniform(const Surface& surface1, const Surface& surface2,
                           std::size_t per_axis) {
    return uniform(surface1, surface2, per_axis, per_axis);
}

GridSpec GridSpec::uniform(const Surface& surface1, const Surface& surface2,
                           std::size_t per_axis1, std::size_t per_axis2) {
    GridSpec g;
    g.samples1.assign(surface1.param_dim(), per_axis1);
    g.samples2.assign(surface2.param_dim(), per_axis2);
    return g;
}

OracleResult grid_min_distance(const Surface& surface1, const Surface& surface2,
                               const GridSpec& grid) {
    if (surface1.ambient_dim() != surface2.ambient_dim())
        throw ValidationError("surfaces live in different ambient dimensions (" +
                              std::to_string(surface1.ambient_dim()) + " vs " +
                              std::to_string(surface2.ambient_dim()) + ")");
    if (!(grid.cap > 0.0))
        throw ValidationError("grid cap must be positive");

    const auto axes1 = make_axes(surface1, grid.samples1, "surface 1");
    const auto axes2 = make_axes(surface2, grid.samples2, "surface 2");
    const double g1 = grid_size(axes1), g2 = grid_size(axes2);
    const double pairs = g1 * g2;
    if (pairs > grid.cap)
        throw CapExceeded("grid of " + std::to_string(g1) + " x " + std::to_string(g2) + " = " +
                              std::to_string(pairs) + " pair evaluations exceeds the cap of " +
                              std::to_string(grid.cap),
                          pairs, grid.cap);

    // Precompute the smaller side's points (at most sqrt(cap) of them) and
    // stream the larger side one point at a time.
    const bool small_is_1 = g1 <= g2;
    const Surface& small_s = small_is_1 ? surface1 : surface2;
    const Surface& big_s = small_is_1 ? surface2 : surface1;
    const auto& small_axes = small_is_1 ? axes1 : axes2;
    const auto& big_axes = small_is_1 ? axes2 : axes1;

    const std::size_t N = surface1.ambient_dim();
    const std::size_t small_count = static_cast<std::size_t>(small_is_1 ? g1 : g2);

    std::vector<double> small_pts(small_count * N);
    std::vector<Vec> small_params(small_count, Vec(small_s.param_dim()));
    {
        std::vector<std::size_t> idx(small_axes.size(), 0);
        for (std::size_t i = 0; i < small_count; ++i) {
            point_at(small_axes, idx, small_params[i]);
            small_s.evaluate_into(small_params[i],
                                  std::span<double>(small_pts).subspan(i * N, N));
            advance(idx, small_axes);
        }
    }

    double best2 = std::numeric_limits<double>::infinity();
    std::size_t best_small = 0;
    Vec best_big_params(big_s.param_dim());

    Vec bp(big_s.param_dim());
    Vec bx(N);
    std::vector<std::size_t> idx(big_axes.size(), 0);
    bool more = true;
    while (more) {
        point_at(big_axes, idx, bp);
        big_s.evaluate_into(bp, bx);
        for (std::size_t i = 0; i < small_count; ++i) {
            const double* sp = small_pts.data() + i * N;
            double d2 = 0.0;
            for (std::size_t k = 0; k < N; ++k) {
                const double d = bx[k] - sp[k];
                d2 += d * d;
            }
            if (d2 < best2) {
                best2 = d2;
                best_small = i;
                best_big_params = bp;
            }
        }
        more = advance(idx, big_axes);
    }

    OracleResult out;
    out.distance = std::sqrt(best2);
    out.argmin1 = small_is_1 ? small_params[best_small] : best_big_params;
    out.argmin2 = small_is_1 ? best_big_params : small_params[best_small];
    out.resolution_bound = lipschitz_bound(surface1) * cell_diagonal(axes1) +
                           lipschitz_bound(surface2) * cell_diagonal(axes2);
    out.pairs = pairs;
    return out;
}

double fd_gradient_check(const Surface& surface1, const Surface& surface2,
                         const Potential& potential, const ProductState& state, double h) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw ValidationError("finite-difference step must be positive");
    const std::size_t n = surface1.param_dim();
    const std::size_t dim = n + surface2.param_dim();
    if (state.q.size() != dim)
        throw ValidationError("state has " + std::to_string(state.q.size()) +
                              " parameters, expected " + std::to_string(dim));

    const Vec analytic = potential_covector(state, surface1, surface2, potential);

    const std::size_t N = surface1.ambient_dim();
    Vec x(N), y(N);
    const auto value_at = [&](const Vec& q) {
        surface1.evaluate_into(std::span<const double>(q).subspan(0, n), x);
        surface2.evaluate_into(std::span<const double>(q).subspan(n), y);
        double r2 = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            const double d = y[k] - x[k];
            r2 += d * d;
        }
        return potential.value(std::sqrt(r2));
    };

    double norm2 = 0.0;
    for (std::size_t a = 0; a < dim; ++a)
        norm2 += analytic[a] * analytic[a];
    const double magnitude = std::sqrt(norm2);

    double worst = 0.0;
    Vec q = state.q;
    for (std::size_t a = 0; a < dim; ++a) {
        const double saved = q[a];
        q[a] = saved + h;
        const double up = value_at(q);
        q[a] = saved - h;
        const double down = value_at(q);
        q[a] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double err = std::abs(numeric - analytic[a]);
        worst = std::max(worst, magnitude > 1e-8 ? err / magnitude : err);
    }
    return worst;
}

} // namespace mindist
