#pragma once

#include <cstddef>
#include <vector>

#include "mindist/dynamics.hpp"
#include "mindist/surface.hpp"

namespace mindist {

// Brute-force grid over the product of the two parameter boxes. Each axis
// gets `samples` evenly spaced points p_i = lo + i*(hi-lo)/samples
// (left-aligned, endpoint-exclusive): doubling a count makes the new grid a
// strict superset of the old one, so refinement can never increase the
// reported minimum.
struct GridSpec {
    std::vector<std::size_t> samples1; // per-parameter counts, surface 1
    std::vector<std::size_t> samples2; // per-parameter counts, surface 2
    double cap = 1e8;                  // pair-evaluation budget, checked up front

    static GridSpec uniform(const Surface& surface1, const Surface& surface2,
                            std::size_t per_axis);
    static GridSpec uniform(const Surface& surface1, const Surface& surface2,
                            std::size_t per_axis1, std::size_t per_axis2);
};

struct OracleResult {
    double distance = 0.0;         // exhaustive min of |y - x| over the grid
    Vec argmin1;                   // surface-1 parameters at the minimum
    Vec argmin2;                   // surface-2 parameters at the minimum
    double resolution_bound = 0.0; // L1*h1 + L2*h2, see below
    double pairs = 0.0;            // pair evaluations performed
};

// Exhaustive pairwise search. The returned distance over-approximates the
// true minimum by at most `resolution_bound`: h is a full grid-cell diagonal
// per surface and L bounds that surface's Jacobian (Frobenius norm, sampled
// over the domain), so moving any point to its nearest grid neighbor changes
// |y - x| by at most L1*h1 + L2*h2. Throws CapExceeded before evaluating
// anything when the product grid would exceed the budget.
OracleResult grid_min_distance(const Surface& surface1, const Surface& surface2,
                               const GridSpec& grid);

// Compare the analytic potential gradient against central differences of the
// composed map q -> U(|y(eta) - x(xi)|). Returns the worst discrepancy over
// all stacked components, measured relative to the gradient's magnitude when
// that exceeds 1e-8 and absolutely below that (a zero gradient has no
// meaningful relative error). Scaling by the vector magnitude rather than by
// each component keeps the result finite at component zero-crossings, where
// the finite-difference round-off floor would otherwise dominate an
// arbitrarily small denominator.
double fd_gradient_check(const Surface& surface1, const Surface& surface2,
                         const Potential& potential, const ProductState& state, double h = 1e-6);

} // namespace mindist
