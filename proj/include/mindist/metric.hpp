#pragma once

#include "mindist/surface.hpp"
#include "mindist/tensor.hpp"

namespace mindist {

// All Riemannian data of one surface at one parameter point. Index
// conventions (n = parameter dimension of this surface):
//   metric(a, b)               g_ab = mass · (∂_a x · ∂_b x)
//   inverse(a, b)              g^ab
//   partials(c, a, b)          ∂_c g_ab
//   christoffel_first(b, a, c) Γ_{b,ac} = ½(∂_b g_ac + ∂_c g_ab − ∂_a g_bc)
//   christoffel_second(a, b, c) Γ^a_{bc} = Σ_d g^ad Γ_{b,dc}
// The first storage index of christoffel_first is the pre-comma index.
struct MetricBundle {
    Mat metric;
    Mat inverse;
    Ten3 partials;
    Ten3 christoffel_first;
    Ten3 christoffel_second;
};

// The two independent blocks of the product configuration space. There
// are no cross terms: nothing couples the blocks except the potential.
struct ProductMetric {
    MetricBundle block1;
    MetricBundle block2;
};

// g_ab = mass · Σ_I ∂_a x^I ∂_b x^I. Symmetric by construction; a rank-
// deficient jet simply yields a singular matrix (detected on inversion).
Mat induced_metric(const SurfaceJet& jet, double mass);

// Inverse via positive-definite factorization. Throws SingularMetric when
// a pivot fails to be strictly positive — the library's singularity signal.
Mat invert_metric(const Mat& metric);

// ∂_c g_ab from the jet's first and second derivatives (product rule; no
// extra finite differencing when the jet is analytic).
Ten3 metric_partials(const Surface& surface, std::span<const double> params, double mass);

Ten3 christoffel_first(const Ten3& partials);

Ten3 christoffel_second(const Ten3& first, const Mat& inverse);

// Everything above at one point, in one call.
MetricBundle metric_bundle(const SurfaceJet& jet, double mass);

// Allocation-free variant for per-step workspaces; `scratch` is clobbered.
void metric_bundle_into(const SurfaceJet& jet, double mass, MetricBundle& out, Mat& scratch);

// Both blocks at one configuration. SingularMetric messages name the
// offending surface.
ProductMetric product_bundle(const Surface& surface1, std::span<const double> params1, double mass1,
                             const Surface& surface2, std::span<const double> params2,
                             double mass2);

} // namespace mindist
