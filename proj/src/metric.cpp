#include "mindist/metric.hpp"

#include "mindist/errors.hpp"
#include "mindist/linalg.hpp"

namespace mindist {

namespace {

void induced_metric_into(const SurfaceJet& jet, double mass, Mat& g) {
    const std::size_t n = jet.jacobian.rows();
    g.resize(n, n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) {
            const double v = mass * dot(jet.partial(a), jet.partial(b));
            g(a, b) = v;
            g(b, a) = v;
        }
}

void metric_partials_into(const SurfaceJet& jet, double mass, Ten3& p) {
    const std::size_t n = jet.jacobian.rows();
    p.resize(n, n, n);
    // ∂_c g_ab = m (∂²_{ca} x · ∂_b x + ∂_a x · ∂²_{cb} x)
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a; b < n; ++b) {
                const double v = mass * (dot(jet.second_partial(c, a), jet.partial(b)) +
                                         dot(jet.partial(a), jet.second_partial(c, b)));
                p(c, a, b) = v;
                p(c, b, a) = v;
            }
}

void christoffel_first_into(const Ten3& partials, Ten3& cf) {
    const std::size_t n = partials.dim0();
    cf.resize(n, n, n);
    // Γ_{b,ac} = ½ (∂_b g_ac + ∂_c g_ab − ∂_a g_bc); storage cf(b, a, c).
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t c = 0; c < n; ++c)
                cf(b, a, c) =
                    0.5 * (partials(b, a, c) + partials(c, a, b) - partials(a, b, c));
}

void christoffel_second_into(const Ten3& first, const Mat& inverse, Ten3& cs) {
    const std::size_t n = first.dim0();
    cs.resize(n, n, n);
    // Γ^a_{bc} = Σ_d g^{ad} Γ_{b,dc}; storage cs(a, b, c), first(b, d, c).
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t c = 0; c < n; ++c) {
                double s = 0.0;
                for (std::size_t d = 0; d < n; ++d) s += inverse(a, d) * first(b, d, c);
                cs(a, b, c) = s;
            }
}

} // namespace

Mat induced_metric(const SurfaceJet& jet, double mass) {
    Mat g;
    induced_metric_into(jet, mass, g);
    return g;
}

Mat invert_metric(const Mat& metric) {
    Mat inv, work;
    if (!spd_invert(metric, inv, work))
        throw SingularMetric("metric is not positive definite (factorization pivot <= 0): "
                             "parameterization singularity at this point");
    return inv;
}

Ten3 metric_partials(const Surface& surface, std::span<const double> params, double mass) {
    SurfaceJet jet = surface.jet(params);
    Ten3 p;
    metric_partials_into(jet, mass, p);
    return p;
}

Ten3 christoffel_first(const Ten3& partials) {
    Ten3 cf;
    christoffel_first_into(partials, cf);
    return cf;
}

Ten3 christoffel_second(const Ten3& first, const Mat& inverse) {
    Ten3 cs;
    christoffel_second_into(first, inverse, cs);
    return cs;
}

void metric_bundle_into(const SurfaceJet& jet, double mass, MetricBundle& out, Mat& scratch) {
    induced_metric_into(jet, mass, out.metric);
    if (!spd_invert(out.metric, out.inverse, scratch))
        throw SingularMetric("metric is not positive definite (factorization pivot <= 0): "
                             "parameterization singularity at this point");
    metric_partials_into(jet, mass, out.partials);
    christoffel_first_into(out.partials, out.christoffel_first);
    christoffel_second_into(out.christoffel_first, out.inverse, out.christoffel_second);
}

MetricBundle metric_bundle(const SurfaceJet& jet, double mass) {
    MetricBundle out;
    Mat scratch;
    metric_bundle_into(jet, mass, out, scratch);
    return out;
}

ProductMetric product_bundle(const Surface& surface1, std::span<const double> params1, double mass1,
                             const Surface& surface2, std::span<const double> params2,
                             double mass2) {
    ProductMetric pm;
    Mat scratch;
    try {
        metric_bundle_into(surface1.jet(params1), mass1, pm.block1, scratch);
    } catch (const SingularMetric&) {
        throw SingularMetric("surface 1 (" + surface1.kind() +
                             "): metric is not positive definite at the requested point");
    }
    try {
        metric_bundle_into(surface2.jet(params2), mass2, pm.block2, scratch);
    } catch (const SingularMetric&) {
        throw SingularMetric("surface 2 (" + surface2.kind() +
                             "): metric is not positive definite at the requested point");
    }
    return pm;
}

} // namespace mindist
