#include "mindist/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mindist/errors.hpp"

namespace mindist {

// ---------------------------------------------------------------------------
// Potential

Potential Potential::harmonic(double k) {
    if (!(k > 0.0) || !std::isfinite(k))
        throw ValidationError("stiffness must be positive (got " + std::to_string(k) + ")");
    Potential p;
    p.kind = Kind::Harmonic;
    p.stiffness = k;
    return p;
}

Potential Potential::power(double k, double p_exp) {
    if (!(k > 0.0) || !std::isfinite(k))
        throw ValidationError("stiffness must be positive (got " + std::to_string(k) + ")");
    if (!(p_exp >= 1.0) || !std::isfinite(p_exp))
        throw ValidationError("power exponent must be at least 1 (got " + std::to_string(p_exp) +
                              ")");
    Potential p;
    p.kind = Kind::Power;
    p.stiffness = k;
    p.exponent = p_exp;
    return p;
}

double Potential::value(double r) const {
    return kind == Kind::Harmonic ? 0.5 * stiffness * r * r : stiffness * std::pow(r, exponent);
}

double Potential::slope(double r) const {
    return kind == Kind::Harmonic ? stiffness * r
                                  : stiffness * exponent * std::pow(r, exponent - 1.0);
}

double Potential::radial_factor(double r) const {
    if (kind == Kind::Harmonic) return stiffness; // U′(r)/r = k, no division
    if (exponent < 2.0 && r < 1e-14)
        throw DegenerateSeparation(
            "separation distance " + std::to_string(r) +
            " is degenerate for a power-law potential with exponent below 2");
    return stiffness * exponent * std::pow(r, exponent - 2.0);
}

// ---------------------------------------------------------------------------
// Stateless kernels (shared by the free functions and FieldEvaluator)

namespace {

void separation_kernel(std::span<const double> x, std::span<const double> y, Vec& rvec,
                       double& r) {
    rvec.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) rvec[i] = y[i] - x[i];
    r = norm(rvec);
}

// Stacked covariant gradient of U from the two jets.
void covector_kernel(const SurfaceJet& ja, const SurfaceJet& jb, const Vec& rvec, double r,
                     const Potential& pot, Vec& cov) {
    const std::size_t n = ja.jacobian.rows(), m = jb.jacobian.rows();
    cov.resize(n + m);
    const double w = pot.radial_factor(r);
    for (std::size_t a = 0; a < n; ++a) cov[a] = -w * dot(rvec, ja.partial(a));
    for (std::size_t s = 0; s < m; ++s) cov[n + s] = w * dot(rvec, jb.partial(s));
}

// γ^a = −Γ^a_{bc} v^b v^c for one block.
void geodesic_block(const MetricBundle& b, std::span<const double> v, std::span<double> out) {
    const std::size_t n = b.metric.rows();
    for (std::size_t a = 0; a < n; ++a) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) s += b.christoffel_second(a, i, j) * v[i] * v[j];
        out[a] = -s;
    }
}

// F^a = g^{ak} ∂R/∂v^k with ∂R/∂v^k = c·(g v)_k, one block. `work` holds
// the intermediate covector.
void rayleigh_block(const MetricBundle& b, double c, std::span<const double> v,
                    std::span<double> out, std::span<double> work) {
    const std::size_t n = b.metric.rows();
    for (std::size_t k = 0; k < n; ++k) work[k] = c * dot(b.metric.row(k), v);
    for (std::size_t a = 0; a < n; ++a) out[a] = dot(b.inverse.row(a), work.subspan(0, n));
}

double quad_form(const Mat& g, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.rows(); ++i) s += v[i] * dot(g.row(i), v);
    return s;
}

} // namespace

// ---------------------------------------------------------------------------
// FieldEvaluator

FieldEvaluator::FieldEvaluator(Surface surface1, Surface surface2, Potential potential,
                               DissipationModel dissipation)
    : a_(std::move(surface1)), b_(std::move(surface2)), pot_(potential), diss_(dissipation),
      n_(a_.param_dim()), m_(b_.param_dim()) {
    if (a_.ambient_dim() != b_.ambient_dim())
        throw ValidationError("surfaces live in different ambient dimensions (" +
                              std::to_string(a_.ambient_dim()) + " vs " +
                              std::to_string(b_.ambient_dim()) + ")");
    if (!(diss_.damping >= 0.0))
        throw ValidationError("damping must be non-negative");
    rvec_.resize(a_.ambient_dim());
    cov_.resize(n_ + m_);
    work_.resize(n_ + m_);
    force_.resize(n_ + m_);
}

void FieldEvaluator::prepare(std::span<const double> q) {
    a_.jet_into(q.subspan(0, n_), ja_);
    b_.jet_into(q.subspan(n_), jb_);
    try {
        metric_bundle_into(ja_, a_.mass(), pm_.block1, scratch_);
    } catch (const SingularMetric&) {
        throw SingularMetric("surface 1 (" + a_.kind() +
                             "): metric is not positive definite at this configuration");
    }
    try {
        metric_bundle_into(jb_, b_.mass(), pm_.block2, scratch_);
    } catch (const SingularMetric&) {
        throw SingularMetric("surface 2 (" + b_.kind() +
                             "): metric is not positive definite at this configuration");
    }
    separation_kernel(ja_.position, jb_.position, rvec_, r_);
}

void FieldEvaluator::operator()(std::span<const double> q, std::span<const double> v,
                                std::span<double> dq, std::span<double> dv) {
    prepare(q);
    covector_kernel(ja_, jb_, rvec_, r_, pot_, cov_);

    std::copy(v.begin(), v.end(), dq.begin());

    // dv = γ − g⁻¹ ∂U − F_R, block by block.
    geodesic_block(pm_.block1, v.subspan(0, n_), dv.subspan(0, n_));
    geodesic_block(pm_.block2, v.subspan(n_), dv.subspan(n_, m_));

    for (std::size_t a = 0; a < n_; ++a)
        dv[a] -= dot(pm_.block1.inverse.row(a), std::span<const double>(cov_).subspan(0, n_));
    for (std::size_t s = 0; s < m_; ++s)
        dv[n_ + s] -= dot(pm_.block2.inverse.row(s), std::span<const double>(cov_).subspan(n_, m_));

    rayleigh_block(pm_.block1, diss_.damping, v.subspan(0, n_),
                   std::span<double>(force_).subspan(0, n_),
                   std::span<double>(work_).subspan(0, n_));
    rayleigh_block(pm_.block2, diss_.damping, v.subspan(n_),
                   std::span<double>(force_).subspan(n_, m_),
                   std::span<double>(work_).subspan(n_, m_));
    for (std::size_t i = 0; i < n_ + m_; ++i) dv[i] -= force_[i];
}

FieldEvaluator::Diagnostics FieldEvaluator::diagnostics(std::span<const double> q,
                                                        std::span<const double> v) {
    prepare(q);
    covector_kernel(ja_, jb_, rvec_, r_, pot_, cov_);

    const double k1 = quad_form(pm_.block1.metric, v.subspan(0, n_));
    const double k2 = quad_form(pm_.block2.metric, v.subspan(n_));
    const double g1 = quad_form(pm_.block1.inverse, std::span<const double>(cov_).subspan(0, n_));
    const double g2 = quad_form(pm_.block2.inverse, std::span<const double>(cov_).subspan(n_, m_));

    Diagnostics d;
    d.r = r_;
    d.energy = 0.5 * (k1 + k2) + pot_.value(r_);
    d.vnorm = std::sqrt(std::max(k1 + k2, 0.0));
    d.gradnorm = std::sqrt(std::max(g1 + g2, 0.0));
    d.rayleigh = 0.5 * diss_.damping * (k1 + k2);
    return d;
}

void FieldEvaluator::wrap_state(std::span<double> q) const {
    a_.wrap(q.subspan(0, n_));
    b_.wrap(q.subspan(n_));
}

// ---------------------------------------------------------------------------
// Free-function wrappers

Separation separation(const ProductState& state, const Surface& surface1,
                      const Surface& surface2) {
    const std::size_t n = surface1.param_dim();
    Vec x = surface1.evaluate(std::span<const double>(state.q).subspan(0, n));
    Vec y = surface2.evaluate(std::span<const double>(state.q).subspan(n));
    Separation s;
    separation_kernel(x, y, s.rvec, s.r);
    return s;
}

Vec potential_covector(const ProductState& state, const Surface& surface1,
                       const Surface& surface2, const Potential& potential) {
    const std::size_t n = surface1.param_dim();
    SurfaceJet ja = surface1.jet(std::span<const double>(state.q).subspan(0, n));
    SurfaceJet jb = surface2.jet(std::span<const double>(state.q).subspan(n));
    Vec rvec;
    double r;
    separation_kernel(ja.position, jb.position, rvec, r);
    Vec cov;
    covector_kernel(ja, jb, rvec, r, potential, cov);
    return cov;
}

Vec geodesic_term(const ProductMetric& bundle, std::span<const double> v) {
    const std::size_t n = bundle.block1.metric.rows(), m = bundle.block2.metric.rows();
    Vec out(n + m);
    geodesic_block(bundle.block1, v.subspan(0, n), std::span<double>(out).subspan(0, n));
    geodesic_block(bundle.block2, v.subspan(n), std::span<double>(out).subspan(n, m));
    return out;
}

Vec rayleigh_force(const ProductMetric& bundle, const DissipationModel& dissipation,
                   std::span<const double> v) {
    const std::size_t n = bundle.block1.metric.rows(), m = bundle.block2.metric.rows();
    Vec out(n + m), work(std::max(n, m));
    rayleigh_block(bundle.block1, dissipation.damping, v.subspan(0, n),
                   std::span<double>(out).subspan(0, n), work);
    rayleigh_block(bundle.block2, dissipation.damping, v.subspan(n),
                   std::span<double>(out).subspan(n, m), work);
    return out;
}

double rayleigh_value(const ProductMetric& bundle, const DissipationModel& dissipation,
                      std::span<const double> v) {
    const std::size_t n = bundle.block1.metric.rows();
    return 0.5 * dissipation.damping *
           (quad_form(bundle.block1.metric, v.subspan(0, n)) +
            quad_form(bundle.block2.metric, v.subspan(n)));
}

double energy(const ProductState& state, const Surface& surface1, const Surface& surface2,
              const Potential& potential) {
    FieldEvaluator f(surface1, surface2, potential, DissipationModel{0.0});
    return f.diagnostics(state.q, state.v).energy;
}

double lyapunov(const ProductState& state, const Surface& surface1, const Surface& surface2,
                const Potential& potential, double u0) {
    return energy(state, surface1, surface2, potential) - u0;
}

FieldValue vector_field(const ProductState& state, const Surface& surface1,
                        const Surface& surface2, const Potential& potential,
                        const DissipationModel& dissipation) {
    FieldEvaluator f(surface1, surface2, potential, dissipation);
    FieldValue out;
    out.dq.resize(f.dim());
    out.dv.resize(f.dim());
    try {
        f(state.q, state.v, out.dq, out.dv);
    } catch (const SingularMetric& e) {
        std::ostringstream os;
        os << e.what() << "; q = [";
        for (std::size_t i = 0; i < state.q.size(); ++i)
            os << (i ? ", " : "") << state.q[i];
        os << "]";
        throw SingularMetric(os.str());
    }
    return out;
}

std::string Rk4Integrator::format_state(const Vec& x) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << "]";
    return os.str();
}

} // namespace mindist
