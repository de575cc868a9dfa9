#pragma once

#include <span>
#include <string>

#include "mindist/metric.hpp"
#include "mindist/surface.hpp"

namespace mindist {

// Configuration point of the coupled pair: q stacks the first surface's
// parameters then the second's; v stacks the matching velocities. Time is
// diagnostic only — the field is autonomous.
struct ProductState {
    Vec q;
    Vec v;
    double time = 0.0;
};

// Radial potential U(r) of the separation distance. The harmonic kind is
// U = ½ k r², whose force prefactor U′(r)/r is the constant k — no
// division, so touching configurations stay finite. The power kind is
// U = k r^p (p ≥ 1); its prefactor k·p·r^(p−2) genuinely diverges as
// r → 0 for p < 2, which callers must treat as a degenerate separation.
struct Potential {
    enum class Kind { Harmonic, Power };
    Kind kind = Kind::Harmonic;
    double stiffness = 1.0;
    double exponent = 2.0; // power kind only

    static Potential harmonic(double k);
    static Potential power(double k, double p);

    double value(double r) const;
    double slope(double r) const;         // U′(r)
    double radial_factor(double r) const; // U′(r)/r, see above
};

// Isotropic Rayleigh friction R = ½ c ⟨v,v⟩_g. Proportional-to-metric is
// the one choice that stays positive definite wherever the metric is and
// keeps the friction force chart-independent.
struct DissipationModel {
    double damping = 1.0;
};

struct Separation {
    Vec rvec; // y − x
    double r; // |rvec|
};

// r⃗ = y(η) − x(ξ) and its length.
Separation separation(const ProductState& state, const Surface& surface1,
                      const Surface& surface2);

// Covariant gradient of U(|y−x|) in the stacked parameters:
//   ∂U/∂ξ_a = −(U′/r)·(y−x)·∂_a x,   ∂U/∂η_s = +(U′/r)·(y−x)·∂_s y.
// Throws DegenerateSeparation when U′/r is singular at this r.
Vec potential_covector(const ProductState& state, const Surface& surface1,
                       const Surface& surface2, const Potential& potential);

// γ^i = −Γ^i_{jk} v^j v^k, evaluated blockwise (indices never mix blocks).
Vec geodesic_term(const ProductMetric& bundle, std::span<const double> v);

// F_R^i = g^{ik} ∂R/∂v^k. With R_ij = c·g_ij this collapses to c·v^i, but
// it is computed through the general contraction so a different Rayleigh
// matrix could be dropped in.
Vec rayleigh_force(const ProductMetric& bundle, const DissipationModel& dissipation,
                   std::span<const double> v);

// R(q, v) = ½ c ⟨v,v⟩_g — the instantaneous half-dissipation rate.
double rayleigh_value(const ProductMetric& bundle, const DissipationModel& dissipation,
                      std::span<const double> v);

// E = ½⟨v,v⟩_g + U(r). Masses enter through the surfaces' mass constants.
double energy(const ProductState& state, const Surface& surface1, const Surface& surface2,
              const Potential& potential);

// L = E − U0, the Lyapunov candidate anchored at a reference equilibrium
// with potential value U0.
double lyapunov(const ProductState& state, const Surface& surface1, const Surface& surface2,
                const Potential& potential, double u0);

struct FieldValue {
    Vec dq;
    Vec dv;
};

// The complete first-order field: dq = v, dv = γ − g⁻¹∂U − F_R.
FieldValue vector_field(const ProductState& state, const Surface& surface1,
                        const Surface& surface2, const Potential& potential,
                        const DissipationModel& dissipation);

// Reusable evaluation engine: owns all per-point workspaces so repeated
// calls allocate nothing. This is what the integrator loop drives; the
// free functions above are one-shot wrappers over the same math.
class FieldEvaluator {
public:
    FieldEvaluator(Surface surface1, Surface surface2, Potential potential,
                   DissipationModel dissipation);

    std::size_t dim() const { return n_ + m_; }
    const Surface& surface1() const { return a_; }
    const Surface& surface2() const { return b_; }
    const Potential& potential() const { return pot_; }
    const DissipationModel& dissipation() const { return diss_; }

    // dq, dv must have size dim().
    void operator()(std::span<const double> q, std::span<const double> v, std::span<double> dq,
                    std::span<double> dv);

    struct Diagnostics {
        double r;             // separation distance
        double energy;        // ½⟨v,v⟩_g + U
        double vnorm;         // ⟨v,v⟩_g^½
        double gradnorm;      // ⟨∂U, ∂U⟩_{g⁻¹}^½
        double rayleigh;      // R = ½ c ⟨v,v⟩_g
    };
    Diagnostics diagnostics(std::span<const double> q, std::span<const double> v);

    // Wrap both parameter blocks (periodic reduce / clamped check).
    void wrap_state(std::span<double> q) const;

    // Ambient witness points x(ξ), y(η) at the most recent evaluation.
    std::span<const double> last_x() const { return ja_.position; }
    std::span<const double> last_y() const { return jb_.position; }

private:
    void prepare(std::span<const double> q); // jets + bundles + separation
    Surface a_, b_;
    Potential pot_;
    DissipationModel diss_;
    std::size_t n_, m_;
    SurfaceJet ja_, jb_;
    ProductMetric pm_;
    Mat scratch_;
    Vec rvec_, cov_, work_, force_;
    double r_ = 0.0;
};

// Classical fourth-order one-step integrator with owned stage buffers, so
// a long trajectory allocates nothing per step. Stage points feed the
// field as-is (periodic parameters wrap inside surface evaluation); the
// completed step wraps q once and verifies finiteness.
class Rk4Integrator {
public:
    explicit Rk4Integrator(std::size_t dim)
        : k1q_(dim), k1v_(dim), k2q_(dim), k2v_(dim), k3q_(dim), k3v_(dim), k4q_(dim), k4v_(dim),
          tq_(dim), tv_(dim) {}

    template <class Field>
    void step(ProductState& state, Field&& field, double dt, const Surface& surface1,
              const Surface& surface2) {
        const std::size_t d = state.q.size();

        field(state.q, state.v, k1q_, k1v_);
        for (std::size_t i = 0; i < d; ++i) {
            tq_[i] = state.q[i] + 0.5 * dt * k1q_[i];
            tv_[i] = state.v[i] + 0.5 * dt * k1v_[i];
        }
        field(tq_, tv_, k2q_, k2v_);
        for (std::size_t i = 0; i < d; ++i) {
            tq_[i] = state.q[i] + 0.5 * dt * k2q_[i];
            tv_[i] = state.v[i] + 0.5 * dt * k2v_[i];
        }
        field(tq_, tv_, k3q_, k3v_);
        for (std::size_t i = 0; i < d; ++i) {
            tq_[i] = state.q[i] + dt * k3q_[i];
            tv_[i] = state.v[i] + dt * k3v_[i];
        }
        field(tq_, tv_, k4q_, k4v_);

        const double w = dt / 6.0;
        for (std::size_t i = 0; i < d; ++i) {
            state.q[i] += w * (k1q_[i] + 2.0 * k2q_[i] + 2.0 * k3q_[i] + k4q_[i]);
            state.v[i] += w * (k1v_[i] + 2.0 * k2v_[i] + 2.0 * k3v_[i] + k4v_[i]);
        }
        state.time += dt;

        const std::size_t n = surface1.param_dim();
        surface1.wrap(std::span<double>(state.q).subspan(0, n));
        surface2.wrap(std::span<double>(state.q).subspan(n));

        if (!all_finite(state.q) || !all_finite(state.v))
            throw NonFiniteState("integration produced a non-finite state at t = " +
                                 std::to_string(state.time) + ", q = " + format_state(state.q) +
                                 ", v = " + format_state(state.v) + " (step size too large?)");
    }

private:
    static std::string format_state(const Vec& x);
    Vec k1q_, k1v_, k2q_, k2v_, k3q_, k3v_, k4q_, k4v_, tq_, tv_;
};

// One-shot convenience wrapper over Rk4Integrator.
template <class Field>
ProductState step_rk4(const ProductState& state, Field&& field, double dt, const Surface& surface1,
                      const Surface& surface2) {
    ProductState out = state;
    Rk4Integrator rk(state.q.size());
    rk.step(out, std::forward<Field>(field), dt, surface1, surface2);
    return out;
}

} // namespace mindist
