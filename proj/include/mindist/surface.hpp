#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mindist/errors.hpp"
#include "mindist/tensor.hpp"

namespace mindist {

// One parameter axis: interval plus wrap behavior. Periodic parameters
// are reduced into [lo, hi) before evaluation; clamped parameters raise
// DomainViolation outside [lo, hi].
struct ParamDomain {
    double lo = 0.0;
    double hi = 1.0;
    bool periodic = false;
    double period() const { return hi - lo; }
};

// Value and first/second derivatives of the embedding at one parameter
// point. Layouts chosen so each partial-derivative vector is contiguous:
//   jacobian row a        = ∂_a x          (n rows of length N)
//   second(a, b, ·)       = ∂²_{ab} x      (symmetric in a, b — exactly,
//                                           by symmetrization in FD mode)
// `singular` is a warning, not an error: smallest singular value of the
// jacobian below 1e-10 × the largest. Seeding logic avoids such points;
// metric inversion is what actually fails hard.
struct SurfaceJet {
    Vec position;
    Mat jacobian;
    Ten3 second;
    bool singular = false;

    std::span<const double> partial(std::size_t a) const { return jacobian.row(a); }
    std::span<const double> second_partial(std::size_t a, std::size_t b) const {
        return second.slice(a, b);
    }
};

// An immutable parametric submanifold of R^N: a smooth map from an
// n-dimensional box (n < N) into ambient space with derivative access.
// Built-in shapes differentiate analytically; graph/expression surfaces
// use central differences with step `derivative_step`. Copies share the
// underlying definition and are cheap.
class Surface {
public:
    // --- built-in shape factories -------------------------------------
    // Angles are in radians; all angular parameters are periodic on
    // [0, 2π). Sphere/ellipsoid use the polar-angle-first chart
    //   x = center + R·(sinθ cosφ, sinθ sinφ, cosθ).
    static Surface sphere(Vec center, double radius);
    static Surface ellipsoid(Vec center, Vec semi_axes);
    // z-axis torus: ((R + r cos u) cos v, (R + r cos u) sin v, r sin u).
    static Surface torus(Vec center, double major_radius, double minor_radius);
    static Surface plane_patch(Vec origin, Vec axis_u, Vec axis_v, ParamDomain du, ParamDomain dv);
    static Surface line(Vec point, Vec direction, ParamDomain dt);
    static Surface circle(Vec center, double radius, Vec normal);
    // Graph of a scalar function: (p_1, ..., p_n, f(p)).
    static Surface graph(std::vector<std::string> vars, const std::string& function,
                         std::vector<ParamDomain> domains, double derivative_step = 1e-5);
    // Fully expression-defined embedding, one component string per
    // ambient coordinate.
    static Surface expression(std::vector<std::string> vars, std::vector<std::string> components,
                              std::vector<ParamDomain> domains, double derivative_step = 1e-5);

    std::size_t param_dim() const;
    std::size_t ambient_dim() const;
    const std::vector<ParamDomain>& domains() const;
    const std::string& kind() const;
    bool analytic_derivatives() const;
    double derivative_step() const; // 0 when derivatives are analytic

    // Mass constant scaling this surface's kinetic metric.
    double mass() const;
    Surface with_mass(double m) const;

    // Reduce params into the domain: periodic axes wrap (bitwise identity
    // when already inside [lo, hi)), clamped axes throw DomainViolation
    // outside [lo, hi].
    void wrap(std::span<double> params) const;

    Vec evaluate(std::span<const double> params) const;
    void evaluate_into(std::span<const double> params, std::span<double> out) const;

    SurfaceJet jet(std::span<const double> params) const;
    // Reuses `out`'s storage; allocation-free for analytic shapes once
    // the jet has been sized.
    void jet_into(std::span<const double> params, SurfaceJet& out) const;

    struct Def; // internal definition node, opaque outside the library
    const Def& def() const { return *def_; }

private:
    explicit Surface(std::shared_ptr<const Def> def) : def_(std::move(def)) {}
    std::shared_ptr<const Def> def_;
};

// Parse/serialize one arithmetic expression. Thin wrappers kept here so
// callers outside the module don't touch the expression class directly.
class Expression;
Expression parse_expression(const std::string& text, const std::vector<std::string>& variables);

} // namespace mindist
