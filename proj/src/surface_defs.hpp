#pragma once

// Private header: concrete surface definition nodes, shared between the
// surface implementation and the document reader/writer (which needs the
// shape fields to serialize a definition back out). Not installed.

#include <cstdlib>
#include <string>
#include <vector>

#include "mindist/expression.hpp"
#include "mindist/surface.hpp"

namespace mindist {

struct Surface::Def {
    std::string kind;
    std::size_t n = 0, N = 0;
    std::vector<ParamDomain> domains;
    double mass = 1.0;
    double h = 0.0; // FD step; 0 means derivatives are analytic

    virtual ~Def() = default;
    // `p` is already wrapped/validated.
    virtual void embed(std::span<const double> p, std::span<double> out) const = 0;
    // Only called when h == 0.
    virtual void analytic_jet(std::span<const double>, SurfaceJet&) const { std::abort(); }
    virtual std::shared_ptr<Def> clone() const = 0;
};

namespace detail {

template <class T>
struct DefBase : Surface::Def {
    std::shared_ptr<Surface::Def> clone() const override {
        return std::make_shared<T>(static_cast<const T&>(*this));
    }
};

// Sphere is the equal-axes special case (kind stays "sphere" so documents
// round-trip). Chart: x = center + (ax·sinθcosφ, ay·sinθsinφ, az·cosθ),
// both angles periodic on [0, 2π).
struct EllipsoidDef : DefBase<EllipsoidDef> {
    Vec center;
    double ax = 1, ay = 1, az = 1;
    void embed(std::span<const double> p, std::span<double> out) const override;
    void analytic_jet(std::span<const double> p, SurfaceJet& out) const override;
};

// z-axis torus: x = center + ((R + r cos u) cos v, (R + r cos u) sin v, r sin u).
struct TorusDef : DefBase<TorusDef> {
    Vec center;
    double R = 2, r = 0.5;
    void embed(std::span<const double> p, std::span<double> out) const override;
    void analytic_jet(std::span<const double> p, SurfaceJet& out) const override;
};

struct PlanePatchDef : DefBase<PlanePatchDef> {
    Vec origin, au, av;
    void embed(std::span<const double> p, std::span<double> out) const override;
    void analytic_jet(std::span<const double> p, SurfaceJet& out) const override;
};

struct LineDef : DefBase<LineDef> {
    Vec point, dir;
    void embed(std::span<const double> p, std::span<double> out) const override;
    void analytic_jet(std::span<const double> p, SurfaceJet& out) const override;
};

// x = center + R (cos t · e1 + sin t · e2); {e1, e2} orthonormal in the
// plane perpendicular to the construction normal (kept for round-trips).
struct CircleDef : DefBase<CircleDef> {
    Vec center;
    double R = 1;
    Vec normal, e1, e2;
    void embed(std::span<const double> p, std::span<double> out) const override;
    void analytic_jet(std::span<const double> p, SurfaceJet& out) const override;
};

// Expression-defined embedding; also backs kind "graph" (components are
// the variables plus the graphed function).
struct ExpressionDef : DefBase<ExpressionDef> {
    std::vector<std::string> vars;
    std::vector<std::string> sources;
    std::vector<Expression> comps;
    void embed(std::span<const double> p, std::span<double> out) const override;
};

} // namespace detail

// Internal accessor for the document layer.
inline const Surface::Def& surface_def(const Surface& s) { return s.def(); }

} // namespace mindist
