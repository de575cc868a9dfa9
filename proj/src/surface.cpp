#include "mindist/surface.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>

#include "mindist/linalg.hpp"
#include "surface_defs.hpp"

namespace mindist {

namespace {

constexpr std::size_t kMaxParams = 16;
constexpr double kSingularRatio = 1e-10; // s_min/s_max below this flags the jet
constexpr double kTwoPi = 2.0 * std::numbers::pi;

ParamDomain full_turn() { return {0.0, kTwoPi, true}; }

void require(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

std::string fmt_num(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

} // namespace

namespace detail {

// ---------------------------------------------------------------------------
// Shape evaluators and analytic jets

void EllipsoidDef::embed(std::span<const double> p, std::span<double> out) const {
    const double st = std::sin(p[0]), ct = std::cos(p[0]);
    const double sf = std::sin(p[1]), cf = std::cos(p[1]);
    out[0] = center[0] + ax * st * cf;
    out[1] = center[1] + ay * st * sf;
    out[2] = center[2] + az * ct;
}

void EllipsoidDef::analytic_jet(std::span<const double> p, SurfaceJet& out) const {
    const double st = std::sin(p[0]), ct = std::cos(p[0]);
    const double sf = std::sin(p[1]), cf = std::cos(p[1]);
    embed(p, out.position);
    auto jt = out.jacobian.row(0), jf = out.jacobian.row(1);
    jt[0] = ax * ct * cf;
    jt[1] = ay * ct * sf;
    jt[2] = -az * st;
    jf[0] = -ax * st * sf;
    jf[1] = ay * st * cf;
    jf[2] = 0.0;
    auto s00 = out.second.slice(0, 0), s01 = out.second.slice(0, 1), s11 = out.second.slice(1, 1);
    s00[0] = -ax * st * cf;
    s00[1] = -ay * st * sf;
    s00[2] = -az * ct;
    s01[0] = -ax * ct * sf;
    s01[1] = ay * ct * cf;
    s01[2] = 0.0;
    s11[0] = -ax * st * cf;
    s11[1] = -ay * st * sf;
    s11[2] = 0.0;
    std::copy(s01.begin(), s01.end(), out.second.slice(1, 0).begin());
}

void TorusDef::embed(std::span<const double> p, std::span<double> out) const {
    const double su = std::sin(p[0]), cu = std::cos(p[0]);
    const double sv = std::sin(p[1]), cv = std::cos(p[1]);
    const double w = R + r * cu;
    out[0] = center[0] + w * cv;
    out[1] = center[1] + w * sv;
    out[2] = center[2] + r * su;
}

void TorusDef::analytic_jet(std::span<const double> p, SurfaceJet& out) const {
    const double su = std::sin(p[0]), cu = std::cos(p[0]);
    const double sv = std::sin(p[1]), cv = std::cos(p[1]);
    const double w = R + r * cu;
    embed(p, out.position);
    auto ju = out.jacobian.row(0), jv = out.jacobian.row(1);
    ju[0] = -r * su * cv;
    ju[1] = -r * su * sv;
    ju[2] = r * cu;
    jv[0] = -w * sv;
    jv[1] = w * cv;
    jv[2] = 0.0;
    auto s00 = out.second.slice(0, 0), s01 = out.second.slice(0, 1), s11 = out.second.slice(1, 1);
    s00[0] = -r * cu * cv;
    s00[1] = -r * cu * sv;
    s00[2] = -r * su;
    s01[0] = r * su * sv;
    s01[1] = -r * su * cv;
    s01[2] = 0.0;
    s11[0] = -w * cv;
    s11[1] = -w * sv;
    s11[2] = 0.0;
    std::copy(s01.begin(), s01.end(), out.second.slice(1, 0).begin());
}

void PlanePatchDef::embed(std::span<const double> p, std::span<double> out) const {
    for (std::size_t i = 0; i < N; ++i) out[i] = origin[i] + p[0] * au[i] + p[1] * av[i];
}

void PlanePatchDef::analytic_jet(std::span<const double> p, SurfaceJet& out) const {
    embed(p, out.position);
    std::copy(au.begin(), au.end(), out.jacobian.row(0).begin());
    std::copy(av.begin(), av.end(), out.jacobian.row(1).begin());
    out.second.zero();
}

void LineDef::embed(std::span<const double> p, std::span<double> out) const {
    for (std::size_t i = 0; i < N; ++i) out[i] = point[i] + p[0] * dir[i];
}

void LineDef::analytic_jet(std::span<const double> p, SurfaceJet& out) const {
    embed(p, out.position);
    std::copy(dir.begin(), dir.end(), out.jacobian.row(0).begin());
    out.second.zero();
}

void CircleDef::embed(std::span<const double> p, std::span<double> out) const {
    const double ct = std::cos(p[0]), st = std::sin(p[0]);
    for (std::size_t i = 0; i < 3; ++i) out[i] = center[i] + R * (ct * e1[i] + st * e2[i]);
}

void CircleDef::analytic_jet(std::span<const double> p, SurfaceJet& out) const {
    const double ct = std::cos(p[0]), st = std::sin(p[0]);
    embed(p, out.position);
    auto j = out.jacobian.row(0);
    auto s = out.second.slice(0, 0);
    for (std::size_t i = 0; i < 3; ++i) {
        j[i] = R * (-st * e1[i] + ct * e2[i]);
        s[i] = -R * (ct * e1[i] + st * e2[i]);
    }
}

void ExpressionDef::embed(std::span<const double> p, std::span<double> out) const {
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const double v = comps[i].eval(p);
        if (!std::isfinite(v))
            throw EvaluationError(
                "component " + std::to_string(i + 1) + " evaluated to a non-finite value", 0);
        out[i] = v;
    }
}

} // namespace detail

using namespace detail;

// ---------------------------------------------------------------------------
// Surface API

std::size_t Surface::param_dim() const { return def_->n; }
std::size_t Surface::ambient_dim() const { return def_->N; }
const std::vector<ParamDomain>& Surface::domains() const { return def_->domains; }
const std::string& Surface::kind() const { return def_->kind; }
bool Surface::analytic_derivatives() const { return def_->h == 0.0; }
double Surface::derivative_step() const { return def_->h; }
double Surface::mass() const { return def_->mass; }

Surface Surface::with_mass(double m) const {
    require(m > 0.0 && std::isfinite(m), "mass must be positive (got " + fmt_num(m) + ")");
    auto copy = def_->clone();
    copy->mass = m;
    return Surface(std::move(copy));
}

void Surface::wrap(std::span<double> params) const {
    const auto& doms = def_->domains;
    assert(params.size() == doms.size());
    for (std::size_t i = 0; i < doms.size(); ++i) {
        const ParamDomain& d = doms[i];
        const double x = params[i];
        if (d.periodic) {
            if (x >= d.lo && x < d.hi) continue; // bitwise identity in-domain
            double y = std::fmod(x - d.lo, d.period());
            if (y < 0.0) y += d.period();
            double w = d.lo + y;
            if (w >= d.hi) w = d.lo; // rounding can land exactly on hi
            params[i] = w;
        } else {
            if (!(x >= d.lo && x <= d.hi))
                throw DomainViolation("parameter " + std::to_string(i + 1) + " = " + fmt_num(x) +
                                      " outside clamped interval [" + fmt_num(d.lo) + ", " +
                                      fmt_num(d.hi) + "]");
        }
    }
}

void Surface::evaluate_into(std::span<const double> params, std::span<double> out) const {
    assert(params.size() == def_->n && out.size() == def_->N);
    double buf[kMaxParams];
    std::copy(params.begin(), params.end(), buf);
    std::span<double> wp(buf, params.size());
    wrap(wp);
    def_->embed(wp, out);
}

Vec Surface::evaluate(std::span<const double> params) const {
    Vec out(def_->N);
    evaluate_into(params, out);
    return out;
}

namespace {

// Wrap only the periodic axes; clamped axes were margin-checked upfront.
void wrap_periodic(const std::vector<ParamDomain>& doms, std::span<double> p) {
    for (std::size_t i = 0; i < doms.size(); ++i) {
        const ParamDomain& d = doms[i];
        if (!d.periodic || (p[i] >= d.lo && p[i] < d.hi)) continue;
        double y = std::fmod(p[i] - d.lo, d.period());
        if (y < 0.0) y += d.period();
        double w = d.lo + y;
        if (w >= d.hi) w = d.lo;
        p[i] = w;
    }
}

// Central-difference jet for expression-defined surfaces. Stencil points
// may leave a periodic interval (they get wrapped); clamped axes require
// a 2h interior margin, checked by the caller. Mixed partials are written
// to both (a,b) and (b,a), so symmetry holds exactly.
void fd_jet(const Surface::Def& def, std::span<const double> p, SurfaceJet& out) {
    const std::size_t n = def.n, N = def.N;
    const double h = def.h;
    thread_local Vec fpp, fpm, fmp, fmm, pt;
    fpp.resize(N);
    fpm.resize(N);
    fmp.resize(N);
    fmm.resize(N);
    pt.resize(n);

    auto eval_at = [&](std::size_t a, double da, std::size_t b, double db, Vec& dst) {
        std::copy(p.begin(), p.end(), pt.begin());
        pt[a] += da;
        if (b != SIZE_MAX) pt[b] += db;
        wrap_periodic(def.domains, pt);
        def.embed(pt, dst);
    };

    def.embed(p, out.position);

    for (std::size_t a = 0; a < n; ++a) {
        eval_at(a, +h, SIZE_MAX, 0, fpp);
        eval_at(a, -h, SIZE_MAX, 0, fpm);
        auto jrow = out.jacobian.row(a);
        auto sdiag = out.second.slice(a, a);
        for (std::size_t i = 0; i < N; ++i) {
            jrow[i] = (fpp[i] - fpm[i]) / (2.0 * h);
            sdiag[i] = (fpp[i] - 2.0 * out.position[i] + fpm[i]) / (h * h);
        }
    }

    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            eval_at(a, +h, b, +h, fpp);
            eval_at(a, +h, b, -h, fpm);
            eval_at(a, -h, b, +h, fmp);
            eval_at(a, -h, b, -h, fmm);
            auto sab = out.second.slice(a, b);
            auto sba = out.second.slice(b, a);
            for (std::size_t i = 0; i < N; ++i) {
                sab[i] = (fpp[i] - fpm[i] - fmp[i] + fmm[i]) / (4.0 * h * h);
                sba[i] = sab[i];
            }
        }
}

} // namespace

void Surface::jet_into(std::span<const double> params, SurfaceJet& out) const {
    const Surface::Def& def = *def_;
    assert(params.size() == def.n);

    double buf[kMaxParams];
    std::copy(params.begin(), params.end(), buf);
    std::span<double> wp(buf, params.size());
    wrap(wp);

    if (def.h > 0.0) {
        // FD stencils reach ±h per axis; keep a 2h margin from clamped
        // boundaries so every stencil point stays strictly in-domain.
        for (std::size_t i = 0; i < def.n; ++i) {
            const ParamDomain& d = def.domains[i];
            if (!d.periodic && (wp[i] - d.lo < 2.0 * def.h || d.hi - wp[i] < 2.0 * def.h))
                throw DomainViolation(
                    "parameter " + std::to_string(i + 1) + " = " + fmt_num(wp[i]) +
                    " is within 2h of a clamped boundary; finite-difference derivatives "
                    "need an interior margin of " +
                    fmt_num(2.0 * def.h));
        }
    }

    out.position.resize(def.N);
    out.jacobian.resize(def.n, def.N);
    out.second.resize(def.n, def.n, def.N);

    if (def.h > 0.0)
        fd_jet(def, wp, out);
    else
        def.analytic_jet(wp, out);

    // Rank check via the Gram matrix J Jᵀ: the jacobian's singular values
    // are the square roots of its eigenvalues.
    thread_local Mat gram;
    thread_local Vec eig;
    gram.resize(def.n, def.n);
    eig.resize(def.n);
    for (std::size_t a = 0; a < def.n; ++a)
        for (std::size_t b = a; b < def.n; ++b) {
            const double g = dot(out.jacobian.row(a), out.jacobian.row(b));
            gram(a, b) = g;
            gram(b, a) = g;
        }
    sym_eigenvalues(gram, eig);
    const double smax = std::sqrt(std::max(eig[def.n - 1], 0.0));
    const double smin = std::sqrt(std::max(eig[0], 0.0));
    out.singular = !(smin > kSingularRatio * smax);
}

SurfaceJet Surface::jet(std::span<const double> params) const {
    SurfaceJet out;
    jet_into(params, out);
    return out;
}

// ---------------------------------------------------------------------------
// Factories

namespace {

void check_common(std::size_t n, std::size_t N, const std::vector<ParamDomain>& domains) {
    require(n >= 1, "parameter dimension must be at least 1");
    require(n < N, "parameter dimension (" + std::to_string(n) +
                       ") must be strictly below the ambient dimension (" + std::to_string(N) +
                       ")");
    require(n <= kMaxParams,
            "parameter dimension above " + std::to_string(kMaxParams) + " is unsupported");
    require(domains.size() == n, "need one domain interval per parameter");
    for (std::size_t i = 0; i < n; ++i) {
        const ParamDomain& d = domains[i];
        require(std::isfinite(d.lo) && std::isfinite(d.hi) && d.lo < d.hi,
                "domain " + std::to_string(i + 1) + " must be a finite interval with lo < hi");
    }
}

void check_vec(const Vec& v, std::size_t len, const std::string& name) {
    require(v.size() == len, name + " must have " + std::to_string(len) + " components (got " +
                                 std::to_string(v.size()) + ")");
    for (double x : v) require(std::isfinite(x), name + " must be finite");
}

std::shared_ptr<Surface::Def> finish(std::shared_ptr<Surface::Def> def, std::string kind,
                                     std::size_t n, std::size_t N, std::vector<ParamDomain> domains,
                                     double h) {
    check_common(n, N, domains);
    def->kind = std::move(kind);
    def->n = n;
    def->N = N;
    def->domains = std::move(domains);
    def->h = h;
    return def;
}

} // namespace

Surface Surface::sphere(Vec center, double radius) {
    require(radius > 0.0, "radius must be positive (got " + fmt_num(radius) + ")");
    return ellipsoid(std::move(center), {radius, radius, radius});
}

Surface Surface::ellipsoid(Vec center, Vec semi_axes) {
    check_vec(center, 3, "center");
    check_vec(semi_axes, 3, "semi_axes");
    for (double a : semi_axes) require(a > 0.0, "semi_axes must be positive");
    auto d = std::make_shared<EllipsoidDef>();
    d->center = std::move(center);
    d->ax = semi_axes[0];
    d->ay = semi_axes[1];
    d->az = semi_axes[2];
    const bool round = semi_axes[0] == semi_axes[1] && semi_axes[1] == semi_axes[2];
    return Surface(
        finish(std::move(d), round ? "sphere" : "ellipsoid", 2, 3, {full_turn(), full_turn()}, 0));
}

Surface Surface::torus(Vec center, double major_radius, double minor_radius) {
    check_vec(center, 3, "center");
    require(major_radius > 0.0, "major_radius must be positive (got " + fmt_num(major_radius) + ")");
    require(minor_radius > 0.0, "minor_radius must be positive (got " + fmt_num(minor_radius) + ")");
    auto d = std::make_shared<TorusDef>();
    d->center = std::move(center);
    d->R = major_radius;
    d->r = minor_radius;
    return Surface(finish(std::move(d), "torus", 2, 3, {full_turn(), full_turn()}, 0));
}

Surface Surface::plane_patch(Vec origin, Vec axis_u, Vec axis_v, ParamDomain du, ParamDomain dv) {
    const std::size_t N = origin.size();
    require(N >= 3, "plane-patch needs an ambient dimension of at least 3");
    check_vec(axis_u, N, "axis_u");
    check_vec(axis_v, N, "axis_v");
    for (double x : origin) require(std::isfinite(x), "origin must be finite");
    require(norm(axis_u) > 0.0 && norm(axis_v) > 0.0, "plane axes must be nonzero");
    auto d = std::make_shared<PlanePatchDef>();
    d->origin = std::move(origin);
    d->au = std::move(axis_u);
    d->av = std::move(axis_v);
    return Surface(finish(std::move(d), "plane-patch", 2, N, {du, dv}, 0));
}

Surface Surface::line(Vec point, Vec direction, ParamDomain dt) {
    const std::size_t N = point.size();
    require(N >= 2, "line needs an ambient dimension of at least 2");
    check_vec(direction, N, "direction");
    for (double x : point) require(std::isfinite(x), "point must be finite");
    require(norm(direction) > 0.0, "direction must be nonzero");
    auto d = std::make_shared<LineDef>();
    d->point = std::move(point);
    d->dir = std::move(direction);
    return Surface(finish(std::move(d), "line", 1, N, {dt}, 0));
}

Surface Surface::circle(Vec center, double radius, Vec normal) {
    check_vec(center, 3, "center");
    check_vec(normal, 3, "normal");
    require(radius > 0.0, "radius must be positive (got " + fmt_num(radius) + ")");
    const double nn = norm(normal);
    require(nn > 0.0, "normal must be nonzero");

    // Orthonormal in-plane basis: start from the coordinate axis least
    // aligned with the normal, for numerical stability.
    Vec nh = {normal[0] / nn, normal[1] / nn, normal[2] / nn};
    std::size_t k = 0;
    for (std::size_t i = 1; i < 3; ++i)
        if (std::fabs(nh[i]) < std::fabs(nh[k])) k = i;
    Vec e1(3, 0.0);
    e1[k] = 1.0;
    const double proj = dot(e1, nh);
    for (std::size_t i = 0; i < 3; ++i) e1[i] -= proj * nh[i];
    const double e1n = norm(e1);
    for (std::size_t i = 0; i < 3; ++i) e1[i] /= e1n;
    Vec e2 = {nh[1] * e1[2] - nh[2] * e1[1], nh[2] * e1[0] - nh[0] * e1[2],
              nh[0] * e1[1] - nh[1] * e1[0]};

    auto d = std::make_shared<CircleDef>();
    d->center = std::move(center);
    d->R = radius;
    d->normal = std::move(normal);
    d->e1 = std::move(e1);
    d->e2 = std::move(e2);
    return Surface(finish(std::move(d), "circle", 1, 3, {full_turn()}, 0));
}

Surface Surface::expression(std::vector<std::string> vars, std::vector<std::string> components,
                            std::vector<ParamDomain> domains, double derivative_step) {
    const std::size_t n = vars.size(), N = components.size();
    require(n >= 1, "vars must not be empty");
    require(N > n, "need more components (" + std::to_string(N) + ") than variables (" +
                       std::to_string(n) + ") for a strict submanifold");
    require(derivative_step > 0.0 && std::isfinite(derivative_step),
            "derivative_step must be positive");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            require(vars[i] != vars[j], "duplicate variable name '" + vars[i] + "'");

    auto d = std::make_shared<ExpressionDef>();
    d->vars = vars;
    d->sources = components;
    d->comps.reserve(N);
    for (const auto& c : components) d->comps.push_back(Expression::parse(c, vars));
    return Surface(finish(std::move(d), "expression", n, N, std::move(domains), derivative_step));
}

Surface Surface::graph(std::vector<std::string> vars, const std::string& function,
                       std::vector<ParamDomain> domains, double derivative_step) {
    // Graph of f: components are the parameters themselves plus f(p).
    std::vector<std::string> comps(vars.begin(), vars.end());
    comps.push_back(function);
    Surface s = expression(std::move(vars), std::move(comps), std::move(domains), derivative_step);
    // Same machinery, distinct kind so documents round-trip as written.
    auto copy = s.def_->clone();
    copy->kind = "graph";
    return Surface(std::move(copy));
}

Expression parse_expression(const std::string& text, const std::vector<std::string>& variables) {
    return Expression::parse(text, variables);
}

} // namespace mindist
