#include "mindist/problem.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "surface_defs.hpp"

namespace mindist {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& msg) { throw ValidationError(msg); }

// Strict schema: every object's keys must come from its allowlist, so a
// typo is reported instead of silently ignored.
void check_fields(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known) fail("unknown field \"" + it.key() + "\" in " + context);
    }
}

const json& require_field(const json& obj, const char* key, const std::string& context) {
    auto it = obj.find(key);
    if (it == obj.end()) fail("missing field \"" + std::string(key) + "\" in " + context);
    return *it;
}

double as_double(const json& v, const std::string& what) {
    if (!v.is_number()) fail(what + " must be a number");
    return v.get<double>();
}

std::uint64_t as_seed(const json& v, const std::string& what) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    fail(what + " must be a non-negative integer");
}

std::size_t as_count(const json& v, const std::string& what) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() <= 0) ||
        v.get<std::uint64_t>() == 0)
        fail(what + " must be a positive integer");
    return static_cast<std::size_t>(v.get<std::uint64_t>());
}

bool as_bool(const json& v, const std::string& what) {
    if (!v.is_boolean()) fail(what + " must be true or false");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& what) {
    if (!v.is_string()) fail(what + " must be a string");
    return v.get<std::string>();
}

Vec as_vec(const json& v, const std::string& what) {
    if (!v.is_array() || v.empty()) fail(what + " must be a non-empty array of numbers");
    Vec out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number()) fail(what + " must contain only numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<std::string> as_strings(const json& v, const std::string& what) {
    if (!v.is_array() || v.empty()) fail(what + " must be a non-empty array of strings");
    std::vector<std::string> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_string()) fail(what + " must contain only strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

// One parameter axis: [lo, hi] or [lo, hi, "periodic"].
ParamDomain as_domain_entry(const json& v, const std::string& what) {
    if (!v.is_array() || v.size() < 2 || v.size() > 3)
        fail(what + " must be [lo, hi] or [lo, hi, \"periodic\"]");
    ParamDomain d;
    d.lo = as_double(v[0], what + " lower bound");
    d.hi = as_double(v[1], what + " upper bound");
    if (v.size() == 3) {
        if (!v[2].is_string() || v[2].get<std::string>() != "periodic")
            fail(what + ": the only allowed third entry is the string \"periodic\"");
        d.periodic = true;
    }
    if (!(d.lo < d.hi) || !std::isfinite(d.lo) || !std::isfinite(d.hi))
        fail(what + ": need finite bounds with lo < hi");
    return d;
}

std::vector<ParamDomain> as_domains(const json& v, std::size_t expected, const std::string& what) {
    if (!v.is_array()) fail(what + " must be an array of [lo, hi] entries");
    if (v.size() != expected)
        fail(what + " must have exactly " + std::to_string(expected) + " entr" +
             (expected == 1 ? "y" : "ies") + " (got " + std::to_string(v.size()) + ")");
    std::vector<ParamDomain> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(as_domain_entry(v[i], what + "[" + std::to_string(i) + "]"));
    return out;
}

Surface surface_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where + " must be an object");
    const std::string kind = as_string(require_field(j, "kind", where), where + ".kind");
    const std::string ctx = where + " (" + kind + ")";
    auto field = [&](const char* key) -> const json& { return require_field(j, key, ctx); };
    auto num = [&](const char* key) { return as_double(field(key), ctx + "." + key); };
    auto vec = [&](const char* key) { return as_vec(field(key), ctx + "." + key); };
    auto strings = [&](const char* key) { return as_strings(field(key), ctx + "." + key); };
    auto domains = [&](std::size_t count) {
        return as_domains(field("domain"), count, ctx + ".domain");
    };
    auto fd_step = [&]() {
        auto it = j.find("derivative_step");
        return it == j.end() ? 1e-5 : as_double(*it, ctx + ".derivative_step");
    };

    auto build = [&]() -> Surface {
        if (kind == "sphere") {
            check_fields(j, {"kind", "center", "radius", "mass"}, ctx);
            return Surface::sphere(vec("center"), num("radius"));
        }
        if (kind == "ellipsoid") {
            check_fields(j, {"kind", "center", "semi_axes", "mass"}, ctx);
            return Surface::ellipsoid(vec("center"), vec("semi_axes"));
        }
        if (kind == "torus") {
            check_fields(j, {"kind", "center", "major_radius", "minor_radius", "mass"}, ctx);
            return Surface::torus(vec("center"), num("major_radius"), num("minor_radius"));
        }
        if (kind == "plane-patch") {
            check_fields(j, {"kind", "origin", "axis_u", "axis_v", "domain", "mass"}, ctx);
            auto d = domains(2);
            return Surface::plane_patch(vec("origin"), vec("axis_u"), vec("axis_v"), d[0], d[1]);
        }
        if (kind == "line") {
            check_fields(j, {"kind", "point", "direction", "domain", "mass"}, ctx);
            return Surface::line(vec("point"), vec("direction"), domains(1)[0]);
        }
        if (kind == "circle") {
            check_fields(j, {"kind", "center", "radius", "normal", "mass"}, ctx);
            return Surface::circle(vec("center"), num("radius"), vec("normal"));
        }
        if (kind == "graph") {
            check_fields(j, {"kind", "vars", "function", "domain", "derivative_step", "mass"},
                         ctx);
            auto vars = strings("vars");
            auto d = domains(vars.size());
            return Surface::graph(std::move(vars),
                                  as_string(field("function"), ctx + ".function"), std::move(d),
                                  fd_step());
        }
        if (kind == "expression") {
            check_fields(j, {"kind", "vars", "components", "domain", "derivative_step", "mass"},
                         ctx);
            auto vars = strings("vars");
            auto d = domains(vars.size());
            return Surface::expression(std::move(vars), strings("components"), std::move(d),
                                       fd_step());
        }
        fail("unknown surface kind \"" + kind + "\" in " + where +
             " (expected sphere, ellipsoid, torus, plane-patch, line, circle, graph, or "
             "expression)");
    };

    try {
        Surface s = build();
        if (auto it = j.find("mass"); it != j.end())
            s = s.with_mass(as_double(*it, ctx + ".mass"));
        return s;
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        // Factory diagnostics name the quantity but not the document slot.
        if (msg.find(where) == std::string::npos)
            throw ValidationError(ctx + ": " + msg);
        throw;
    }
}

json domains_to_json(const std::vector<ParamDomain>& domains) {
    json arr = json::array();
    for (const auto& d : domains) {
        json entry = json::array({d.lo, d.hi});
        if (d.periodic) entry.push_back("periodic");
        arr.push_back(entry);
    }
    return arr;
}

ordered surface_to_json(const Surface& s) {
    const Surface::Def& def = surface_def(s);
    ordered j;
    j["kind"] = def.kind;
    if (def.kind == "sphere") {
        const auto& e = dynamic_cast<const detail::EllipsoidDef&>(def);
        j["center"] = e.center;
        j["radius"] = e.ax;
    } else if (def.kind == "ellipsoid") {
        const auto& e = dynamic_cast<const detail::EllipsoidDef&>(def);
        j["center"] = e.center;
        j["semi_axes"] = Vec{e.ax, e.ay, e.az};
    } else if (def.kind == "torus") {
        const auto& t = dynamic_cast<const detail::TorusDef&>(def);
        j["center"] = t.center;
        j["major_radius"] = t.R;
        j["minor_radius"] = t.r;
    } else if (def.kind == "plane-patch") {
        const auto& p = dynamic_cast<const detail::PlanePatchDef&>(def);
        j["origin"] = p.origin;
        j["axis_u"] = p.au;
        j["axis_v"] = p.av;
        j["domain"] = domains_to_json(def.domains);
    } else if (def.kind == "line") {
        const auto& l = dynamic_cast<const detail::LineDef&>(def);
        j["point"] = l.point;
        j["direction"] = l.dir;
        j["domain"] = domains_to_json(def.domains);
    } else if (def.kind == "circle") {
        const auto& c = dynamic_cast<const detail::CircleDef&>(def);
        j["center"] = c.center;
        j["radius"] = c.R;
        j["normal"] = c.normal;
    } else if (def.kind == "graph") {
        const auto& e = dynamic_cast<const detail::ExpressionDef&>(def);
        j["vars"] = e.vars;
        j["function"] = e.sources.back();
        j["domain"] = domains_to_json(def.domains);
        j["derivative_step"] = def.h;
    } else if (def.kind == "expression") {
        const auto& e = dynamic_cast<const detail::ExpressionDef&>(def);
        j["vars"] = e.vars;
        j["components"] = e.sources;
        j["domain"] = domains_to_json(def.domains);
        j["derivative_step"] = def.h;
    } else {
        fail("cannot serialize surface kind \"" + def.kind + "\"");
    }
    j["mass"] = def.mass;
    return j;
}

Potential potential_from_json(const json& j) {
    if (!j.is_object()) fail("potential must be an object");
    check_fields(j, {"kind", "stiffness", "exponent"}, "potential");
    std::string kind = "harmonic";
    if (auto it = j.find("kind"); it != j.end()) kind = as_string(*it, "potential.kind");
    double stiffness = 1.0;
    if (auto it = j.find("stiffness"); it != j.end())
        stiffness = as_double(*it, "potential.stiffness");
    if (kind == "harmonic") {
        if (j.contains("exponent"))
            fail("potential.exponent is only valid for the power kind");
        return Potential::harmonic(stiffness);
    }
    if (kind == "power") {
        double exponent = 2.0;
        if (auto it = j.find("exponent"); it != j.end())
            exponent = as_double(*it, "potential.exponent");
        return Potential::power(stiffness, exponent);
    }
    fail("unknown potential kind \"" + kind + "\" (expected harmonic or power)");
}

void solver_section(const json& j, SolverConfig& cfg) {
    if (!j.is_object()) fail("solver must be an object");
    check_fields(j,
                 {"dt", "damping", "tol_velocity", "tol_gradient", "max_steps", "starts", "seed"},
                 "solver");
    if (auto it = j.find("dt"); it != j.end()) cfg.dt = as_double(*it, "solver.dt");
    if (auto it = j.find("damping"); it != j.end()) cfg.damping = as_double(*it, "solver.damping");
    if (auto it = j.find("tol_velocity"); it != j.end())
        cfg.tol_velocity = as_double(*it, "solver.tol_velocity");
    if (auto it = j.find("tol_gradient"); it != j.end())
        cfg.tol_gradient = as_double(*it, "solver.tol_gradient");
    if (auto it = j.find("max_steps"); it != j.end())
        cfg.max_steps = as_count(*it, "solver.max_steps");
    if (auto it = j.find("starts"); it != j.end()) cfg.starts = as_count(*it, "solver.starts");
    if (auto it = j.find("seed"); it != j.end()) cfg.seed = as_seed(*it, "solver.seed");
}

void output_section(const json& j, SolverConfig& cfg) {
    if (!j.is_object()) fail("output must be an object");
    check_fields(j, {"trajectory", "sample_every"}, "output");
    if (auto it = j.find("trajectory"); it != j.end())
        cfg.record_trajectory = as_bool(*it, "output.trajectory");
    if (auto it = j.find("sample_every"); it != j.end())
        cfg.sample_every = as_count(*it, "output.sample_every");
}

json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }
}

ordered result_to_json(const SolveResult& r) {
    ordered j;
    j["converged"] = r.converged;
    j["distance"] = r.distance;
    j["closest_point_a"] = r.closest_point_a;
    j["closest_point_b"] = r.closest_point_b;
    j["minimizer"] = r.minimizer;
    j["steps"] = r.steps;
    j["final_energy"] = r.final_energy;
    j["final_gradient_norm"] = r.final_gradient_norm;
    j["seed"] = r.seed;
    return j;
}

ordered oracle_to_json(const OracleResult& r) {
    ordered j;
    j["distance"] = r.distance;
    j["argmin_a"] = r.argmin1;
    j["argmin_b"] = r.argmin2;
    j["resolution_bound"] = r.resolution_bound;
    j["pairs"] = r.pairs;
    return j;
}

SolverConfig apply_overrides(SolverConfig cfg, const CliOptions& o) {
    if (o.seed) cfg.seed = *o.seed;
    if (o.starts) cfg.starts = *o.starts;
    if (o.max_steps) cfg.max_steps = *o.max_steps;
    if (!o.trajectory_path.empty()) cfg.record_trajectory = true;
    return cfg;
}

// Record text goes to the --out file when given, otherwise to `out`.
int emit(const std::string& text, const std::string& out_path, std::ostream& out,
         std::ostream& err) {
    if (out_path.empty()) {
        out << text;
        return 0;
    }
    std::ofstream f(out_path);
    if (f) f << text;
    if (!f) {
        err << "error: cannot write \"" << out_path << "\"\n";
        return 1;
    }
    return 0;
}

// Shared by run_solve and run_oracle --compare. Returns true when a
// reportable result landed in `result` (converged or best-so-far);
// false means a hard failure already explained on `err`.
bool run_solver_side(const ProblemDocument& doc, const SolverConfig& cfg, SolveResult& result,
                     std::ostream& err) {
    try {
        result = multi_start(doc.surface_a, doc.surface_b, doc.potential, cfg);
    } catch (const AllStartsFailed& e) {
        if (e.best().minimizer.empty()) {
            err << "error: " << e.what() << '\n';
            return false;
        }
        err << "warning: " << e.what() << '\n';
        result = e.best();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return false;
    }
    if (result.reseeds > 0)
        err << "note: " << result.reseeds
            << " trajectory reseed(s) after a singular metric; see the seed field for the base "
               "sequence\n";
    return true;
}

int write_trajectory_file(const SolveResult& result, const CliOptions& opts,
                          const SolverConfig& cfg, std::ostream& err) {
    if (opts.trajectory_path.empty()) {
        if (cfg.record_trajectory)
            err << "note: trajectory recorded but no --trajectory path given; samples "
                   "discarded\n";
        return 0;
    }
    std::ofstream f(opts.trajectory_path);
    if (f) write_trajectory_csv(f, result);
    if (!f) {
        err << "error: cannot write \"" << opts.trajectory_path << "\"\n";
        return 1;
    }
    return 0;
}

} // namespace

Surface parse_surface_spec(const std::string& text) {
    return surface_from_json(parse_text(text), "surface");
}

std::string print_surface_spec(const Surface& surface) {
    return surface_to_json(surface).dump(2) + "\n";
}

ProblemDocument parse_problem(const std::string& text) {
    const json j = parse_text(text);
    if (!j.is_object()) fail("problem document must be a JSON object");
    check_fields(j, {"surface_a", "surface_b", "potential", "solver", "output"},
                 "the problem document");
    Surface a = surface_from_json(require_field(j, "surface_a", "the problem document"),
                                  "surface_a");
    Surface b = surface_from_json(require_field(j, "surface_b", "the problem document"),
                                  "surface_b");
    if (a.ambient_dim() != b.ambient_dim())
        fail("surface_a and surface_b must share an ambient dimension (got " +
             std::to_string(a.ambient_dim()) + " and " + std::to_string(b.ambient_dim()) + ")");
    Potential potential;
    if (auto it = j.find("potential"); it != j.end()) potential = potential_from_json(*it);
    SolverConfig cfg;
    if (auto it = j.find("solver"); it != j.end()) solver_section(*it, cfg);
    if (auto it = j.find("output"); it != j.end()) output_section(*it, cfg);
    return ProblemDocument{std::move(a), std::move(b), potential, cfg};
}

ProblemDocument load_problem(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail("cannot open problem document \"" + path + "\"");
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_problem(buf.str());
}

std::string result_record(const SolveResult& result) {
    return result_to_json(result).dump(2) + "\n";
}

std::string oracle_record(const OracleResult& result) {
    return oracle_to_json(result).dump(2) + "\n";
}

std::string comparison_record(const SolveResult& solve, const OracleResult& oracle) {
    ordered j;
    j["solver"] = result_to_json(solve);
    j["oracle"] = oracle_to_json(oracle);
    const double gap = std::fabs(solve.distance - oracle.distance);
    j["agreement_gap"] = gap;
    j["within_resolution_bound"] = gap <= oracle.resolution_bound;
    return j.dump(2) + "\n";
}

void write_trajectory_csv(std::ostream& os, const SolveResult& result) {
    os << "time";
    for (std::size_t i = 1; i <= result.minimizer.size(); ++i) os << ",q" << i;
    os << ",r,E\n";
    const auto old_precision = os.precision(17);
    for (const auto& s : result.trajectory) {
        os << s.time;
        for (double q : s.q) os << ',' << q;
        os << ',' << s.r << ',' << s.energy << '\n';
    }
    os.precision(old_precision);
}

int run_solve(const CliOptions& options, std::ostream& out, std::ostream& err) {
    std::optional<ProblemDocument> doc;
    try {
        doc.emplace(load_problem(options.document_path));
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    const SolverConfig cfg = apply_overrides(doc->solver, options);
    SolveResult result;
    if (!run_solver_side(*doc, cfg, result, err)) return 1;
    if (write_trajectory_file(result, options, cfg, err) != 0) return 1;
    if (emit(result_record(result), options.out_path, out, err) != 0) return 1;
    return result.converged ? 0 : 2;
}

int run_oracle(const CliOptions& options, std::ostream& out, std::ostream& err) {
    std::optional<ProblemDocument> doc;
    try {
        doc.emplace(load_problem(options.document_path));
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    OracleResult oracle{};
    try {
        const GridSpec grid = GridSpec::uniform(doc->surface_a, doc->surface_b,
                                                options.samples.value_or(100));
        oracle = grid_min_distance(doc->surface_a, doc->surface_b, grid);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    if (!options.compare) return emit(oracle_record(oracle), options.out_path, out, err);

    const SolverConfig cfg = apply_overrides(doc->solver, options);
    SolveResult solve;
    if (!run_solver_side(*doc, cfg, solve, err)) return 1;
    if (write_trajectory_file(solve, options, cfg, err) != 0) return 1;
    if (emit(comparison_record(solve, oracle), options.out_path, out, err) != 0) return 1;
    return solve.converged ? 0 : 2;
}

} // namespace mindist
