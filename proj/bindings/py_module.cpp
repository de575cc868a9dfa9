#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <utility>

#include "mindist/dynamics.hpp"
#include "mindist/oracle.hpp"
#include "mindist/problem.hpp"
#include "mindist/solver.hpp"
#include "mindist/surface.hpp"

namespace py = pybind11;
using namespace mindist;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Minimum distance between parametric surfaces via damped Riemannian dynamics";
    m.attr("__version__") = "0.1.0";

    // Exception hierarchy: register the base first so the more specific
    // translators (registered later) get the first match.
    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ParseError>(m, "ParseError", base);
    py::register_exception<ValidationError>(m, "ValidationError", base);
    py::register_exception<EvaluationError>(m, "EvaluationError", base);
    py::register_exception<DomainViolation>(m, "DomainViolation", base);
    py::register_exception<SingularMetric>(m, "SingularMetric", base);
    py::register_exception<DegenerateSeparation>(m, "DegenerateSeparation", base);
    py::register_exception<NonFiniteState>(m, "NonFiniteState", base);
    py::register_exception<CapExceeded>(m, "CapExceeded", base);
    py::register_exception<AllStartsFailed>(m, "AllStartsFailed", base);

    py::class_<ParamDomain>(m, "ParamDomain",
                            "One parameter axis: [lo, hi], optionally periodic")
        .def(py::init([](double lo, double hi, bool periodic) {
                 return ParamDomain{lo, hi, periodic};
             }),
             py::arg("lo"), py::arg("hi"), py::arg("periodic") = false)
        .def_readwrite("lo", &ParamDomain::lo)
        .def_readwrite("hi", &ParamDomain::hi)
        .def_readwrite("periodic", &ParamDomain::periodic)
        .def("__repr__", [](const ParamDomain& d) {
            return "ParamDomain(" + std::to_string(d.lo) + ", " + std::to_string(d.hi) +
                   (d.periodic ? ", periodic=True)" : ")");
        });

    py::class_<Surface>(m, "Surface", "Immutable parametric submanifold of R^N")
        .def_static("sphere", &Surface::sphere, py::arg("center"), py::arg("radius"))
        .def_static("ellipsoid", &Surface::ellipsoid, py::arg("center"), py::arg("semi_axes"))
        .def_static("torus", &Surface::torus, py::arg("center"), py::arg("major_radius"),
                    py::arg("minor_radius"))
        .def_static("plane_patch", &Surface::plane_patch, py::arg("origin"), py::arg("axis_u"),
                    py::arg("axis_v"), py::arg("domain_u"), py::arg("domain_v"))
        .def_static("line", &Surface::line, py::arg("point"), py::arg("direction"),
                    py::arg("domain"))
        .def_static("circle", &Surface::circle, py::arg("center"), py::arg("radius"),
                    py::arg("normal"))
        .def_static("graph", &Surface::graph, py::arg("vars"), py::arg("function"),
                    py::arg("domains"), py::arg("derivative_step") = 1e-5)
        .def_static("expression", &Surface::expression, py::arg("vars"), py::arg("components"),
                    py::arg("domains"), py::arg("derivative_step") = 1e-5)
        .def_property_readonly("kind", &Surface::kind)
        .def_property_readonly("param_dim", &Surface::param_dim)
        .def_property_readonly("ambient_dim", &Surface::ambient_dim)
        .def_property_readonly("mass", &Surface::mass)
        .def_property_readonly("analytic_derivatives", &Surface::analytic_derivatives)
        .def_property_readonly("domains",
                               [](const Surface& s) { return s.domains(); })
        .def("with_mass", &Surface::with_mass, py::arg("mass"))
        .def("evaluate", [](const Surface& s, const Vec& p) { return s.evaluate(p); },
             py::arg("params"), "Embed a parameter point into ambient space")
        .def("wrap", [](const Surface& s, Vec p) {
                 s.wrap(p);
                 return p;
             },
             py::arg("params"), "Reduce parameters into the domain (periodic axes wrap)")
        .def("__repr__", [](const Surface& s) {
            return "<Surface kind='" + s.kind() + "' " + std::to_string(s.param_dim()) + "->" +
                   std::to_string(s.ambient_dim()) + ">";
        });

    py::class_<Potential> pot(m, "Potential", "Radial potential U(r) of the separation");
    py::enum_<Potential::Kind>(pot, "Kind")
        .value("Harmonic", Potential::Kind::Harmonic)
        .value("Power", Potential::Kind::Power);
    pot.def_static("harmonic", &Potential::harmonic, py::arg("stiffness"))
        .def_static("power", &Potential::power, py::arg("stiffness"), py::arg("exponent"))
        .def_readonly("kind", &Potential::kind)
        .def_readonly("stiffness", &Potential::stiffness)
        .def_readonly("exponent", &Potential::exponent)
        .def("value", &Potential::value, py::arg("r"))
        .def("slope", &Potential::slope, py::arg("r"));

    py::class_<SolverConfig>(m, "SolverConfig", "Integration, convergence, and start settings")
        .def(py::init<>())
        .def_readwrite("dt", &SolverConfig::dt)
        .def_readwrite("damping", &SolverConfig::damping)
        .def_readwrite("tol_velocity", &SolverConfig::tol_velocity)
        .def_readwrite("tol_gradient", &SolverConfig::tol_gradient)
        .def_readwrite("max_steps", &SolverConfig::max_steps)
        .def_readwrite("starts", &SolverConfig::starts)
        .def_readwrite("seed", &SolverConfig::seed)
        .def_readwrite("mass1", &SolverConfig::mass1)
        .def_readwrite("mass2", &SolverConfig::mass2)
        .def_readwrite("record_trajectory", &SolverConfig::record_trajectory)
        .def_readwrite("sample_every", &SolverConfig::sample_every);

    py::class_<TrajectorySample>(m, "TrajectorySample")
        .def_readonly("time", &TrajectorySample::time)
        .def_readonly("q", &TrajectorySample::q)
        .def_readonly("r", &TrajectorySample::r)
        .def_readonly("energy", &TrajectorySample::energy);

    py::class_<SolveResult>(m, "SolveResult")
        .def_readonly("converged", &SolveResult::converged)
        .def_readonly("distance", &SolveResult::distance)
        .def_readonly("closest_point_a", &SolveResult::closest_point_a)
        .def_readonly("closest_point_b", &SolveResult::closest_point_b)
        .def_readonly("minimizer", &SolveResult::minimizer)
        .def_readonly("steps", &SolveResult::steps)
        .def_readonly("final_energy", &SolveResult::final_energy)
        .def_readonly("final_gradient_norm", &SolveResult::final_gradient_norm)
        .def_readonly("seed", &SolveResult::seed)
        .def_readonly("reseeds", &SolveResult::reseeds)
        .def_readonly("trajectory", &SolveResult::trajectory)
        .def("__repr__", [](const SolveResult& r) {
            return std::string("<SolveResult converged=") + (r.converged ? "True" : "False") +
                   " distance=" + std::to_string(r.distance) + ">";
        });

    m.def("solve",
          [](const Surface& a, const Surface& b, const Potential& potential,
             const SolverConfig& config, std::optional<Vec> initial) {
              return solve(a, b, potential, config, std::move(initial));
          },
          py::arg("surface_a"), py::arg("surface_b"), py::arg("potential"), py::arg("config"),
          py::arg("initial") = py::none(),
          "Integrate one damped trajectory until the closest-pair conditions hold");

    m.def("multi_start", &multi_start, py::arg("surface_a"), py::arg("surface_b"),
          py::arg("potential"), py::arg("config"),
          "Run config.starts trajectories and return the best converged result");

    m.def("energy",
          [](const Surface& a, const Surface& b, const Potential& potential, Vec q, Vec v) {
              return energy(ProductState{std::move(q), std::move(v), 0.0}, a, b, potential);
          },
          py::arg("surface_a"), py::arg("surface_b"), py::arg("potential"), py::arg("q"),
          py::arg("v"), "Total mechanical energy at a stacked state");

    py::class_<GridSpec>(m, "GridSpec", "Sample counts per parameter axis for the grid oracle")
        .def_static("uniform",
                    py::overload_cast<const Surface&, const Surface&, std::size_t>(
                        &GridSpec::uniform),
                    py::arg("surface_a"), py::arg("surface_b"), py::arg("per_axis"))
        .def_static("uniform",
                    py::overload_cast<const Surface&, const Surface&, std::size_t, std::size_t>(
                        &GridSpec::uniform),
                    py::arg("surface_a"), py::arg("surface_b"), py::arg("per_axis_a"),
                    py::arg("per_axis_b"))
        .def_readwrite("samples1", &GridSpec::samples1)
        .def_readwrite("samples2", &GridSpec::samples2)
        .def_readwrite("cap", &GridSpec::cap);

    py::class_<OracleResult>(m, "OracleResult")
        .def_readonly("distance", &OracleResult::distance)
        .def_readonly("argmin_a", &OracleResult::argmin1)
        .def_readonly("argmin_b", &OracleResult::argmin2)
        .def_readonly("resolution_bound", &OracleResult::resolution_bound)
        .def_readonly("pairs", &OracleResult::pairs);

    m.def("grid_min_distance", &grid_min_distance, py::arg("surface_a"), py::arg("surface_b"),
          py::arg("grid"), "Exhaustive minimum ambient distance over a parameter grid");

    m.def("fd_gradient_check",
          [](const Surface& a, const Surface& b, const Potential& potential, const Vec& q,
             double h) {
              const ProductState state{q, Vec(q.size(), 0.0), 0.0};
              return fd_gradient_check(a, b, potential, state, h);
          },
          py::arg("surface_a"), py::arg("surface_b"), py::arg("potential"), py::arg("q"),
          py::arg("h") = 1e-6,
          "Worst relative error of the analytic potential gradient vs central differences");

    py::class_<ProblemDocument>(m, "ProblemDocument")
        .def_readonly("surface_a", &ProblemDocument::surface_a)
        .def_readonly("surface_b", &ProblemDocument::surface_b)
        .def_readonly("potential", &ProblemDocument::potential)
        .def_readonly("solver", &ProblemDocument::solver);

    m.def("parse_surface_spec", &parse_surface_spec, py::arg("text"),
          "Parse one surface document (strict JSON)");
    m.def("print_surface_spec", &print_surface_spec, py::arg("surface"),
          "Serialize a surface to document text that re-parses identically");
    m.def("parse_problem", &parse_problem, py::arg("text"), "Parse a whole problem document");
    m.def("load_problem", &load_problem, py::arg("path"), "Read and parse a problem document");
    m.def("result_record", &result_record, py::arg("result"),
          "Canonical JSON record for a solve result");
    m.def("oracle_record", &oracle_record, py::arg("result"),
          "Canonical JSON record for an oracle result");
    m.def("comparison_record", &comparison_record, py::arg("solve"), py::arg("oracle"),
          "Nested solver/oracle record with the agreement gap");
}
