#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "mindist/oracle.hpp"
#include "mindist/solver.hpp"
#include "mindist/surface.hpp"

namespace mindist {

// A fully parsed problem document: the two surfaces, the coupling
// potential, and the solver configuration (document `solver` and
// `output` sections both fold into `solver`). Surface masses come from
// the surface documents themselves.
struct ProblemDocument {
    Surface surface_a;
    Surface surface_b;
    Potential potential;
    SolverConfig solver;
};

// Parse one surface document (JSON object as text). Parsing is strict:
// unknown fields, malformed domains, and out-of-range values raise
// ValidationError naming the offending field; text that is not JSON
// raises ParseError with a byte offset.
Surface parse_surface_spec(const std::string& text);

// Serialize a surface back to document text. The output re-parses to a
// surface whose embedding evaluates bitwise-identically (doubles are
// printed with shortest round-trip precision).
std::string print_surface_spec(const Surface& surface);

// Parse a whole problem document. Required fields: surface_a and
// surface_b (with matching ambient dimensions). Optional: potential
// (default harmonic, stiffness 1), solver, output.
ProblemDocument parse_problem(const std::string& text);

// Read and parse a problem document file.
ProblemDocument load_problem(const std::string& path);

// Canonical result record (JSON, fixed key order):
//   converged, distance, closest_point_a, closest_point_b, minimizer,
//   steps, final_energy, final_gradient_norm, seed
// Identical results serialize to identical bytes.
std::string result_record(const SolveResult& result);

// Grid-search record: distance, argmin_a, argmin_b, resolution_bound,
// pairs. Same determinism guarantee as result_record.
std::string oracle_record(const OracleResult& result);

// Side-by-side record nesting both of the above plus the agreement gap
// |solver.distance - oracle.distance| and whether it lies within the
// oracle's resolution bound.
std::string comparison_record(const SolveResult& solve, const OracleResult& oracle);

// Trajectory samples as CSV with header `time,q1..q{n+m},r,E`, one row
// per recorded sample, 17 significant digits.
void write_trajectory_csv(std::ostream& os, const SolveResult& result);

// Options shared by the two CLI entry points. Optional fields override
// the corresponding document values (flag > file > default).
struct CliOptions {
    std::string document_path;
    std::string out_path;        // empty: write the record to `out`
    std::string trajectory_path; // empty: no CSV
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> starts;
    std::optional<std::size_t> max_steps;
    std::optional<std::size_t> samples; // oracle grid points per parameter axis
    bool compare = false;               // oracle: also run the solver and report the gap
};

// Exit codes for both runners:
//   0  success (solver converged / oracle completed)
//   1  input or configuration error (parse, validation, evaluation cap)
//   2  the solver finished without converging (best-so-far record emitted)
int run_solve(const CliOptions& options, std::ostream& out, std::ostream& err);
int run_oracle(const CliOptions& options, std::ostream& out, std::ostream& err);

} // namespace mindist
