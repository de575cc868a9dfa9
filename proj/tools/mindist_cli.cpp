#include <iostream>

#include <CLI11.hpp>

#include "mindist/problem.hpp"

// Exit codes: 0 success, 1 input/configuration error, 2 solver did not
// converge (a best-so-far record is still emitted).
int main(int argc, char** argv) {
    CLI::App app{"Minimum distance between two parametric surfaces: damped descent on the "
                 "product manifold, with a brute-force grid oracle for cross-checks"};
    app.require_subcommand(1);

    mindist::CliOptions solve_opts;
    CLI::App* solve = app.add_subcommand(
        "solve", "Integrate the damped system until the closest-pair conditions hold");
    solve->add_option("document", solve_opts.document_path, "Problem document (JSON)")
        ->required();
    solve->add_option("--out", solve_opts.out_path,
                      "Write the result record to this file instead of stdout");
    solve->add_option("--trajectory", solve_opts.trajectory_path,
                      "Write trajectory samples to this CSV file (implies recording)");
    solve->add_option("--seed", solve_opts.seed, "Override the document's start seed");
    solve->add_option("--starts", solve_opts.starts,
                      "Override the number of multi-start trajectories");
    solve->add_option("--max-steps", solve_opts.max_steps,
                      "Override the integration step budget per trajectory");

    mindist::CliOptions oracle_opts;
    CLI::App* oracle = app.add_subcommand(
        "oracle", "Exhaustive grid search for an independent distance estimate");
    oracle->add_option("document", oracle_opts.document_path, "Problem document (JSON)")
        ->required();
    oracle->add_option("--out", oracle_opts.out_path,
                       "Write the oracle record to this file instead of stdout");
    oracle->add_option("--samples", oracle_opts.samples,
                       "Grid points per parameter axis (default 100)");
    oracle->add_flag("--compare", oracle_opts.compare,
                     "Also run the solver and report the agreement gap");
    oracle->add_option("--seed", oracle_opts.seed,
                       "Override the document's start seed (with --compare)");
    oracle->add_option("--starts", oracle_opts.starts,
                       "Override the number of multi-start trajectories (with --compare)");
    oracle->add_option("--max-steps", oracle_opts.max_steps,
                       "Override the step budget per trajectory (with --compare)");
    oracle->add_option("--trajectory", oracle_opts.trajectory_path,
                       "Write the comparison solve's trajectory CSV here (with --compare)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Fold CLI11's many exit codes into the documented contract:
        // anything other than a clean --help exit is an input error.
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (solve->parsed()) return mindist::run_solve(solve_opts, std::cout, std::cerr);
    return mindist::run_oracle(oracle_opts, std::cout, std::cerr);
}
