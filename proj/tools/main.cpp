#include <iostream>

#include <CLI11.hpp>

#include "cli.hpp"

int main(int argc, char** argv) {
    using torsionlab::cli::JobSpec;
    JobSpec job;
    CLI::App app{"torsionlab: torsion of cochain complexes, twisted cell complexes and Laurent operators"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    double tol = 0.0;
    double rank_tol = 0.0;
    int degree = 0;
    app.add_option("--tol", tol, "validation tolerance (lueck: check tolerance, default 1e-6)")
        ->check(CLI::PositiveNumber);
    app.add_option("--rank-tol", rank_tol, "absolute rank tolerance")->check(CLI::PositiveNumber);
    app.add_flag("--json", job.json, "machine-readable JSON report");
    app.add_option("--seed", job.seed, "seed for --random suites");
    app.add_option("--random", job.random, "run N seeded random instances instead of reading files")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--levels", job.levels, "lueck tower levels: a..b (powers of two) or a,b,c")
        ->capture_default_str();
    app.add_option("--degree", degree, "hodge: report one degree; lueck: Laplacian degree of a cw input");

    const std::vector<std::pair<std::string, std::string>> described = {
        {"torsion", "torsion by the Hodge and Laplacian routes"},
        {"hodge", "Hodge decomposition and L2-Betti numbers per degree"},
        {"glue-check", "gluing formula for a glued twisted cell complex"},
        {"ses-check", "Milnor additivity for a short exact sequence"},
        {"lueck", "approximation tower and Fourier oracle of a Laurent operator"},
        {"duality-check", "Poincare duality for a twisted cell complex"},
        {"product", "product formula for two complexes"},
    };
    std::string op;
    for (const auto& [name, help] : described) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("inputs", job.inputs, "input JSON files");
        sub->callback([&job, name = name] { job.command = name; });
        if (name == "lueck") sub->add_option("--op", op, "Laurent polynomial, e.g. \"2 - t - t^-1\"");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (app.count("--tol")) job.tol = tol;
    if (app.count("--rank-tol")) job.rank_tol = rank_tol;
    if (app.count("--degree")) job.degree = degree;
    if (!op.empty()) job.op = op;

    const torsionlab::cli::Outcome outcome = torsionlab::cli::run(job);
    std::cout << outcome.out;
    std::cerr << outcome.err;
    return outcome.exit_code;
}
