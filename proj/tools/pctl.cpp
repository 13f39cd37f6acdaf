// Command-line front end: evaluate a PCTL formula over a configured model, or
// cross-check a bounded-until probability by simulation.

#include <iostream>

#include <CLI11.hpp>

#include "pctl/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"PCTL model checker for finite and continuous-state Markov chains"};
    app.require_subcommand(1);

    pctl::cli::CheckOptions check;
    auto* check_cmd = app.add_subcommand("check", "Compute the satisfaction set of a state formula");
    check_cmd->add_option("--config", check.config_path, "Model configuration (JSON)")->required();
    check_cmd->add_option("--formula", check.formula, "PCTL state formula")->required();
    check_cmd->add_option("--out", check.out_csv, "Per-cell CSV output")->required();
    check_cmd->add_option("--report", check.report_path, "JSON report output")->required();
    check_cmd->add_option("--tol", check.tol, "Sup-norm tolerance for unbounded until");
    check_cmd->add_option("--max-iter", check.max_iter, "Iteration cap for unbounded until");

    pctl::cli::SimulateOptions sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo estimate of phi U<=horizon psi");
    sim_cmd->add_option("--config", sim.config_path, "Model configuration (JSON)")->required();
    sim_cmd->add_option("--x0", sim.x0, "Initial state");
    sim_cmd->add_option("--n", sim.n, "Number of trajectories");
    sim_cmd->add_option("--horizon", sim.horizon, "Step bound");
    sim_cmd->add_option("--seed", sim.seed, "Root random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : pctl::cli::kUsageError;
    }

    if (*check_cmd) return pctl::cli::run_check(check, std::cerr);
    return pctl::cli::run_simulate(sim, std::cout, std::cerr);
}
