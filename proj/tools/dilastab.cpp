// Batch front end: runs named experiments from configuration and emits
// verification reports, covariance tables, ensembles and plot-ready CSV.

#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "dilastab/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"dilastab - scaling-law laboratory for dilatively stable processes"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir = ".";
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool validate = false;

    auto add_common = [&](CLI::App* cmd, bool with_validate) {
        cmd->add_option("--config", config,
                        "config file path or builtin experiment name")
            ->required();
        cmd->add_option("--workers", workers, "max worker threads");
        cmd->add_option("--seed", seed, "override the Monte Carlo seed")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--out", out_dir, "output directory");
        if (with_validate)
            cmd->add_flag("--validate", validate,
                          "cross-check the ensemble against the exponent oracle");
    };

    CLI::App* verify = app.add_subcommand("verify", "run scaling-law verifications");
    CLI::App* simulate = app.add_subcommand("simulate", "generate a seeded ensemble");
    CLI::App* estimate = app.add_subcommand("estimate", "fit scaling parameters");
    CLI::App* list = app.add_subcommand("list", "list builtin experiments");
    add_common(verify, false);
    add_common(simulate, true);
    add_common(estimate, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (list->parsed()) {
        for (const auto& name : dilastab::builtin_names())
            std::cout << name << "\n";
        return 0;
    }

    dilastab::ExperimentSpec spec;
    try {
        spec = dilastab::load_experiment(config);
        if (seed_set) spec.mc.seed = seed;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    if (verify->parsed()) return dilastab::run_verify(spec, out_dir, workers);
    if (simulate->parsed())
        return dilastab::run_simulate(spec, out_dir, workers, validate);
    if (estimate->parsed()) return dilastab::run_estimate(spec, out_dir, workers);
    return 2;
}
