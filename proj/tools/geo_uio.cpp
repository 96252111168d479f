#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "geouio/commands.hpp"

int main(int argc, char** argv) {
    using namespace geouio;
    CLI::App app{"Geometric unknown-input observers: synthesis, simulation and checks"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    long long trials = 0;
    std::vector<std::string> random_args;
    std::string which;

    auto* synth = app.add_subcommand("synth", "synthesize observer(s) and write report.json");
    synth->add_option("--config", config_path, "project config (JSON)")->required();
    synth->add_option("--out", out_dir, "output directory");

    auto* sim = app.add_subcommand("simulate", "synthesize, simulate, write trajectory.csv and err_node<k>.dat");
    sim->add_option("--config", config_path, "project config (JSON)")->required();
    sim->add_option("--out", out_dir, "output directory");

    auto* verify = app.add_subcommand("verify", "residual checks on a config, or the random equivalence battery");
    auto* cfg_opt = verify->add_option("--config", config_path, "project config (JSON)");
    auto* rnd_opt = verify->add_option("--random", random_args, "N SEED: random battery")->expected(1, 2);
    verify->add_option("--trials", trials, "battery size (same as the first --random value)");
    verify->add_option("--seed", seed, "battery seed");
    verify->add_option("--out", out_dir, "output directory");
    cfg_opt->excludes(rnd_opt);

    auto* repro = app.add_subcommand("reproduce", "rerun a built-in example end to end");
    repro->add_option("which", which, "centralized | distributed")->required();
    repro->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_code::ok : exit_code::config;
    }

    const CommandIO io{std::cout, std::cerr};
    if (synth->parsed()) return run_with_config("synth", config_path, out_dir, io);
    if (sim->parsed()) return run_with_config("simulate", config_path, out_dir, io);
    if (repro->parsed()) return cmd_reproduce(which, out_dir, io);

    if (!config_path.empty()) return run_with_config("verify", config_path, out_dir, io);
    if (random_args.empty() && trials == 0) {
        std::cerr << "verify needs --config FILE or --random N [SEED]\n" << verify->help();
        return exit_code::config;
    }
    try {
        if (!random_args.empty()) trials = std::stoll(random_args[0]);
        if (random_args.size() > 1) seed = std::stoull(random_args[1]);
    } catch (const std::exception&) {
        std::cerr << "--random expects integers N [SEED]\n";
        return exit_code::config;
    }
    return cmd_verify_random(trials, seed, out_dir, io);
}
