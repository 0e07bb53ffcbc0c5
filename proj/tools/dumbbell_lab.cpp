#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dumbbell/config.hpp"
#include "dumbbell/errors.hpp"
#include "dumbbell/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Laplace eigenvalue laboratory for planar dumbbell domains"};

    std::string command;
    std::string config_path;
    std::string out_dir = "out";
    int jobs = 1;
    std::int64_t seed = -1;
    bool print_defaults = false;

    app.add_option("command", command,
                   "mesh | solve | sweep-eps | nodal | decay | obstacle | report | oracle-check");
    app.add_option("--config", config_path, "Experiment config (JSON)");
    app.add_option("--out", out_dir, "Output directory (all files land here)");
    app.add_option("--jobs", jobs, "Parallel workers for sweeps")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Override the solver seed");
    app.add_flag("--print-defaults", print_defaults, "Print the default config and exit");

    CLI11_PARSE(app, argc, argv);

    try {
        if (print_defaults) {
            std::cout << dumbbell::config_to_json(dumbbell::ExperimentConfig{});
            return 0;
        }
        if (command.empty()) throw dumbbell::ConfigError("no command given (see --help)");
        dumbbell::ExperimentConfig cfg = config_path.empty()
                                             ? dumbbell::ExperimentConfig{}
                                             : dumbbell::load_config_file(config_path);
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        dumbbell::run_command(command, cfg, out_dir, jobs);
        return 0;
    } catch (const dumbbell::InvariantViolation& e) {
        std::cerr << "invariant violated: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
