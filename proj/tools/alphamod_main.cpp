// Command-line driver: parse a config file, validate it, run the named
// experiment, and write report.json plus CSV tables to the output
// directory.  Exit codes: 0 all checks passed, 1 a tolerance check
// failed, 2 configuration or execution error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "alphamod/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"matrix-weighted alpha-modulation experiment driver"};
    std::string config_path;
    std::string out_dir = "out";
    std::string experiment;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "experiment configuration file")
        ->required();
    app.add_option("--out", out_dir,
                   "output directory (report.json, tables/*.csv)");
    CLI::Option* seed_opt =
        app.add_option("--seed", seed, "override the configured seed");
    CLI::Option* exp_opt = app.add_option("--experiment", experiment,
                                          "override the experiment id");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    alphamod::ExperimentConfig cfg;
    try {
        cfg = alphamod::ExperimentConfig::parse_file(config_path);
    } catch (const std::exception& e) {
        std::cerr << "alphamod: " << e.what() << "\n";
        return 2;
    }
    if (exp_opt->count() > 0) {
        cfg.id = experiment;
        cfg.sections["experiment"]["id"] = experiment;
    }
    if (seed_opt->count() > 0) {
        cfg.seed = seed;
        cfg.sections["experiment"]["seed"] = std::to_string(seed);
    }

    std::vector<std::string> diags = alphamod::validate_config(cfg);
    if (!diags.empty()) {
        for (const std::string& d : diags)
            std::cerr << "alphamod: " << cfg.origin << ": " << d << "\n";
        return 2;
    }

    alphamod::Report rep;
    try {
        rep = alphamod::run_experiment(cfg);
    } catch (const alphamod::config_error& e) {
        std::cerr << "alphamod: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "alphamod: experiment '" << cfg.id << "': " << e.what()
                  << "\n";
        return 2;
    }

    try {
        rep.write(out_dir);
    } catch (const std::exception& e) {
        std::cerr << "alphamod: " << e.what() << "\n";
        return 2;
    }

    for (const auto& [name, ok] : rep.checks)
        std::cout << "  [" << (ok ? " ok " : "FAIL") << "] " << name << "\n";
    std::cout << cfg.id << ": " << (rep.pass ? "PASS" : "FAIL") << " ("
              << rep.runtime_seconds << " s, report in " << out_dir << ")\n";
    return rep.pass ? 0 : 1;
}
