// Experiment runner: reads a flat key-value config, executes the named
// experiment, writes report.json plus per-diagnostic CSVs and binary
// snapshots into the output directory.
//
// Exit status: 0 all checks passed, 2 configuration problem, 3 numerical
// failure inside a module.

#include "mkdvlab/config.hpp"
#include "mkdvlab/experiments.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"mkdvlab: desk-scale experiments for breather and complex-soliton "
                 "dynamics of the focusing mKdV equation"};

    std::string config_path;
    std::string experiment_override;
    std::string output_dir_override;
    long seed_override = -1;
    bool quiet = false;

    app.add_option("config", config_path, "path to the key-value config file")
        ->required();
    app.add_option("--experiment", experiment_override,
                   "override the experiment named in the config");
    app.add_option("--output-dir", output_dir_override, "override the output directory");
    app.add_option("--seed", seed_override, "override the random seed");
    app.add_flag("--quiet", quiet, "suppress per-check output");

    CLI11_PARSE(app, argc, argv);

    mkdv::ExperimentConfig cfg;
    try {
        auto kv = mkdv::KeyValueConfig::parse_file(config_path);
        if (!experiment_override.empty()) kv.set("experiment", experiment_override);
        if (!output_dir_override.empty()) kv.set("output_dir", output_dir_override);
        else if (!kv.has("output_dir")) {
            if (const char* env = std::getenv("MKDVLAB_OUTPUT_DIR"))
                kv.set("output_dir", env);
        }
        if (seed_override >= 0) kv.set("seed", std::to_string(seed_override));
        if (quiet) kv.set("quiet", "true");
        cfg = mkdv::load_experiment_config(kv);

        auto findings = mkdv::validate(cfg);
        if (!findings.empty()) {
            for (const auto& f : findings) std::cerr << "config: " << f << "\n";
            return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        mkdv::RunReport rep = mkdv::run(cfg);
        if (!cfg.quiet) {
            for (const auto& c : rep.checks)
                std::cout << (c.pass ? "[pass] " : "[FAIL] ") << c.name << " = " << c.value
                          << " (threshold " << c.threshold << ")\n";
            std::cout << (rep.overall_pass() ? "overall: pass" : "overall: FAIL") << " ("
                      << rep.wall_seconds << " s)\n";
        }
        return rep.overall_pass() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
