#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rfsim/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Pulsed single-photon emitter simulator: interference, correlation and "
                 "spectrum experiments with deterministic, seeded outputs."};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    app.add_option("--config", config_path, "key = value configuration file");
    std::string seed_text;
    app.add_option("--seed", seed_text, "64-bit unsigned run seed (overrides the config)");
    std::string out_dir;
    app.add_option("--out", out_dir, "output directory (overrides the config)");
    int workers = 0;
    app.add_option("--workers", workers, "worker threads for Monte Carlo runs (>= 1)");

    auto* reproduce = app.add_subcommand(
        "reproduce", "regenerate one reference dataset (1c, 1d, 2a, 2b, 2c, 3a, 3b, 3c)");
    std::string dataset_id;
    reproduce->add_option("dataset", dataset_id, "dataset id")->required();

    auto* budget = app.add_subcommand("budget", "print the per-second photon rate chain");

    auto* sweep = app.add_subcommand("sweep", "tabulate a metric while one parameter varies");
    std::string sweep_param, sweep_metric;
    std::vector<double> sweep_values;
    double sweep_delta = -1.0;
    sweep->add_option("--param", sweep_param, "emitter parameter to vary")->required();
    sweep->add_option("--values", sweep_values, "comma-separated parameter values")
        ->required()
        ->delimiter(',');
    sweep->add_option("--metric", sweep_metric, "visibility, g2 or t2_eff")->required();
    sweep->add_option("--delta", sweep_delta,
                      "emission-time separation for the visibility metric [s] "
                      "(default: one pulse period)");

    auto* validate = app.add_subcommand("validate", "check the configuration invariants");
    auto* simulate = app.add_subcommand("simulate", "dump the raw photon stream as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return rfsim::kExitUsage;
    }

    rfsim::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = rfsim::load_config(config_path);
        if (!seed_text.empty()) rfsim::apply_key(cfg, "seed", seed_text);
        if (!out_dir.empty()) rfsim::apply_key(cfg, "out_dir", out_dir);
        if (workers > 0) cfg.workers = workers;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return rfsim::kExitInvalid;
    }

    try {
        if (*reproduce) return rfsim::run_reproduce(dataset_id, cfg);
        if (*budget) return rfsim::run_budget(cfg);
        if (*sweep) {
            const double separation =
                sweep_delta >= 0.0 ? sweep_delta : cfg.emitter.rep_period();
            return rfsim::run_sweep(sweep_param, sweep_values, sweep_metric, separation, cfg);
        }
        if (*validate) return rfsim::run_validate(cfg);
        if (*simulate) return rfsim::run_simulate(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return rfsim::kExitNumeric;
    }
    return rfsim::kExitUsage;
}
