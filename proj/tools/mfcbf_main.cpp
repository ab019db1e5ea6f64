#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mfcbf/config.hpp"
#include "mfcbf/error.hpp"
#include "mfcbf/experiment.hpp"

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    bool no_filter = false;
    std::optional<std::size_t> runs;
    std::optional<std::size_t> workers;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, std::string& config_path, Overrides& o) {
    cmd->add_option("config", config_path, "TOML experiment config")->required();
    cmd->add_option("--seed", o.seed, "Base seed");
    cmd->add_flag("--no-filter", o.no_filter, "Disable the safety filter");
    cmd->add_option("--out", o.out, "Output directory (overrides MFCBF_OUT_DIR and the config)");
}

mfcbf::ExperimentConfig resolve(const std::string& path, const Overrides& o) {
    mfcbf::ExperimentConfig c = mfcbf::load_config(path);
    if (o.seed) c.sim.seed = *o.seed;
    if (o.no_filter) c.filter = false;
    if (o.runs) c.runs = *o.runs;
    if (o.workers) c.workers = *o.workers;
    if (o.out) {
        c.output_dir = *o.out;
    } else if (const char* env = std::getenv("MFCBF_OUT_DIR"); env && *env) {
        c.output_dir = env;
    }
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean-field CBF particle simulator"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides o;
    double mu = 0.05;
    std::size_t grid = 512;
    std::string record;
    std::optional<double> time;

    CLI::App* run = app.add_subcommand("run", "Single run");
    add_common(run, config_path, o);

    CLI::App* ensemble = app.add_subcommand("ensemble", "Independent runs with seeds base+index");
    add_common(ensemble, config_path, o);
    ensemble->add_option("--runs", o.runs, "Ensemble size")->check(CLI::PositiveNumber);
    ensemble->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);

    CLI::App* certify = app.add_subcommand("certify", "Mass bound B(mu) for the configured layout");
    add_common(certify, config_path, o);
    certify->add_option("--mu", mu, "Inside-mass level in (0, 1)");
    certify->add_option("--grid", grid, "Grid resolution for the infima")->check(CLI::Range(32, 8192));

    CLI::App* diagnose = app.add_subcommand("diagnose", "Stability constants from a run record");
    add_common(diagnose, config_path, o);
    diagnose->add_option("record", record, "Run directory or snapshots.csv")->required();
    diagnose->add_option("--time", time, "Snapshot time (default: last)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    mfcbf::ExperimentConfig config;
    try {
        config = resolve(config_path, o);
    } catch (const mfcbf::Error& e) {
        std::cerr << e.what() << "\n";
        return mfcbf::exit_code(e.kind());
    }

    if (*run) return mfcbf::cmd_run(config, std::cerr);
    if (*ensemble) return mfcbf::cmd_ensemble(config, std::cerr);
    if (*certify) return mfcbf::cmd_certify(config, mu, std::cout, grid);
    return mfcbf::cmd_diagnose(config, record, time, std::cout);
}
