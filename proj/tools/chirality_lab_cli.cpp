#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "chirality_lab/experiments.hpp"

using namespace chirality_lab;

namespace {

constexpr int kExitFailedThresholds = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

void print_summary(const RunReport& r) {
    for (const auto& m : r.metrics) {
        if (m.threshold)
            std::printf("%-4s %-48s %.6g (threshold %s %.3g)\n", m.pass ? "ok" : "FAIL", m.name.c_str(), m.value,
                        m.relation == Relation::less            ? "<"
                        : m.relation == Relation::less_equal    ? "<="
                        : m.relation == Relation::greater       ? ">"
                        : m.relation == Relation::greater_equal ? ">="
                                                                : "",
                        *m.threshold);
        else
            std::printf("%-4s %-48s %.6g\n", "rec", m.name.c_str(), m.value);
    }
    std::printf("%s: %s in %.0f ms\n", r.experiment.c_str(), r.passed() ? "PASS" : "FAIL", r.wall_ms);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical experiments for first-order elliptic systems with a chirality operator"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    int grid_n = 0;
    double eps0 = 0.0;
    std::uint64_t seed = 0;
    bool want_json = false, want_csv = false;
    app.add_option("--config", config_path, "flat key = value configuration file");
    app.add_option("--grid-n", grid_n, "grid points per side");
    app.add_option("--eps0", eps0, "smallness parameter");
    app.add_option("--seed", seed, "base seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--json", want_json, "write the JSON report");
    app.add_flag("--csv", want_csv, "write CSV tables and SVG plots");
    for (const auto& name : experiment_names()) app.add_subcommand(name)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    ExperimentConfig config;
    try {
        if (!config_path.empty()) config = load_config(config_path);
        config.experiment = app.get_subcommands().front()->get_name();
        if (app.count("--grid-n")) config.grid_n = grid_n;
        if (app.count("--eps0")) config.eps0 = eps0;
        if (app.count("--seed")) config.seed = seed;
        if (app.count("--out")) config.output_dir = out_dir;
        validate(config);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kExitUsage;
    }

    OutputSelection sel;
    if (want_json || want_csv) sel = {want_json, want_csv};
    try {
        const RunReport report = run_experiment(config);
        for (const auto& path : write_outputs(report, config.output_dir, sel)) std::printf("wrote %s\n", path.c_str());
        print_summary(report);
        return report.passed() ? 0 : kExitFailedThresholds;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s failed: %s\n", config.experiment.c_str(), e.what());
        return kExitRuntime;
    }
}
