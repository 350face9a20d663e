#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chirality_lab {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
    std::string experiment = "ops-verify";
    int grid_n = 64;
    double length = 6.283185307179586;
    double eps0 = 0.1;
    double beta = 1.5;
    double r0 = 54.598150033144236;  // e^4
    double tol = 1e-8;
    std::uint64_t seed = 1;
    std::string output_dir = "out";

    // Flat "key = value" lines; '#' starts a comment.
    std::string to_text() const;
    bool operator==(const ExperimentConfig&) const = default;
};

const std::vector<std::string>& experiment_names();

// Applies key/value assignments in order; later keys win. Throws ConfigError.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);
void apply_config_text(ExperimentConfig& config, const std::string& text);
ExperimentConfig load_config(const std::string& path);
// Throws ConfigError unless the experiment is known and every numeric field is positive.
void validate(const ExperimentConfig& config);

enum class Relation { less, less_equal, greater, greater_equal, record };

struct Metric {
    std::string name;
    double value = 0.0;
    std::optional<double> threshold;
    Relation relation = Relation::record;
    bool pass = true;
    std::string anchor;
};

struct PlotSpec {
    std::string title;
    int x_column = 0;
    std::vector<int> y_columns;
    bool log_x = false;
    bool log_y = false;
};

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::optional<PlotSpec> plot;

    std::string to_csv() const;
};

struct RunReport {
    std::string experiment;
    ExperimentConfig config;
    std::vector<std::string> anchors;  // sorted, unique
    std::vector<Metric> metrics;
    std::vector<Table> tables;
    double wall_ms = 0.0;

    bool passed() const;
    const Metric* find(const std::string& name) const;
    // Adds a thresholded metric; NaN values fail.
    void check(const std::string& name, double value, Relation relation, double threshold, const std::string& anchor);
    void record(const std::string& name, double value, const std::string& anchor);
};

std::string to_json(const RunReport& report, bool include_wall_clock = true);
RunReport report_from_json(const std::string& text);
bool equivalent(const RunReport& a, const RunReport& b);

// Anchors every experiment may emit; the full suite must cover all of them.
const std::vector<std::string>& anchor_catalog();

// Trial pool size: CHIRALITY_LAB_THREADS when set and positive, else hardware concurrency.
int worker_count();
// Runs fn(0..count-1) on the pool; results are stored by index.
void parallel_for(int count, const std::function<void(int)>& fn);

RunReport run_experiment(const ExperimentConfig& config);

RunReport cmd_ops_verify(const ExperimentConfig& config);
RunReport cmd_hodge_check(const ExperimentConfig& config);
RunReport cmd_bb_check(const ExperimentConfig& config);
RunReport cmd_wente_check(const ExperimentConfig& config);
RunReport cmd_gauge_solve(const ExperimentConfig& config);
RunReport cmd_reformulate(const ExperimentConfig& config);
RunReport cmd_contraction(const ExperimentConfig& config);
RunReport cmd_morrey_decay(const ExperimentConfig& config);
RunReport cmd_bootstrap_demo(const ExperimentConfig& config);
RunReport cmd_jms(const ExperimentConfig& config);
RunReport cmd_full_chain(const ExperimentConfig& config);

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<SvgSeries>& series, bool log_x, bool log_y);

struct OutputSelection {
    bool json = true;
    bool csv = true;
};

// <dir>/<experiment>.json, <dir>/<experiment>_<table>.csv and one SVG per plotted table; atomic writes.
// Returns the written paths.
std::vector<std::string> write_outputs(const RunReport& report, const std::string& dir, const OutputSelection& sel);

}  // namespace chirality_lab
