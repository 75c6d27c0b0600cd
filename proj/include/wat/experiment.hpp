#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "wat/bounds.hpp"
#include "wat/dataset.hpp"
#include "wat/train.hpp"

namespace wat {

using json = nlohmann::ordered_json;

// Raised for malformed or invalid configuration (CLI exit code 1); everything
// else surfaces as std::runtime_error (exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ClassSpec {
    Vec mean;
    double std = 0.1;
    int train_count = 200;
    int test_count = 200;
};

struct ExperimentConfig {
    int dim = 2;
    double box_lo = 0.0;
    double box_hi = 1.0;
    std::vector<ClassSpec> classes;
    int per_class_val = 50;

    TrainConfig train;                 // strategy field is overridden per method
    std::vector<std::string> methods;  // subset of {"uniform", "wat", "fixed"}
    Vec fixed_weights;
    std::vector<uint64_t> seeds;
    std::vector<double> etas = {0.01, 0.05, 0.1, 0.5};

    bool bounds_enabled = false;
    BoundConfig bounds;

    int num_classes() const { return static_cast<int>(classes.size()); }
    void validate() const;
    json to_json() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json(const json& j);

// Deterministic per-seed datasets for a config.
struct SeedData {
    Dataset train;
    Dataset val;
    Dataset test;
};
SeedData make_seed_data(const ExperimentConfig& cfg, uint64_t seed);

// Trains every requested method on every seed, evaluates, computes metrics,
// audits, and (optionally) bounds. The returned record contains no wall-clock
// data, so identical (config, seeds) produce byte-identical serializations.
json run_experiment_record(const ExperimentConfig& cfg);

// One WAT run per eta with shared seeds/data plus the uniform baseline.
json sweep_eta_record(const ExperimentConfig& cfg, const std::vector<double>& etas);

// Writes record.json, accuracy.csv, weights.csv, report.md; wall-clock goes
// to run_meta.json so record.json stays reproducible.
void write_run_dir(const json& record, const std::string& dir, double wall_seconds);
void write_sweep_dir(const json& sweep, const std::string& dir, double wall_seconds);

json load_record(const std::string& dir);

// Re-renders the derived files from a stored record without recomputation.
// format is one of csv, json, markdown.
void emit_report(const std::string& run_dir, const std::string& format);

// Re-runs the no-regret auditors on the stored loss/weight histories.
json audit_run(const std::string& run_dir);

std::string render_report_markdown(const json& record);
std::string render_accuracy_csv(const json& record);
std::string render_weights_csv(const json& record);

}  // namespace wat
