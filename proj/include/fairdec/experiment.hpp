#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fairdec/decorrelate.hpp"
#include "fairdec/fairness.hpp"
#include "fairdec/glm.hpp"
#include "fairdec/simulate.hpp"
#include "fairdec/stats.hpp"
#include "fairdec/survival.hpp"
#include "fairdec/tabular.hpp"

namespace fairdec {

enum class Variant { Baseline, DropSensitive, Decorrelate };

std::string to_string(Variant v);
Variant variant_from_string(std::string_view s);

struct ThresholdSpec {
    std::optional<double> fixed;        // classification rule p >= fixed -> 1
    std::optional<double> target_rate;  // calibrate on scored probabilities
};

struct ExperimentConfig {
    std::optional<SimulationSpec> simulation;
    std::optional<std::string> input_csv;
    std::optional<Schema> schema;

    std::vector<std::string> sensitive;
    std::string outcome;
    std::optional<std::string> weight;
    std::vector<Variant> variants;
    ThresholdSpec threshold;
    int positive_label = 1;
    double train_fraction = 0.8;
    std::uint64_t split_seed = 0;

    void validate() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct VariantResult {
    FittedModel model;
    double threshold = 0.5;
    double realized_rate = 0.0;
    std::optional<double> auc;
    GroupMetricsReport report;
    std::vector<std::size_t> test_rows;   // original row indices of the scored set
    std::vector<double> probabilities;    // per scored row
    std::vector<int> predictions;         // per scored row
    std::optional<TransitionMatrix> transition;
};

enum class ErrorKind { None, Config, Data, Numeric, Other };

struct ReplicateResult {
    long index = 0;
    std::optional<std::string> error;  // failure recorded, run continues
    ErrorKind error_kind = ErrorKind::None;
    std::vector<int> y_test;           // outcome over the scored rows
    std::vector<std::string> sensitive_names;
    std::vector<std::vector<std::string>> sensitive_labels;  // per column
    std::vector<ColumnStats> standardization;  // train-row mean/sd per feature
    std::map<Variant, VariantResult> variants;
};

struct RunResult {
    std::vector<ReplicateResult> replicates;
    // Per variant: interval per flattened report key, plus accuracy/auc rows.
    std::map<Variant, std::vector<std::pair<std::string, IntervalEstimate>>> summary;
    nlohmann::json summary_json() const;
    void write_summary_csv(std::ostream& out) const;
};

// Evaluates every configured variant on one dataset replicate.
ReplicateResult run_replicate(const ExperimentConfig& config, const Dataset& raw,
                              long replicate_index);

// Full experiment: obtain each replicate (simulated or from CSV), evaluate
// the variants in a worker pool, aggregate across replicates.
RunResult run_experiment(const ExperimentConfig& config, int jobs = 1);

// Stable 64-bit FNV-1a hash of the canonical config JSON, for manifests.
std::string config_hash(const nlohmann::json& j);

// `simulate` subcommand: replicate CSVs plus a manifest.
void cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir);

// `run` subcommand: per-replicate model/prediction/report files plus an
// across-replicate summary and manifest.
RunResult cmd_run(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                  int jobs = 1);

// `pseudo` subcommand: survival CSV in, pseudo-table CSV out.
void cmd_pseudo(const std::filesystem::path& input, const SurvivalSchema& schema,
                const std::filesystem::path& output);

}  // namespace fairdec
