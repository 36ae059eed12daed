#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fairdec/tabular.hpp"

namespace fairdec {

struct ConfusionMatrix {
    long tp = 0;
    long fn = 0;
    long fp = 0;
    long tn = 0;
    int positive_label = 1;

    long total() const { return tp + fn + fp + tn; }
};

// Ratios derived from a confusion matrix. A metric whose denominator is
// zero is Undefined and carried as an empty optional, never as NaN.
struct MetricSet {
    std::optional<double> accuracy;
    std::optional<double> acceptance_rate;
    std::optional<double> tpr;
    std::optional<double> fpr;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred,
                          int positive_label);

MetricSet metric_set(const ConfusionMatrix& cm);

// Ratio of favorable-outcome probabilities p0/p1 between two groups.
// Undefined when p1 = 0. Note the usual estimation caveat: the estimator of
// a ratio is not the ratio of estimators.
std::optional<double> disparate_impact(double p0, double p1);

// Majority class count over minority class count; Undefined when the
// minority count is zero.
std::optional<double> imbalance_ratio(std::span<const long> counts);

struct GroupCell {
    std::string column;
    std::string level;
    long count = 0;
    ConfusionMatrix cm;
    MetricSet metrics;
    bool small = false;  // fewer than kSmallCellRows scored rows
};

struct SubgroupCell {
    // One (column, level) pair per sensitive column, in report column order.
    std::vector<std::pair<std::string, std::string>> key;
    long count = 0;
    MetricSet metrics;
    bool small = false;
};

inline constexpr long kSmallCellRows = 30;

// Metrics globally, per sensitive group, and for the full cross product of
// sensitive columns, with pairwise gaps (first-listed level minus second)
// for binary columns and the across-group population variance per metric.
struct GroupMetricsReport {
    int positive_label = 1;
    long count = 0;
    ConfusionMatrix global_cm;
    MetricSet global;
    std::vector<GroupCell> per_group;
    std::vector<SubgroupCell> per_subgroup;
    std::map<std::string, MetricSet> differences;
    std::map<std::string, MetricSet> across_group_variance;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
    // Flat form: one row per scope x metric.
    void write_csv(std::ostream& out) const;
    std::vector<std::pair<std::string, std::optional<double>>> flatten() const;
};

GroupMetricsReport group_report(const Dataset& ds, std::span<const int> y_pred,
                                const std::vector<std::string>& sensitive_columns,
                                int positive_label);

// Multi-class reduction: outcomes and predictions are mapped through the
// positive set, then scored by the binary pipeline with positive label 1.
GroupMetricsReport positive_set_metrics(const Dataset& ds,
                                        std::span<const int> y_pred,
                                        const std::set<int>& positive_set,
                                        const std::vector<std::string>& sensitive_columns);

}  // namespace fairdec
