#include "fairdec/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

namespace fairdec {

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred,
                          int positive_label) {
    if (y_true.size() != y_pred.size()) {
        throw ShapeError("confusion: y_true and y_pred lengths differ");
    }
    ConfusionMatrix cm;
    cm.positive_label = positive_label;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const bool actual_pos = y_true[i] == positive_label;
        const bool pred_pos = y_pred[i] == positive_label;
        if (actual_pos && pred_pos) ++cm.tp;
        else if (actual_pos && !pred_pos) ++cm.fn;
        else if (!actual_pos && pred_pos) ++cm.fp;
        else ++cm.tn;
    }
    return cm;
}

namespace {

std::optional<double> ratio(long num, long den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricSet metric_set(const ConfusionMatrix& cm) {
    MetricSet m;
    const long total = cm.total();
    m.accuracy = ratio(cm.tp + cm.tn, total);
    m.acceptance_rate = ratio(cm.tp + cm.fp, total);
    m.tpr = ratio(cm.tp, cm.tp + cm.fn);
    m.fpr = ratio(cm.fp, cm.fp + cm.tn);
    return m;
}

std::optional<double> disparate_impact(double p0, double p1) {
    if (p1 == 0.0) return std::nullopt;
    return p0 / p1;
}

std::optional<double> imbalance_ratio(std::span<const long> counts) {
    if (counts.size() < 2) {
        throw ConfigError("imbalance_ratio: need at least two classes");
    }
    long majority = counts[0];
    long minority = counts[0];
    for (long c : counts) {
        majority = std::max(majority, c);
        minority = std::min(minority, c);
    }
    if (minority == 0) return std::nullopt;
    return static_cast<double>(majority) / static_cast<double>(minority);
}

namespace {

// Group labels of a sensitive column; numeric columns must hold integral
// values (binary dummies in practice).
std::vector<std::string> group_labels(const Column& c) {
    std::vector<std::string> out;
    out.reserve(c.size());
    if (c.kind == Kind::Categorical) {
        out = c.cat;
    } else {
        for (double v : c.num) {
            if (std::isnan(v) || v != std::floor(v)) {
                throw ConfigError("group column '" + c.name +
                                  "' must be categorical or hold integral codes");
            }
            out.push_back(std::to_string(static_cast<long long>(v)));
        }
    }
    return out;
}

struct MetricAccessor {
    const char* name;
    std::optional<double> MetricSet::* field;
};

constexpr MetricAccessor kMetricFields[] = {
    {"accuracy", &MetricSet::accuracy},
    {"acceptance_rate", &MetricSet::acceptance_rate},
    {"tpr", &MetricSet::tpr},
    {"fpr", &MetricSet::fpr},
};

nlohmann::json metric_set_json(const MetricSet& m) {
    nlohmann::json j;
    for (const auto& f : kMetricFields) {
        const auto& v = m.*(f.field);
        if (v) j[f.name] = *v;
        else j[f.name] = nullptr;
    }
    return j;
}

}  // namespace

GroupMetricsReport group_report(const Dataset& ds, std::span<const int> y_pred,
                                const std::vector<std::string>& sensitive_columns,
                                int positive_label) {
    if (sensitive_columns.empty()) {
        throw ConfigError("group_report: no sensitive columns given");
    }
    if (y_pred.size() != ds.rows) {
        throw ShapeError("group_report: prediction length differs from row count");
    }
    const Column* outcome = nullptr;
    for (const auto& c : ds.columns) {
        if (c.role == Role::Outcome) {
            if (outcome) throw SchemaError("group_report: several outcome columns");
            outcome = &c;
        }
    }
    if (!outcome) throw SchemaError("group_report: no outcome column");
    std::vector<int> y_true(ds.rows);
    for (std::size_t i = 0; i < ds.rows; ++i) {
        const double v = outcome->num.at(i);
        y_true[i] = static_cast<int>(v);
    }

    GroupMetricsReport rep;
    rep.positive_label = positive_label;
    rep.count = static_cast<long>(ds.rows);
    rep.global_cm = confusion(y_true, y_pred, positive_label);
    rep.global = metric_set(rep.global_cm);

    std::vector<std::vector<std::string>> labels;
    labels.reserve(sensitive_columns.size());
    for (const auto& name : sensitive_columns) labels.push_back(group_labels(ds.col(name)));

    // Per-column groups.
    for (std::size_t s = 0; s < sensitive_columns.size(); ++s) {
        std::vector<std::string> levels = labels[s];
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
        std::vector<GroupCell> cells;
        for (const auto& level : levels) {
            std::vector<int> gt, gp;
            for (std::size_t i = 0; i < ds.rows; ++i) {
                if (labels[s][i] == level) {
                    gt.push_back(y_true[i]);
                    gp.push_back(y_pred[i]);
                }
            }
            GroupCell cell;
            cell.column = sensitive_columns[s];
            cell.level = level;
            cell.count = static_cast<long>(gt.size());
            cell.cm = confusion(gt, gp, positive_label);
            cell.metrics = metric_set(cell.cm);
            cell.small = cell.count < kSmallCellRows;
            if (cell.small) {
                rep.warnings.push_back("group " + cell.column + "=" + cell.level +
                                       " has fewer than " +
                                       std::to_string(kSmallCellRows) + " rows");
            }
            cells.push_back(std::move(cell));
        }
        // Pairwise gap for binary columns: first-listed level minus second.
        if (cells.size() == 2) {
            MetricSet diff;
            for (const auto& f : kMetricFields) {
                const auto& a = cells[0].metrics.*(f.field);
                const auto& b = cells[1].metrics.*(f.field);
                if (a && b) diff.*(f.field) = *a - *b;
            }
            rep.differences[sensitive_columns[s]] = diff;
        }
        // Across-group population variance per metric, over defined values.
        MetricSet var;
        for (const auto& f : kMetricFields) {
            std::vector<double> vals;
            for (const auto& cell : cells) {
                const auto& v = cell.metrics.*(f.field);
                if (v) vals.push_back(*v);
            }
            if (!vals.empty()) {
                double mean = 0.0;
                for (double v : vals) mean += v;
                mean /= static_cast<double>(vals.size());
                double ss = 0.0;
                for (double v : vals) ss += (v - mean) * (v - mean);
                var.*(f.field) = ss / static_cast<double>(vals.size());
            }
        }
        rep.across_group_variance[sensitive_columns[s]] = var;
        for (auto& cell : cells) rep.per_group.push_back(std::move(cell));
    }

    // Full cross product of the observed levels, empty cells included.
    if (sensitive_columns.size() > 1) {
        std::map<std::vector<std::string>, std::vector<std::size_t>> rows_by_key;
        for (std::size_t i = 0; i < ds.rows; ++i) {
            std::vector<std::string> key;
            key.reserve(sensitive_columns.size());
            for (std::size_t s = 0; s < sensitive_columns.size(); ++s) {
                key.push_back(labels[s][i]);
            }
            rows_by_key[std::move(key)].push_back(i);
        }
        std::vector<std::vector<std::string>> level_sets;
        for (std::size_t s = 0; s < sensitive_columns.size(); ++s) {
            std::vector<std::string> levels = labels[s];
            std::sort(levels.begin(), levels.end());
            levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
            level_sets.push_back(std::move(levels));
        }
        std::vector<std::size_t> cursor(sensitive_columns.size(), 0);
        while (true) {
            std::vector<std::string> key;
            for (std::size_t s = 0; s < cursor.size(); ++s) {
                key.push_back(level_sets[s][cursor[s]]);
            }
            static const std::vector<std::size_t> kNoRows;
            const auto it = rows_by_key.find(key);
            const std::vector<std::size_t>& idx =
                it == rows_by_key.end() ? kNoRows : it->second;
            std::vector<int> gt, gp;
            for (std::size_t i : idx) {
                gt.push_back(y_true[i]);
                gp.push_back(y_pred[i]);
            }
            SubgroupCell cell;
            for (std::size_t s = 0; s < sensitive_columns.size(); ++s) {
                cell.key.emplace_back(sensitive_columns[s], key[s]);
            }
            cell.count = static_cast<long>(idx.size());
            cell.metrics = metric_set(confusion(gt, gp, positive_label));
            cell.small = cell.count < kSmallCellRows;
            if (cell.small) {
                std::string label;
                for (const auto& [c, l] : cell.key) {
                    if (!label.empty()) label += ",";
                    label += c + "=" + l;
                }
                rep.warnings.push_back("subgroup " + label + " has fewer than " +
                                       std::to_string(kSmallCellRows) + " rows");
            }
            rep.per_subgroup.push_back(std::move(cell));
            // Advance the cross-product cursor.
            std::size_t s = 0;
            while (s < cursor.size() && ++cursor[s] == level_sets[s].size()) {
                cursor[s] = 0;
                ++s;
            }
            if (s == cursor.size()) break;
        }
    }
    return rep;
}

GroupMetricsReport positive_set_metrics(const Dataset& ds,
                                        std::span<const int> y_pred,
                                        const std::set<int>& positive_set,
                                        const std::vector<std::string>& sensitive_columns) {
    if (y_pred.size() != ds.rows) {
        throw ShapeError("positive_set_metrics: prediction length differs from row count");
    }
    Dataset mapped = ds;
    for (auto& c : mapped.columns) {
        if (c.role != Role::Outcome) continue;
        for (double& v : c.num) {
            v = positive_set.count(static_cast<int>(v)) ? 1.0 : 0.0;
        }
    }
    std::vector<int> pred(y_pred.size());
    for (std::size_t i = 0; i < y_pred.size(); ++i) {
        pred[i] = positive_set.count(y_pred[i]) ? 1 : 0;
    }
    return group_report(mapped, pred, sensitive_columns, 1);
}

namespace {

std::string subgroup_label(const SubgroupCell& cell) {
    std::string label;
    for (const auto& [c, l] : cell.key) {
        if (!label.empty()) label += "|";
        label += c + "=" + l;
    }
    return label;
}

}  // namespace

nlohmann::json GroupMetricsReport::to_json() const {
    nlohmann::json j;
    j["positive_label"] = positive_label;
    j["count"] = count;
    j["confusion"] = {{"tp", global_cm.tp}, {"fn", global_cm.fn},
                      {"fp", global_cm.fp}, {"tn", global_cm.tn}};
    j["global"] = metric_set_json(global);
    j["groups"] = nlohmann::json::object();
    for (const auto& cell : per_group) {
        nlohmann::json g = metric_set_json(cell.metrics);
        g["count"] = cell.count;
        g["small"] = cell.small;
        j["groups"][cell.column][cell.level] = g;
    }
    j["differences"] = nlohmann::json::object();
    for (const auto& [colname, diff] : differences) {
        j["differences"][colname] = metric_set_json(diff);
    }
    j["variance"] = nlohmann::json::object();
    for (const auto& [colname, var] : across_group_variance) {
        j["variance"][colname] = metric_set_json(var);
    }
    j["subgroups"] = nlohmann::json::object();
    for (const auto& cell : per_subgroup) {
        nlohmann::json g = metric_set_json(cell.metrics);
        g["count"] = cell.count;
        g["small"] = cell.small;
        j["subgroups"][subgroup_label(cell)] = g;
    }
    j["difference_sign"] = "first listed level minus second";
    j["warnings"] = warnings;
    return j;
}

std::vector<std::pair<std::string, std::optional<double>>>
GroupMetricsReport::flatten() const {
    std::vector<std::pair<std::string, std::optional<double>>> out;
    for (const auto& f : kMetricFields) {
        out.emplace_back(std::string("global.") + f.name, global.*(f.field));
    }
    for (const auto& cell : per_group) {
        for (const auto& f : kMetricFields) {
            out.emplace_back("group." + cell.column + "=" + cell.level + "." + f.name,
                             cell.metrics.*(f.field));
        }
    }
    for (const auto& [colname, diff] : differences) {
        for (const auto& f : kMetricFields) {
            out.emplace_back("difference." + colname + "." + f.name, diff.*(f.field));
        }
    }
    for (const auto& [colname, var] : across_group_variance) {
        for (const auto& f : kMetricFields) {
            out.emplace_back("variance." + colname + "." + f.name, var.*(f.field));
        }
    }
    for (const auto& cell : per_subgroup) {
        for (const auto& f : kMetricFields) {
            out.emplace_back("subgroup." + subgroup_label(cell) + "." + f.name,
                             cell.metrics.*(f.field));
        }
    }
    return out;
}

void GroupMetricsReport::write_csv(std::ostream& out) const {
    out << "scope,metric,value\n";
    for (const auto& [key, value] : flatten()) {
        const auto dot = key.find_last_of('.');
        out << key.substr(0, dot) << ',' << key.substr(dot + 1) << ',';
        if (value) {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "%.17g", *value);
            out << buf;
        } else {
            out << "NA";
        }
        out << '\n';
    }
}

}  // namespace fairdec
