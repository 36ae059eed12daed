#include <doctest.h>

#include <algorithm>
#include <random>

#include <nlohmann/json.hpp>

#include "fairdec/fairness.hpp"

using namespace fairdec;

namespace {

Dataset groups_dataset(const std::vector<double>& y,
                       const std::vector<std::string>& a,
                       const std::vector<std::string>& b = {}) {
    Dataset ds;
    ds.rows = y.size();
    ds.columns.push_back({"y", Role::Outcome, Kind::Numeric, y, {}});
    ds.columns.push_back({"A", Role::Sensitive, Kind::Categorical, {}, a});
    if (!b.empty()) {
        ds.columns.push_back({"B", Role::Sensitive, Kind::Categorical, {}, b});
    }
    return ds;
}

}  // namespace

TEST_CASE("confusion counts") {
    SUBCASE("perfect prediction") {
        const std::vector<int> t{1, 0}, p{1, 0};
        const ConfusionMatrix cm = confusion(t, p, 1);
        CHECK(cm.tp == 1);
        CHECK(cm.fn == 0);
        CHECK(cm.fp == 0);
        CHECK(cm.tn == 1);
    }
    SUBCASE("positive label zero") {
        const std::vector<int> t{0, 0, 1, 1}, p{0, 1, 0, 1};
        const ConfusionMatrix cm = confusion(t, p, 0);
        CHECK(cm.tp == 1);  // true 0 predicted 0
        CHECK(cm.fn == 1);  // true 0 predicted 1
        CHECK(cm.fp == 1);  // true 1 predicted 0
        CHECK(cm.tn == 1);
    }
    SUBCASE("all predicted positive empties fn and tn") {
        const std::vector<int> t{1, 0, 1}, p{1, 1, 1};
        const ConfusionMatrix cm = confusion(t, p, 1);
        CHECK(cm.fn == 0);
        CHECK(cm.tn == 0);
        CHECK(cm.tp + cm.fp == 3);
    }
    SUBCASE("length mismatch") {
        CHECK_THROWS_AS(confusion(std::vector<int>{1}, std::vector<int>{1, 0}, 1),
                        ShapeError);
    }
}

TEST_CASE("metric set") {
    SUBCASE("mortality-study counts at positive label 0") {
        ConfusionMatrix cm;
        cm.tp = 106236;
        cm.fn = 699;
        cm.fp = 662;
        cm.tn = 95;
        cm.positive_label = 0;
        const MetricSet m = metric_set(cm);
        CHECK(*m.acceptance_rate * 100 == doctest::Approx(99.26).epsilon(0.01 / 99.26));
        CHECK(*m.tpr * 100 == doctest::Approx(99.35).epsilon(0.01 / 99.35));
        CHECK(*m.fpr * 100 == doctest::Approx(87.45).epsilon(0.01 / 87.45));
    }
    SUBCASE("perfect classifier") {
        ConfusionMatrix cm;
        cm.tp = 10;
        cm.tn = 5;
        const MetricSet m = metric_set(cm);
        CHECK(*m.accuracy == 1.0);
        CHECK(*m.fpr == 0.0);
    }
    SUBCASE("empty positive class leaves tpr undefined") {
        ConfusionMatrix cm;
        cm.fp = 2;
        cm.tn = 3;
        const MetricSet m = metric_set(cm);
        CHECK(!m.tpr.has_value());
        CHECK(m.fpr.has_value());
    }
    SUBCASE("row-order permutation invariance") {
        std::vector<int> t{1, 0, 1, 1, 0, 0, 1}, p{1, 1, 0, 1, 0, 1, 1};
        const MetricSet before = metric_set(confusion(t, p, 1));
        std::mt19937 g(5);
        std::vector<std::size_t> idx(t.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), g);
        std::vector<int> t2, p2;
        for (std::size_t i : idx) {
            t2.push_back(t[i]);
            p2.push_back(p[i]);
        }
        const MetricSet after = metric_set(confusion(t2, p2, 1));
        CHECK(*before.accuracy == *after.accuracy);
        CHECK(*before.acceptance_rate == *after.acceptance_rate);
    }
    SUBCASE("swapping the positive label complements the acceptance rate") {
        std::vector<int> t{1, 0, 1, 1, 0}, p{1, 1, 0, 1, 0};
        const MetricSet a = metric_set(confusion(t, p, 1));
        const MetricSet b = metric_set(confusion(t, p, 0));
        CHECK(*a.acceptance_rate + *b.acceptance_rate == doctest::Approx(1.0));
    }
}

TEST_CASE("disparate impact") {
    CHECK(*disparate_impact(0.5, 0.5) == doctest::Approx(1.0));
    CHECK(*disparate_impact(0.4, 0.8) == doctest::Approx(0.5));
    CHECK(!disparate_impact(0.4, 0.0).has_value());
}

TEST_CASE("imbalance ratio") {
    CHECK(*imbalance_ratio(std::vector<long>{70000, 30000}) ==
          doctest::Approx(2.33).epsilon(0.005));
    CHECK(*imbalance_ratio(std::vector<long>{533167, 3771}) ==
          doctest::Approx(141.39).epsilon(0.0001));
    CHECK(*imbalance_ratio(std::vector<long>{5, 5}) == doctest::Approx(1.0));
    CHECK(!imbalance_ratio(std::vector<long>{3, 0}).has_value());
    CHECK_THROWS_AS(imbalance_ratio(std::vector<long>{3}), ConfigError);
}

TEST_CASE("group report") {
    SUBCASE("identical behavior per group zeroes the differences") {
        // Same confusion pattern inside each group.
        const std::vector<double> y{1, 0, 1, 0, 1, 0, 1, 0};
        const std::vector<std::string> a{"0", "0", "0", "0", "1", "1", "1", "1"};
        const std::vector<int> pred{1, 1, 0, 0, 1, 1, 0, 0};
        const GroupMetricsReport rep =
            group_report(groups_dataset(y, a), pred, {"A"}, 1);
        const MetricSet& diff = rep.differences.at("A");
        CHECK(*diff.acceptance_rate == doctest::Approx(0.0));
        CHECK(*diff.tpr == doctest::Approx(0.0));
        CHECK(*diff.fpr == doctest::Approx(0.0));
    }
    SUBCASE("difference sign is first level minus second") {
        // Group "0": everyone predicted positive. Group "1": nobody.
        const std::vector<double> y{1, 0, 1, 0};
        const std::vector<std::string> a{"0", "0", "1", "1"};
        const std::vector<int> pred{1, 1, 0, 0};
        const GroupMetricsReport rep =
            group_report(groups_dataset(y, a), pred, {"A"}, 1);
        CHECK(*rep.differences.at("A").acceptance_rate == doctest::Approx(1.0));
    }
    SUBCASE("across-group variance is the population variance") {
        // Group 0: AR 0.9 over 10 rows; group 1: AR 0.8 over 10 rows.
        std::vector<double> y;
        std::vector<std::string> a;
        std::vector<int> pred;
        for (int i = 0; i < 10; ++i) {
            y.push_back(1.0);
            a.emplace_back("g0");
            pred.push_back(i < 9 ? 1 : 0);
        }
        for (int i = 0; i < 10; ++i) {
            y.push_back(1.0);
            a.emplace_back("g1");
            pred.push_back(i < 8 ? 1 : 0);
        }
        const GroupMetricsReport rep =
            group_report(groups_dataset(y, a), pred, {"A"}, 1);
        CHECK(*rep.across_group_variance.at("A").acceptance_rate ==
              doctest::Approx(0.0025).epsilon(1e-12));
    }
    SUBCASE("group confusion counts aggregate to the global matrix") {
        std::mt19937 g(17);
        std::vector<double> y;
        std::vector<std::string> a, b;
        std::vector<int> pred;
        for (int i = 0; i < 200; ++i) {
            y.push_back(g() % 2);
            a.emplace_back(g() % 2 ? "1" : "0");
            b.emplace_back(g() % 3 == 0 ? "x" : "z");
            pred.push_back(g() % 2);
        }
        const GroupMetricsReport rep =
            group_report(groups_dataset(y, a, b), pred, {"A", "B"}, 1);
        long tp = 0, fn = 0, fp = 0, tn = 0;
        for (const auto& cell : rep.per_group) {
            if (cell.column != "A") continue;
            tp += cell.cm.tp;
            fn += cell.cm.fn;
            fp += cell.cm.fp;
            tn += cell.cm.tn;
        }
        CHECK(tp == rep.global_cm.tp);
        CHECK(fn == rep.global_cm.fn);
        CHECK(fp == rep.global_cm.fp);
        CHECK(tn == rep.global_cm.tn);
        CHECK(rep.per_subgroup.size() == 4);
        long subgroup_rows = 0;
        for (const auto& cell : rep.per_subgroup) subgroup_rows += cell.count;
        CHECK(subgroup_rows == rep.count);
    }
    SUBCASE("unobserved subgroup combinations appear as empty flagged cells") {
        // Level "x" of B never occurs together with A="1".
        const std::vector<double> y{1, 0, 1, 0};
        const std::vector<std::string> a{"0", "0", "1", "1"};
        const std::vector<std::string> b{"x", "z", "z", "z"};
        const std::vector<int> pred{1, 0, 1, 0};
        const GroupMetricsReport rep =
            group_report(groups_dataset(y, a, b), pred, {"A", "B"}, 1);
        CHECK(rep.per_subgroup.size() == 4);
        bool found_empty = false;
        for (const auto& cell : rep.per_subgroup) {
            if (cell.key[0].second == "1" && cell.key[1].second == "x") {
                found_empty = true;
                CHECK(cell.count == 0);
                CHECK(cell.small);
                CHECK(!cell.metrics.accuracy.has_value());
                CHECK(!cell.metrics.tpr.has_value());
            }
        }
        CHECK(found_empty);
    }
    SUBCASE("small cells carry warnings") {
        const std::vector<double> y{1, 0, 1};
        const std::vector<std::string> a{"0", "0", "1"};
        const std::vector<int> pred{1, 0, 1};
        const GroupMetricsReport rep =
            group_report(groups_dataset(y, a), pred, {"A"}, 1);
        CHECK(!rep.warnings.empty());
        for (const auto& cell : rep.per_group) CHECK(cell.small);
    }
    SUBCASE("numeric binary sensitive columns work like categoricals") {
        Dataset ds;
        ds.rows = 4;
        ds.columns.push_back({"y", Role::Outcome, Kind::Numeric, {1, 0, 1, 0}, {}});
        ds.columns.push_back({"A", Role::Sensitive, Kind::Numeric, {0, 0, 1, 1}, {}});
        const std::vector<int> pred{1, 0, 1, 0};
        const GroupMetricsReport rep = group_report(ds, pred, {"A"}, 1);
        CHECK(rep.per_group.size() == 2);
        CHECK(rep.per_group[0].level == "0");
        CHECK(rep.per_group[1].level == "1");
    }
    SUBCASE("statistical parity holds iff all differences vanish") {
        const std::vector<double> y{1, 0, 1, 0};
        const std::vector<std::string> a{"0", "0", "1", "1"};
        const std::vector<int> equal_pred{1, 0, 1, 0};
        const std::vector<int> biased_pred{1, 1, 0, 0};
        const auto fair = group_report(groups_dataset(y, a), equal_pred, {"A"}, 1);
        const auto unfair = group_report(groups_dataset(y, a), biased_pred, {"A"}, 1);
        CHECK(*fair.differences.at("A").acceptance_rate == 0.0);
        CHECK(*unfair.differences.at("A").acceptance_rate != 0.0);
    }
}

TEST_CASE("positive set reduction") {
    SUBCASE("binary set {1} reproduces the plain report") {
        const std::vector<double> y{1, 0, 1, 0, 1};
        const std::vector<std::string> a{"0", "0", "1", "1", "1"};
        const std::vector<int> pred{1, 1, 0, 0, 1};
        const Dataset ds = groups_dataset(y, a);
        const auto plain = group_report(ds, pred, {"A"}, 1);
        const auto reduced = positive_set_metrics(ds, pred, {1}, {"A"});
        CHECK(*plain.global.accuracy == *reduced.global.accuracy);
        CHECK(*plain.global.acceptance_rate == *reduced.global.acceptance_rate);
        CHECK(*plain.differences.at("A").acceptance_rate ==
              *reduced.differences.at("A").acceptance_rate);
    }
    SUBCASE("multi-class set matches an explicit binarization") {
        const std::vector<double> y{0, 1, 2, 1, 0, 2};
        const std::vector<std::string> a{"0", "0", "0", "1", "1", "1"};
        const std::vector<int> pred{2, 1, 0, 0, 1, 2};
        Dataset ds = groups_dataset(y, a);
        const auto reduced = positive_set_metrics(ds, pred, {1, 2}, {"A"});
        // Oracle: binarize outcomes and predictions by hand, then report.
        std::vector<double> y_bin;
        std::vector<int> pred_bin;
        for (std::size_t i = 0; i < y.size(); ++i) {
            y_bin.push_back(y[i] == 1 || y[i] == 2 ? 1.0 : 0.0);
            pred_bin.push_back(pred[i] == 1 || pred[i] == 2 ? 1 : 0);
        }
        const auto oracle = group_report(groups_dataset(y_bin, a), pred_bin, {"A"}, 1);
        CHECK(*reduced.global.accuracy == *oracle.global.accuracy);
        CHECK(*reduced.global.tpr == *oracle.global.tpr);
        CHECK(*reduced.global.fpr == *oracle.global.fpr);
    }
    SUBCASE("empty positive set zeroes the acceptance rate") {
        const std::vector<double> y{0, 1, 0};
        const std::vector<std::string> a{"0", "1", "0"};
        const std::vector<int> pred{1, 0, 1};
        const auto rep = positive_set_metrics(groups_dataset(y, a), pred, {}, {"A"});
        CHECK(*rep.global.acceptance_rate == 0.0);
    }
}

TEST_CASE("report serialization") {
    const std::vector<double> y{1, 0, 1, 0};
    const std::vector<std::string> a{"0", "0", "1", "1"};
    const std::vector<int> pred{1, 1, 0, 0};
    const GroupMetricsReport rep = group_report(groups_dataset(y, a), pred, {"A"}, 1);

    const nlohmann::json j = rep.to_json();
    CHECK(j.at("global").at("accuracy").is_number());
    CHECK(j.at("groups").at("A").contains("0"));
    CHECK(j.at("differences").at("A").at("acceptance_rate").get<double>() ==
          doctest::Approx(1.0));

    std::ostringstream csv;
    rep.write_csv(csv);
    CHECK(csv.str().find("scope,metric,value") == 0);
    CHECK(csv.str().find("group.A=0,accuracy") != std::string::npos);

    const auto flat = rep.flatten();
    CHECK(!flat.empty());
    // Undefined metrics surface as empty optionals, never NaN.
    for (const auto& [key, value] : flat) {
        if (value) CHECK(std::isfinite(*value));
    }
}
