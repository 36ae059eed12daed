#include "fairdec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

namespace fairdec {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Baseline: return "baseline";
        case Variant::DropSensitive: return "drop_sensitive";
        case Variant::Decorrelate: return "decorrelate";
    }
    return "baseline";
}

Variant variant_from_string(std::string_view s) {
    if (s == "baseline") return Variant::Baseline;
    if (s == "drop_sensitive") return Variant::DropSensitive;
    if (s == "decorrelate") return Variant::Decorrelate;
    throw ConfigError("unknown variant '" + std::string(s) + "'");
}

void ExperimentConfig::validate() const {
    if (!simulation && !input_csv) {
        throw ConfigError("config: need a simulation spec or an input CSV");
    }
    if (simulation && input_csv) {
        throw ConfigError("config: simulation and input CSV are mutually exclusive");
    }
    if (input_csv && !schema) throw ConfigError("config: input CSV needs a schema");
    if (variants.empty()) throw ConfigError("config: variants must be non-empty");
    if (outcome.empty()) throw ConfigError("config: outcome column missing");
    for (const auto& s : sensitive) {
        if (s == outcome || (weight && s == *weight)) {
            throw ConfigError("config: sensitive columns must not overlap outcome/weight");
        }
    }
    if (positive_label != 0 && positive_label != 1) {
        throw ConfigError("config: positive_label must be 0 or 1");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("config: train fraction must lie in (0,1)");
    }
    if (threshold.fixed && threshold.target_rate) {
        throw ConfigError("config: give either a fixed threshold or a target rate");
    }
    if (threshold.fixed && !(*threshold.fixed > 0.0 && *threshold.fixed < 1.0)) {
        throw ConfigError("config: fixed threshold must lie in (0,1)");
    }
    if (threshold.target_rate &&
        !(*threshold.target_rate > 0.0 && *threshold.target_rate < 1.0)) {
        throw ConfigError("config: target rate must lie in (0,1)");
    }
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) try {
    ExperimentConfig c;
    if (j.contains("simulation") && !j.at("simulation").is_null()) {
        c.simulation = SimulationSpec::from_json(j.at("simulation"));
    }
    if (j.contains("input_csv") && !j.at("input_csv").is_null()) {
        c.input_csv = j.at("input_csv").get<std::string>();
    }
    if (j.contains("schema") && !j.at("schema").is_null()) {
        c.schema = Schema::from_json(j.at("schema"));
    }
    c.sensitive = j.at("sensitive").get<std::vector<std::string>>();
    c.outcome = j.at("outcome").get<std::string>();
    if (j.contains("weight") && !j.at("weight").is_null()) {
        c.weight = j.at("weight").get<std::string>();
    }
    for (const auto& v : j.at("variants")) {
        c.variants.push_back(variant_from_string(v.get<std::string>()));
    }
    if (j.contains("threshold")) {
        const auto& t = j.at("threshold");
        if (t.contains("fixed")) c.threshold.fixed = t.at("fixed").get<double>();
        if (t.contains("target_rate")) {
            c.threshold.target_rate = t.at("target_rate").get<double>();
        }
    } else {
        c.threshold.fixed = 0.5;
    }
    c.positive_label = j.value("positive_label", 1);
    if (j.contains("split")) {
        const auto& s = j.at("split");
        c.train_fraction = s.value("train_fraction", 0.8);
        c.split_seed = s.value("seed", std::uint64_t{0});
    }
    c.validate();
    return c;
} catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["simulation"] = simulation ? simulation->to_json() : nlohmann::json(nullptr);
    j["input_csv"] = input_csv ? nlohmann::json(*input_csv) : nlohmann::json(nullptr);
    j["schema"] = schema ? schema->to_json() : nlohmann::json(nullptr);
    j["sensitive"] = sensitive;
    j["outcome"] = outcome;
    j["weight"] = weight ? nlohmann::json(*weight) : nlohmann::json(nullptr);
    nlohmann::json variants_json = nlohmann::json::array();
    for (Variant v : variants) variants_json.push_back(to_string(v));
    j["variants"] = variants_json;
    nlohmann::json t = nlohmann::json::object();
    if (threshold.fixed) t["fixed"] = *threshold.fixed;
    if (threshold.target_rate) t["target_rate"] = *threshold.target_rate;
    j["threshold"] = t;
    j["positive_label"] = positive_label;
    j["split"] = {{"train_fraction", train_fraction}, {"seed", split_seed}};
    return j;
}

namespace {

Eigen::MatrixXd columns_matrix(const Dataset& ds, const std::vector<std::string>& names) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(ds.rows),
                      static_cast<Eigen::Index>(names.size()));
    for (std::size_t c = 0; c < names.size(); ++c) {
        const Column& col = ds.col(names[c]);
        if (col.kind != Kind::Numeric) {
            throw SchemaError("column '" + col.name + "' must be numeric for modeling");
        }
        for (std::size_t r = 0; r < ds.rows; ++r) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = col.num[r];
        }
    }
    return m;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
    }
    return out;
}

}  // namespace

ReplicateResult run_replicate(const ExperimentConfig& config, const Dataset& raw,
                              long replicate_index) {
    ReplicateResult result;
    result.index = replicate_index;

    const Dataset imputed = impute(raw);
    auto [encoded, emap] = one_hot(imputed);
    encoded.check_model_shape();

    if (encoded.col(config.outcome).role != Role::Outcome) {
        throw SchemaError("column '" + config.outcome + "' is not the outcome");
    }

    auto [train_idx, test_idx] =
        split_indices(encoded.rows, config.train_fraction,
                      RandomStream{config.split_seed,
                                   static_cast<std::uint64_t>(replicate_index)});
    if (test_idx.empty()) {
        throw InsufficientData("run_replicate: test split is empty");
    }
    auto [standardized, stats] = standardize(encoded, train_idx);
    result.standardization = stats;

    std::vector<std::string> sensitive_cols;
    std::vector<std::string> feature_cols;
    for (const auto& c : standardized.columns) {
        if (c.role == Role::Sensitive) sensitive_cols.push_back(c.name);
        else if (c.role == Role::Feature) feature_cols.push_back(c.name);
    }
    if (feature_cols.empty()) {
        throw ConfigError("run_replicate: no feature columns to model");
    }

    const Column& outcome_col = standardized.col(config.outcome);
    std::vector<int> y_all(standardized.rows);
    for (std::size_t i = 0; i < standardized.rows; ++i) {
        y_all[i] = static_cast<int>(outcome_col.num[i]);
    }
    std::vector<double> w_all(standardized.rows, 1.0);
    if (config.weight) {
        const Column& wc = standardized.col(*config.weight);
        w_all = wc.num;
    }

    const Eigen::MatrixXd features = columns_matrix(standardized, feature_cols);
    const Eigen::MatrixXd sens = sensitive_cols.empty()
                                     ? Eigen::MatrixXd(standardized.rows, 0)
                                     : columns_matrix(standardized, sensitive_cols);

    auto gather_ints = [&](const std::vector<std::size_t>& idx) {
        std::vector<int> out;
        out.reserve(idx.size());
        for (std::size_t i : idx) out.push_back(y_all[i]);
        return out;
    };
    auto gather_doubles = [&](const std::vector<std::size_t>& idx) {
        std::vector<double> out;
        out.reserve(idx.size());
        for (std::size_t i : idx) out.push_back(w_all[i]);
        return out;
    };
    const std::vector<int> y_train = gather_ints(train_idx);
    const std::vector<int> y_test = gather_ints(test_idx);
    const std::vector<double> w_train = gather_doubles(train_idx);

    const Dataset test_view = take_rows(imputed, test_idx);
    result.y_test = y_test;
    result.sensitive_names = config.sensitive;
    for (const auto& name : config.sensitive) {
        const Column& c = test_view.col(name);
        std::vector<std::string> labels;
        labels.reserve(test_view.rows);
        if (c.kind == Kind::Categorical) {
            labels = c.cat;
        } else {
            for (double v : c.num) {
                labels.push_back(std::to_string(static_cast<long long>(v)));
            }
        }
        result.sensitive_labels.push_back(std::move(labels));
    }

    for (Variant variant : config.variants) {
        VariantResult vr;
        Eigen::MatrixXd design;
        std::vector<std::string> design_names;
        switch (variant) {
            case Variant::Baseline: {
                design.resize(features.rows(), features.cols() + sens.cols());
                design.leftCols(features.cols()) = features;
                design.rightCols(sens.cols()) = sens;
                design_names = feature_cols;
                design_names.insert(design_names.end(), sensitive_cols.begin(),
                                    sensitive_cols.end());
                break;
            }
            case Variant::DropSensitive: {
                design = features;
                design_names = feature_cols;
                break;
            }
            case Variant::Decorrelate: {
                if (sensitive_cols.empty()) {
                    throw ConfigError("decorrelate variant needs sensitive columns");
                }
                // Sensitive block first, then the features to transform.
                Eigen::MatrixXd all(features.rows(), sens.cols() + features.cols());
                all.leftCols(sens.cols()) = sens;
                all.rightCols(features.cols()) = features;
                std::vector<int> sens_idx(sensitive_cols.size());
                for (std::size_t i = 0; i < sensitive_cols.size(); ++i) {
                    sens_idx[i] = static_cast<int>(i);
                }
                const TransitionMatrix A =
                    fit_transition(select_rows(all, train_idx), sens_idx);
                const Eigen::MatrixXd transformed = apply_transition(A, all);
                design = transformed.rightCols(features.cols());
                design_names = feature_cols;
                vr.transition = A;
                break;
            }
        }

        vr.model = fit_weighted_logistic(select_rows(design, train_idx), y_train,
                                         w_train, design_names);
        const Eigen::VectorXd proba_vec =
            predict_proba(vr.model, select_rows(design, test_idx));
        vr.probabilities.assign(proba_vec.data(), proba_vec.data() + proba_vec.size());

        if (config.threshold.target_rate) {
            const ThresholdResult t =
                calibrate_threshold(vr.probabilities, *config.threshold.target_rate);
            vr.threshold = t.threshold;
            vr.realized_rate = t.realized_rate;
        } else {
            vr.threshold = config.threshold.fixed.value_or(0.5);
        }
        vr.predictions.resize(vr.probabilities.size());
        long positive = 0;
        for (std::size_t i = 0; i < vr.probabilities.size(); ++i) {
            vr.predictions[i] = vr.probabilities[i] >= vr.threshold ? 1 : 0;
            positive += vr.predictions[i];
        }
        if (!config.threshold.target_rate) {
            vr.realized_rate =
                static_cast<double>(positive) / static_cast<double>(vr.predictions.size());
        }
        vr.auc = roc_auc(y_test, vr.probabilities);
        vr.report = group_report(test_view, vr.predictions, config.sensitive,
                                 config.positive_label);
        vr.test_rows = test_idx;
        result.variants.emplace(variant, std::move(vr));
    }
    return result;
}

namespace {

Dataset obtain_replicate(const ExperimentConfig& config, long index) {
    if (config.simulation) {
        return sample_dataset(*config.simulation, static_cast<std::uint64_t>(index));
    }
    return read_csv(std::filesystem::path(*config.input_csv), *config.schema);
}

FlatReport variant_flat_report(const VariantResult& vr) {
    FlatReport flat = vr.report.flatten();
    flat.emplace_back("model.auc", vr.auc);
    flat.emplace_back("model.threshold", vr.threshold);
    flat.emplace_back("model.realized_rate", vr.realized_rate);
    flat.emplace_back("model.log_likelihood", vr.model.log_likelihood);
    return flat;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, int jobs) {
    config.validate();
    const long replicates = config.simulation ? config.simulation->replicates : 1;
    RunResult run;
    run.replicates.resize(static_cast<std::size_t>(replicates));

    std::atomic<long> next{0};
    auto worker = [&]() {
        while (true) {
            const long r = next.fetch_add(1);
            if (r >= replicates) return;
            ReplicateResult& slot = run.replicates[static_cast<std::size_t>(r)];
            try {
                const Dataset raw = obtain_replicate(config, r);
                slot = run_replicate(config, raw, r);
            } catch (const ConfigError& e) {
                slot.index = r;
                slot.error = e.what();
                slot.error_kind = ErrorKind::Config;
            } catch (const DataError& e) {
                slot.index = r;
                slot.error = e.what();
                slot.error_kind = ErrorKind::Data;
            } catch (const NumericError& e) {
                slot.index = r;
                slot.error = e.what();
                slot.error_kind = ErrorKind::Numeric;
            } catch (const std::exception& e) {
                slot.index = r;
                slot.error = e.what();
                slot.error_kind = ErrorKind::Other;
            }
        }
    };
    const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(replicates)));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Aggregation happens in replicate order regardless of completion order.
    for (Variant variant : config.variants) {
        std::vector<FlatReport> flats;
        for (const auto& rep : run.replicates) {
            if (rep.error) continue;
            flats.push_back(variant_flat_report(rep.variants.at(variant)));
        }
        if (flats.size() >= 2) {
            run.summary[variant] = replicate_summary(flats);
        } else if (flats.size() == 1) {
            std::vector<std::pair<std::string, IntervalEstimate>> single;
            for (const auto& [key, value] : flats.front()) {
                if (!value) continue;
                IntervalEstimate est;
                est.mean = *value;
                est.n = 1;
                single.emplace_back(key, est);
            }
            run.summary[variant] = std::move(single);
        }
    }
    return run;
}

std::string config_hash(const nlohmann::json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

nlohmann::json RunResult::summary_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [variant, rows] : summary) {
        nlohmann::json v = nlohmann::json::object();
        for (const auto& [key, est] : rows) {
            nlohmann::json e;
            e["mean"] = est.mean;
            e["half_width"] = est.half_width ? nlohmann::json(*est.half_width)
                                             : nlohmann::json(nullptr);
            e["n"] = est.n;
            e["method"] = to_string(est.method);
            e["formatted"] = est.formatted(100.0);
            v[key] = e;
        }
        j[to_string(variant)] = v;
    }
    return j;
}

void RunResult::write_summary_csv(std::ostream& out) const {
    out << "variant,scope,metric,mean,half_width,n,formatted_percent\n";
    for (const auto& [variant, rows] : summary) {
        for (const auto& [key, est] : rows) {
            const auto dot = key.find_last_of('.');
            char mean_buf[48], hw_buf[48];
            std::snprintf(mean_buf, sizeof(mean_buf), "%.17g", est.mean);
            if (est.half_width) {
                std::snprintf(hw_buf, sizeof(hw_buf), "%.17g", *est.half_width);
            } else {
                std::snprintf(hw_buf, sizeof(hw_buf), "NA");
            }
            out << to_string(variant) << ',' << key.substr(0, dot) << ','
                << key.substr(dot + 1) << ',' << mean_buf << ',' << hw_buf << ','
                << est.n << ',' << est.formatted(100.0) << '\n';
        }
    }
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
}

std::string timestamp_utc() {
    char buf[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string replicate_dirname(long index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "replicate_%03ld", index);
    return buf;
}

}  // namespace

void cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    if (!config.simulation) throw ConfigError("simulate: config has no simulation spec");
    const SimulationSpec& spec = *config.simulation;
    spec.validate();
    std::filesystem::create_directories(out_dir);
    for (long r = 0; r < spec.replicates; ++r) {
        const Dataset ds = sample_dataset(spec, static_cast<std::uint64_t>(r));
        char name[40];
        std::snprintf(name, sizeof(name), "replicate_%03ld.csv", r);
        write_csv(ds, out_dir / name);
    }
    nlohmann::json manifest;
    manifest["created_at"] = timestamp_utc();
    manifest["seed"] = spec.seed;
    manifest["replicates"] = spec.replicates;
    manifest["rows"] = spec.rows;
    manifest["spec"] = spec.to_json();
    manifest["spec_hash"] = config_hash(spec.to_json());
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

RunResult cmd_run(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                  int jobs) {
    const RunResult run = run_experiment(config, jobs);
    std::filesystem::create_directories(out_dir);

    for (const auto& rep : run.replicates) {
        const std::filesystem::path rep_dir = out_dir / replicate_dirname(rep.index);
        if (rep.error) continue;
        std::filesystem::create_directories(rep_dir);
        {
            nlohmann::json meta;
            meta["sd_convention"] = "unbiased (n-1)";
            meta["fit"] = "train rows only";
            nlohmann::json cols = nlohmann::json::array();
            for (const auto& s : rep.standardization) {
                cols.push_back({{"name", s.name}, {"mean", s.mean}, {"sd", s.sd}});
            }
            meta["columns"] = cols;
            write_text(rep_dir / "standardization.json", meta.dump(2) + "\n");
        }
        for (const auto& [variant, vr] : rep.variants) {
            const std::filesystem::path vdir = rep_dir / to_string(variant);
            std::filesystem::create_directories(vdir);
            nlohmann::json model_json = vr.model.to_json();
            model_json["threshold"] = vr.threshold;
            model_json["realized_rate"] = vr.realized_rate;
            model_json["auc"] =
                vr.auc ? nlohmann::json(*vr.auc) : nlohmann::json(nullptr);
            write_text(vdir / "model.json", model_json.dump(2) + "\n");
            write_text(vdir / "report.json", vr.report.to_json().dump(2) + "\n");
            {
                std::ofstream out(vdir / "report.csv");
                vr.report.write_csv(out);
            }
            {
                std::ofstream out(vdir / "predictions.csv");
                out << "row,y_true,probability,prediction";
                for (const auto& name : rep.sensitive_names) out << ',' << name;
                out << '\n';
                for (std::size_t i = 0; i < vr.probabilities.size(); ++i) {
                    char buf[48];
                    std::snprintf(buf, sizeof(buf), "%.17g", vr.probabilities[i]);
                    out << vr.test_rows[i] << ',' << rep.y_test[i] << ',' << buf << ','
                        << vr.predictions[i];
                    for (const auto& labels : rep.sensitive_labels) {
                        out << ',' << labels[i];
                    }
                    out << '\n';
                }
            }
            {
                std::ofstream out(vdir / "roc.csv");
                out << "threshold,fpr,tpr\n";
                std::vector<int> y_test(rep.y_test.begin(), rep.y_test.end());
                for (const RocPoint& pt : roc_curve(y_test, vr.probabilities)) {
                    char buf[96];
                    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", pt.threshold,
                                  pt.fpr, pt.tpr);
                    out << buf << '\n';
                }
            }
            if (vr.transition) {
                write_text(vdir / "transition.json", vr.transition->to_json().dump(2) + "\n");
            }
        }
    }

    write_text(out_dir / "summary.json", run.summary_json().dump(2) + "\n");
    {
        std::ofstream out(out_dir / "summary.csv");
        run.write_summary_csv(out);
    }

    nlohmann::json manifest;
    manifest["created_at"] = timestamp_utc();
    manifest["config"] = config.to_json();
    manifest["config_hash"] = config_hash(config.to_json());
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& rep : run.replicates) {
        if (rep.error) {
            failures.push_back({{"replicate", rep.index}, {"error", *rep.error}});
        }
    }
    manifest["failures"] = failures;
    manifest["replicates"] = run.replicates.size();
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return run;
}

void cmd_pseudo(const std::filesystem::path& input, const SurvivalSchema& schema,
                const std::filesystem::path& output) {
    std::ifstream in(input);
    if (!in) throw DataError("cannot open '" + input.string() + "'");
    const std::vector<SurvivalRecord> records = read_survival_csv(in, schema);
    const std::vector<PseudoRow> rows = build_pseudo_table(records);
    std::ofstream out(output);
    if (!out) throw DataError("cannot write '" + output.string() + "'");
    write_pseudo_csv(rows, schema.covariates, out);
}

}  // namespace fairdec
