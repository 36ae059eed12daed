#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "fairdec/experiment.hpp"

namespace {

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fairdec::ConfigError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw fairdec::ConfigError(path + ": " + e.what());
    }
}

fairdec::ExperimentConfig load_config(const std::string& path,
                                      const std::optional<std::uint64_t>& seed) {
    fairdec::ExperimentConfig config = fairdec::ExperimentConfig::from_json(load_json(path));
    if (seed) {
        if (config.simulation) config.simulation->seed = *seed;
        config.split_seed = *seed;
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fairness-aware preprocessing and evaluation pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    int jobs = 1;

    auto* sim = app.add_subcommand("simulate", "Generate replicate CSVs from a spec");
    sim->add_option("--config", config_path, "experiment config JSON")->required();
    sim->add_option("--out", out_dir, "output directory")->required();
    sim->add_option("--seed", seed, "override the configured seed");
    sim->add_option("--jobs", jobs, "worker threads");

    auto* run = app.add_subcommand("run", "Fit the model variants and report fairness");
    run->add_option("--config", config_path, "experiment config JSON")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--seed", seed, "override the configured seed");
    run->add_option("--jobs", jobs, "worker threads");

    std::string input_path;
    std::string schema_path;
    auto* pseudo = app.add_subcommand("pseudo", "Expand survival records into a pseudo table");
    pseudo->add_option("--input", input_path, "survival CSV")->required();
    pseudo->add_option("--schema", schema_path, "survival schema JSON")->required();
    pseudo->add_option("--out", out_dir, "output CSV path")->required();

    std::vector<std::string> sensitive;
    std::string outcome_col = "y_true";
    std::string pred_col = "prediction";
    int positive_label = 1;
    auto* metrics = app.add_subcommand("metrics", "Report fairness on an existing predictions CSV");
    metrics->add_option("--input", input_path, "predictions CSV")->required();
    metrics->add_option("--sensitive", sensitive, "sensitive column names")
        ->required()
        ->delimiter(',');
    metrics->add_option("--outcome", outcome_col, "true outcome column");
    metrics->add_option("--pred", pred_col, "predicted outcome column");
    metrics->add_option("--positive", positive_label, "positive label (0 or 1)");
    metrics->add_option("--out", out_dir, "output directory")->required();

    auto* decorr = app.add_subcommand("decorrelate", "Emit transformed CSV and transition JSON");
    decorr->add_option("--input", input_path, "input CSV")->required();
    decorr->add_option("--schema", schema_path, "schema JSON")->required();
    decorr->add_option("--out", out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            fairdec::cmd_simulate(load_config(config_path, seed), out_dir);
        } else if (run->parsed()) {
            const fairdec::RunResult result =
                fairdec::cmd_run(load_config(config_path, seed), out_dir, jobs);
            long failures = 0;
            for (const auto& rep : result.replicates) failures += rep.error.has_value();
            if (failures > 0) {
                std::cerr << failures << " replicate(s) failed; see manifest.json\n";
                // Partial failures are recorded and the run continues; a run
                // with no surviving replicate exits with the failure's class.
                if (failures == static_cast<long>(result.replicates.size())) {
                    std::cerr << "all replicates failed: "
                              << *result.replicates.front().error << "\n";
                    switch (result.replicates.front().error_kind) {
                        case fairdec::ErrorKind::Config: return 2;
                        case fairdec::ErrorKind::Numeric: return 4;
                        default: return 3;
                    }
                }
            }
        } else if (pseudo->parsed()) {
            const auto schema =
                fairdec::SurvivalSchema::from_json(load_json(schema_path));
            fairdec::cmd_pseudo(input_path, schema, out_dir);
        } else if (metrics->parsed()) {
            fairdec::Schema schema;
            schema.fields.push_back({outcome_col, fairdec::Role::Outcome,
                                     fairdec::Kind::Numeric});
            schema.fields.push_back({pred_col, fairdec::Role::Feature,
                                     fairdec::Kind::Numeric});
            for (const auto& s : sensitive) {
                schema.fields.push_back({s, fairdec::Role::Sensitive,
                                         fairdec::Kind::Categorical});
            }
            const fairdec::Dataset ds = fairdec::read_csv(
                std::filesystem::path(input_path), schema);
            std::vector<int> y_pred(ds.rows);
            const auto& pred = ds.col(pred_col).num;
            for (std::size_t i = 0; i < ds.rows; ++i) {
                y_pred[i] = static_cast<int>(pred[i]);
            }
            const fairdec::GroupMetricsReport report =
                fairdec::group_report(ds, y_pred, sensitive, positive_label);
            std::filesystem::create_directories(out_dir);
            std::ofstream json_out(std::filesystem::path(out_dir) / "report.json");
            json_out << report.to_json().dump(2) << "\n";
            std::ofstream csv_out(std::filesystem::path(out_dir) / "report.csv");
            report.write_csv(csv_out);
        } else if (decorr->parsed()) {
            const auto schema = fairdec::Schema::from_json(load_json(schema_path));
            fairdec::Dataset ds = fairdec::read_csv(
                std::filesystem::path(input_path), schema);
            ds = fairdec::impute(ds);
            auto [encoded, emap] = fairdec::one_hot(ds);
            std::vector<std::string> sens_names;
            std::vector<std::string> feat_names;
            for (const auto& c : encoded.columns) {
                if (c.role == fairdec::Role::Sensitive) sens_names.push_back(c.name);
                else if (c.role == fairdec::Role::Feature) feat_names.push_back(c.name);
            }
            if (sens_names.empty()) {
                throw fairdec::ConfigError("decorrelate: schema marks no sensitive columns");
            }
            if (feat_names.empty()) {
                throw fairdec::ConfigError("decorrelate: schema marks no feature columns");
            }
            Eigen::MatrixXd all(static_cast<Eigen::Index>(encoded.rows),
                                static_cast<Eigen::Index>(sens_names.size() + feat_names.size()));
            std::vector<int> sens_idx;
            {
                Eigen::Index c = 0;
                for (const auto& name : sens_names) {
                    const auto& col = encoded.col(name).num;
                    for (std::size_t r = 0; r < encoded.rows; ++r) {
                        all(static_cast<Eigen::Index>(r), c) = col[r];
                    }
                    sens_idx.push_back(static_cast<int>(c));
                    ++c;
                }
                for (const auto& name : feat_names) {
                    const auto& col = encoded.col(name).num;
                    for (std::size_t r = 0; r < encoded.rows; ++r) {
                        all(static_cast<Eigen::Index>(r), c) = col[r];
                    }
                    ++c;
                }
            }
            const fairdec::TransitionMatrix A = fairdec::fit_transition(all, sens_idx);
            const Eigen::MatrixXd transformed = fairdec::apply_transition(A, all);
            {
                Eigen::Index c = static_cast<Eigen::Index>(sens_names.size());
                for (const auto& name : feat_names) {
                    auto& col = encoded.col(name).num;
                    for (std::size_t r = 0; r < encoded.rows; ++r) {
                        col[r] = transformed(static_cast<Eigen::Index>(r), c);
                    }
                    ++c;
                }
            }
            std::filesystem::create_directories(out_dir);
            fairdec::write_csv(encoded, std::filesystem::path(out_dir) / "transformed.csv");
            std::ofstream json_out(std::filesystem::path(out_dir) / "transition.json");
            json_out << A.to_json().dump(2) << "\n";
        }
    } catch (const fairdec::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const fairdec::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const fairdec::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
