#include "fairdec/survival.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

namespace fairdec {

double initial_exposure(double survival_years, int interval, int max_duration,
                        bool died) {
    if (interval < 1 || interval > max_duration) {
        throw ConfigError("initial_exposure: interval out of range");
    }
    if (interval < max_duration) return 1.0;
    if (died) return 1.0;
    const double e = survival_years - static_cast<double>(interval - 1);
    if (!(e > 0.0)) {
        throw InternalConsistency("initial_exposure: censored row with no time at risk");
    }
    return std::min(e, 1.0);
}

double balducci_rate(long deaths, long alive_at_start,
                     std::span<const double> withdrawal_fractions) {
    if (alive_at_start <= 0) throw ConfigError("balducci_rate: cohort must be non-empty");
    if (deaths < 0) throw ConfigError("balducci_rate: negative death count");
    double exposure = static_cast<double>(alive_at_start) -
                      static_cast<double>(withdrawal_fractions.size());
    for (double c : withdrawal_fractions) {
        if (!(c > 0.0 && c < 1.0)) {
            throw ConfigError("balducci_rate: withdrawal fractions must lie in (0,1)");
        }
        exposure += c;
    }
    if (!(exposure > 0.0)) {
        throw DegenerateExposure("balducci_rate: total exposure is not positive");
    }
    return static_cast<double>(deaths) / exposure;
}

std::optional<double> five_year_rate(std::span<const SurvivalRecord> records,
                                     CauseRule rule) {
    if (records.empty()) return std::nullopt;
    const Metastatic cls = records.front().metastatic;
    double deaths = 0.0;
    double exposure = 0.0;
    for (const auto& r : records) {
        if (r.metastatic != cls) {
            throw DataError("five_year_rate: cohort mixes metastatic classes");
        }
        const double years = static_cast<double>(r.survival_months) / 12.0;
        const int death = rule == CauseRule::CauseSpecific ? r.death_cause_matches
                                                           : r.death_flag;
        if (death == 1 && years < 5.0) deaths += 1.0;
        if (r.death_flag == 1 || years >= 5.0) {
            exposure += 1.0;
        } else {
            exposure += years / 5.0;
        }
    }
    if (!(exposure > 0.0)) {
        throw DegenerateExposure("five_year_rate: cohort carries no exposure");
    }
    return deaths / exposure;
}

std::vector<PseudoRow> build_pseudo_table(std::span<const SurvivalRecord> records) {
    // Alive records with zero observed months carry a token exposure of half
    // a month so the row neither vanishes nor dominates.
    constexpr double kZeroMonthExposure = 1.0 / 24.0;
    std::vector<PseudoRow> out;
    for (const auto& rec : records) {
        if (rec.survival_months < 0) {
            throw DataError("build_pseudo_table: negative survival_months for id '" +
                            rec.id + "'");
        }
        if (rec.death_cause_matches > rec.death_flag) {
            throw DataError("build_pseudo_table: cause-specific death without death "
                            "flag for id '" + rec.id + "'");
        }
        if (rec.survival_months == 0) {
            PseudoRow row;
            row.id = rec.id;
            row.interval = 1;
            row.duration = 0;
            row.age = rec.age_at_diagnosis;
            row.year = rec.year_of_diagnosis;
            row.death_in_interval = rec.death_cause_matches;
            row.exposure = rec.death_flag == 1 ? 1.0 : kZeroMonthExposure;
            row.covariates = rec.covariates;
            out.push_back(std::move(row));
            continue;
        }
        const double years = static_cast<double>(rec.survival_months) / 12.0;
        const int max_duration = static_cast<int>((rec.survival_months + 11) / 12);
        for (int j = 1; j <= max_duration; ++j) {
            PseudoRow row;
            row.id = rec.id;
            row.interval = j;
            row.duration = j - 1;
            row.age = rec.age_at_diagnosis + (j - 1);
            row.year = rec.year_of_diagnosis + (j - 1);
            row.death_in_interval =
                (rec.death_cause_matches == 1 && j == max_duration) ? 1 : 0;
            row.exposure = initial_exposure(years, j, max_duration,
                                            row.death_in_interval == 1);
            row.covariates = rec.covariates;
            out.push_back(std::move(row));
        }
    }
    return out;
}

SurvivalSchema SurvivalSchema::from_json(const nlohmann::json& j) try {
    SurvivalSchema s;
    s.id = j.value("id", std::string("id"));
    s.age_dx = j.at("age_dx").get<std::string>();
    s.year_dx = j.at("year_dx").get<std::string>();
    s.survival_months = j.at("survival_months").get<std::string>();
    s.death_cause = j.value("death_cause", std::string());
    s.death_flag = j.value("death_flag", std::string());
    if (s.death_cause.empty() && s.death_flag.empty()) {
        throw ConfigError("survival schema: need death_cause or death_flag");
    }
    if (s.death_cause.empty()) s.death_cause = s.death_flag;
    if (s.death_flag.empty()) s.death_flag = s.death_cause;
    s.metastatic = j.value("metastatic", std::string());
    if (j.contains("covariates")) {
        s.covariates = j.at("covariates").get<std::vector<std::string>>();
    }
    return s;
} catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("survival schema: ") + e.what());
}

namespace {

long parse_integer_cell(const std::string& cell, std::size_t row, const char* what) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw FormatError(row, std::string("cannot parse ") + what + " from '" + cell + "'");
    }
}

}  // namespace

std::vector<SurvivalRecord> read_survival_csv(std::istream& in,
                                              const SurvivalSchema& schema) {
    Schema tab_schema;
    tab_schema.fields.push_back({schema.id, Role::Feature, Kind::Categorical});
    tab_schema.fields.push_back({schema.age_dx, Role::Feature, Kind::Categorical});
    tab_schema.fields.push_back({schema.year_dx, Role::Feature, Kind::Categorical});
    tab_schema.fields.push_back({schema.survival_months, Role::Feature, Kind::Categorical});
    tab_schema.fields.push_back({schema.death_cause, Role::Feature, Kind::Categorical});
    if (schema.death_flag != schema.death_cause) {
        tab_schema.fields.push_back({schema.death_flag, Role::Feature, Kind::Categorical});
    }
    if (!schema.metastatic.empty()) {
        tab_schema.fields.push_back({schema.metastatic, Role::Feature, Kind::Categorical});
    }
    for (const auto& c : schema.covariates) {
        tab_schema.fields.push_back({c, Role::Feature, Kind::Categorical});
    }
    const Dataset ds = read_csv(in, tab_schema);

    std::vector<SurvivalRecord> out;
    out.reserve(ds.rows);
    for (std::size_t i = 0; i < ds.rows; ++i) {
        const std::size_t row_no = i + 1;
        SurvivalRecord r;
        r.id = ds.col(schema.id).cat[i];
        r.age_at_diagnosis = static_cast<int>(
            parse_integer_cell(ds.col(schema.age_dx).cat[i], row_no, "age"));
        r.year_of_diagnosis = static_cast<int>(
            parse_integer_cell(ds.col(schema.year_dx).cat[i], row_no, "year"));
        r.survival_months =
            parse_integer_cell(ds.col(schema.survival_months).cat[i], row_no,
                               "survival months");
        if (r.survival_months < 0) {
            throw FormatError(row_no, "negative survival months");
        }
        r.death_cause_matches = static_cast<int>(
            parse_integer_cell(ds.col(schema.death_cause).cat[i], row_no, "death flag"));
        r.death_flag = static_cast<int>(
            parse_integer_cell(ds.col(schema.death_flag).cat[i], row_no, "death flag"));
        if (!schema.metastatic.empty()) {
            const std::string& m = ds.col(schema.metastatic).cat[i];
            if (m == "M0") r.metastatic = Metastatic::M0;
            else if (m == "M1") r.metastatic = Metastatic::M1;
            else throw FormatError(row_no, "metastatic state must be M0 or M1");
        }
        for (const auto& c : schema.covariates) {
            r.covariates.push_back(ds.col(c).cat[i]);
        }
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

// Two-decimal formatting with trailing zeros trimmed: 1 -> "1",
// 0.0833... -> "0.08".
std::string format_exposure(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    std::string s = buf;
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

}  // namespace

void write_pseudo_csv(std::span<const PseudoRow> rows,
                      std::span<const std::string> covariate_names,
                      std::ostream& out) {
    out << "id,j,DURATION,AGE,YEAR,death,EXPO";
    for (const auto& c : covariate_names) out << ',' << c;
    out << '\n';
    for (const auto& r : rows) {
        out << r.id << ',' << r.interval << ',' << r.duration << ',' << r.age << ','
            << r.year << ',' << r.death_in_interval << ',' << format_exposure(r.exposure);
        for (const auto& c : r.covariates) out << ',' << c;
        out << '\n';
    }
}

}  // namespace fairdec
