#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairdec/errors.hpp"
#include "fairdec/tabular.hpp"

namespace fairdec {

enum class Metastatic { M0, M1 };

struct SurvivalRecord {
    std::string id;
    int age_at_diagnosis = 0;
    int year_of_diagnosis = 0;
    long survival_months = 0;
    int death_flag = 0;            // death from any cause
    int death_cause_matches = 0;   // cause-specific death indicator
    Metastatic metastatic = Metastatic::M0;
    std::vector<std::string> covariates;  // pass-through values
};

// One row of the per-individual, per-year expansion. Exposure is 1 for all
// intervals except possibly the last; the death flag appears only in the
// last interval.
struct PseudoRow {
    std::string id;
    int interval = 1;          // j >= 1
    int duration = 0;          // j - 1 years since diagnosis
    int age = 0;
    int year = 0;
    int death_in_interval = 0;
    double exposure = 1.0;
    std::vector<std::string> covariates;
};

// Time at risk inside year-interval j. 1 when the individual dies in the
// interval or survives it entirely; the leftover fraction when censored
// alive in the final interval.
double initial_exposure(double survival_years, int interval, int max_duration,
                        bool died);

// Balducci-corrected mortality rate d / (l - w + sum of withdrawal
// fractions).
double balducci_rate(long deaths, long alive_at_start,
                     std::span<const double> withdrawal_fractions);

enum class CauseRule { CauseSpecific, AllCause };

// Five-year mortality rate over a cohort sharing one metastatic class.
// Deaths follow the cause rule; exposure is 1 for the dead or five-year
// survivors and survival_years/5 otherwise. Undefined for an empty cohort.
std::optional<double> five_year_rate(std::span<const SurvivalRecord> records,
                                     CauseRule rule);

std::vector<PseudoRow> build_pseudo_table(std::span<const SurvivalRecord> records);

// Column schema used when expanding survival CSVs. Values name columns of
// the input file; death_flag falls back to death_cause (and vice versa)
// when only one is given.
struct SurvivalSchema {
    std::string id = "id";
    std::string age_dx = "age_dx";
    std::string year_dx = "year_dx";
    std::string survival_months = "survival_months";
    std::string death_cause;   // cause-specific flag column
    std::string death_flag;    // all-cause flag column
    std::string metastatic;    // optional
    std::vector<std::string> covariates;  // pass-through column names

    static SurvivalSchema from_json(const nlohmann::json& j);
};

std::vector<SurvivalRecord> read_survival_csv(std::istream& in,
                                              const SurvivalSchema& schema);

// Pseudo-table CSV: header id,j,DURATION,AGE,YEAR,death,EXPO plus
// pass-through covariates. Exposure is written rounded to two decimals,
// matching the year-level granularity of the expansion.
void write_pseudo_csv(std::span<const PseudoRow> rows,
                      std::span<const std::string> covariate_names,
                      std::ostream& out);

}  // namespace fairdec
