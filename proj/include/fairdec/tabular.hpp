#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fairdec/errors.hpp"
#include "fairdec/numerics.hpp"

namespace fairdec {

enum class Role { Sensitive, Feature, Outcome, Weight };
enum class Kind { Numeric, Categorical };

std::string to_string(Role r);
std::string to_string(Kind k);
Role role_from_string(std::string_view s);
Kind kind_from_string(std::string_view s);

// One column of a dataset. Numeric columns keep values in `num` with NaN as
// the missing marker; categorical columns keep levels in `cat` with the
// empty string as the missing marker.
struct Column {
    std::string name;
    Role role = Role::Feature;
    Kind kind = Kind::Numeric;
    std::vector<double> num;
    std::vector<std::string> cat;

    std::size_t size() const {
        return kind == Kind::Numeric ? num.size() : cat.size();
    }
};

// Column-oriented immutable table. All operations return new datasets.
struct Dataset {
    std::vector<Column> columns;
    std::size_t rows = 0;

    bool has(std::string_view name) const;
    const Column& col(std::string_view name) const;
    Column& col(std::string_view name);
    int col_index(std::string_view name) const;  // -1 when absent

    // Validates the modeling invariants: exactly one outcome column with
    // values in {0,1}, at most one weight column with values in (0,1].
    void check_model_shape() const;
};

// Subset of rows, order preserved as given.
Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& idx);

// Declared schema: ordered (name, role, kind) triples.
struct Schema {
    struct Field {
        std::string name;
        Role role;
        Kind kind;
    };
    std::vector<Field> fields;

    static Schema from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// CSV ingestion: UTF-8, comma separated, header row, '.' decimal point,
// empty cell or "NA" as missing. Columns not named by the schema are
// ignored. Missing declared column -> SchemaError, ragged row -> FormatError.
Dataset read_csv(std::istream& in, const Schema& schema);
Dataset read_csv(const std::filesystem::path& path, const Schema& schema);

void write_csv(const Dataset& ds, std::ostream& out);
void write_csv(const Dataset& ds, const std::filesystem::path& path);

// Fills numeric missing cells with the column median and categorical
// missing cells with the literal level "Missing".
Dataset impute(const Dataset& ds);

// Dummy coding of one categorical column: the reference level (the most
// frequent; ties broken lexicographically) is dropped.
struct EncodingMap {
    struct Entry {
        std::string column;
        std::string reference;
        std::vector<std::string> dummy_levels;  // sorted; one dummy per level
    };
    std::vector<Entry> entries;
    std::vector<std::string> warnings;  // single-level columns dropped, etc.
};

// Replaces each categorical column by k-1 numeric dummies named
// "<column>_<level>"; dummies inherit the source column's role.
std::pair<Dataset, EncodingMap> one_hot(const Dataset& ds);

struct ColumnStats {
    std::string name;
    double mean = 0.0;
    double sd = 1.0;  // unbiased (n-1) standard deviation
};

// Affinely rescales numeric feature columns so the fit rows have mean 0 and
// sd 1 (n-1 convention); the same map is applied to all other rows.
std::pair<Dataset, std::vector<ColumnStats>> standardize(
    const Dataset& ds, const std::vector<std::size_t>& fit_rows);

// Deterministic shuffle split. Train size is floor(fraction * rows) except
// that a single row always goes to train.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t rows, double train_fraction, RandomStream stream);

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  RandomStream stream);

}  // namespace fairdec
