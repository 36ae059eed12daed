#pragma once

#include <stdexcept>
#include <string>

namespace fairdec {

// Error categories map onto CLI exit codes: ConfigError -> 2,
// DataError -> 3, NumericError -> 4.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : NumericError {
    using NumericError::NumericError;
};

struct DegenerateVariance : NumericError {
    using NumericError::NumericError;
};

struct DegenerateExposure : NumericError {
    using NumericError::NumericError;
};

struct RankDeficient : NumericError {
    using NumericError::NumericError;
};

struct SingularInformation : NumericError {
    using NumericError::NumericError;
};

struct InvalidCholeskyRow : ConfigError {
    explicit InvalidCholeskyRow(int row)
        : ConfigError("row " + std::to_string(row) +
                      " of the strict-lower factor has squared sum >= 1"),
          row(row) {}
    int row;
};

struct InvalidCorrelation : ConfigError {
    InvalidCorrelation(int i, int j)
        : ConfigError("correlation entry (" + std::to_string(i) + "," +
                      std::to_string(j) + ") outside [-1,1]"),
          i(i), j(j) {}
    int i;
    int j;
};

struct UnsupportedPair : ConfigError {
    using ConfigError::ConfigError;
};

struct SchemaError : DataError {
    using DataError::DataError;
};

struct FormatError : DataError {
    FormatError(std::size_t row, const std::string& what)
        : DataError("row " + std::to_string(row) + ": " + what), row(row) {}
    std::size_t row;
};

struct CannotImpute : DataError {
    explicit CannotImpute(const std::string& column)
        : DataError("column '" + column + "' has no observed numeric values"),
          column(column) {}
    std::string column;
};

struct ShapeError : DataError {
    using DataError::DataError;
};

struct InternalConsistency : DataError {
    using DataError::DataError;
};

struct InsufficientData : DataError {
    using DataError::DataError;
};

}  // namespace fairdec
