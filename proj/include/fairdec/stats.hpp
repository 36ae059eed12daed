#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairdec/errors.hpp"
#include "fairdec/numerics.hpp"

namespace fairdec {

enum class CiMethod { StudentT, Normal, BootstrapPercentile };

std::string to_string(CiMethod m);

struct IntervalEstimate {
    double mean = 0.0;
    std::optional<double> half_width;  // Undefined for degenerate inputs
    double level = 0.95;
    CiMethod method = CiMethod::Normal;
    long n = 0;

    // "mean±half_width" with two decimals, optionally scaled (100 for
    // percentage-point tables).
    std::string formatted(double scale = 1.0) const;
};

// Two-sided Student-t quantile at cumulative probability p.
double student_t_quantile(double p, long df);

// mean ± q * sd/sqrt(n) with the unbiased sd; q is the Student-t quantile
// up to n = 30 and the normal quantile beyond.
IntervalEstimate mean_ci(std::span<const double> values, double level);

// Percentile bootstrap over resamples drawn with replacement; deterministic
// given the stream. The mean field carries the statistic on the original
// sample, the half-width is half the percentile-interval width.
IntervalEstimate bootstrap_ci(std::span<const double> values,
                              const std::function<double(std::span<const double>)>& statistic,
                              long resamples, double level, RandomStream stream);

using FlatReport = std::vector<std::pair<std::string, std::optional<double>>>;

// One interval per (scope, metric) key over homogeneous replicate reports.
// Entries undefined in a replicate are skipped for that key.
std::vector<std::pair<std::string, IntervalEstimate>> replicate_summary(
    const std::vector<FlatReport>& reports, double level = 0.95);

}  // namespace fairdec
