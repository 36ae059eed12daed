#include "fairdec/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace fairdec {

std::string to_string(CiMethod m) {
    switch (m) {
        case CiMethod::StudentT: return "student_t";
        case CiMethod::Normal: return "normal";
        case CiMethod::BootstrapPercentile: return "bootstrap_percentile";
    }
    return "normal";
}

std::string IntervalEstimate::formatted(double scale) const {
    char buf[64];
    if (half_width) {
        std::snprintf(buf, sizeof(buf), "%.2f±%.2f", mean * scale, *half_width * scale);
    } else {
        std::snprintf(buf, sizeof(buf), "%.2f±NA", mean * scale);
    }
    return buf;
}

namespace {

// Regularized incomplete beta by Lentz's continued fraction.
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, long df) {
    const double v = static_cast<double>(df);
    const double x = v / (v + t * t);
    const double tail = 0.5 * incomplete_beta(0.5 * v, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

}  // namespace

double student_t_quantile(double p, long df) {
    if (!(p > 0.0 && p < 1.0)) {
        throw ConfigError("student_t_quantile: p must lie in (0,1)");
    }
    if (df < 1) throw ConfigError("student_t_quantile: df must be >= 1");
    if (p == 0.5) return 0.0;
    // Bisection bracket grows geometrically, then bisect to double precision.
    double lo = -1.0, hi = 1.0;
    while (student_t_cdf(lo, df) > p) lo *= 2.0;
    while (student_t_cdf(hi, df) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (student_t_cdf(mid, df) < p) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

IntervalEstimate mean_ci(std::span<const double> values, double level) {
    const long n = static_cast<long>(values.size());
    if (n < 2) throw InsufficientData("mean_ci: need at least two values");
    if (!(level > 0.0 && level < 1.0)) {
        throw ConfigError("mean_ci: level must lie in (0,1)");
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    IntervalEstimate est;
    est.mean = mean;
    est.level = level;
    est.n = n;
    const double tail = 0.5 * (1.0 + level);
    if (n <= 30) {
        est.method = CiMethod::StudentT;
        est.half_width = student_t_quantile(tail, n - 1) * sd / std::sqrt(n);
    } else {
        est.method = CiMethod::Normal;
        est.half_width = std_normal_quantile(tail) * sd / std::sqrt(n);
    }
    return est;
}

IntervalEstimate bootstrap_ci(std::span<const double> values,
                              const std::function<double(std::span<const double>)>& statistic,
                              long resamples, double level, RandomStream stream) {
    const std::size_t n = values.size();
    if (n < 2) throw InsufficientData("bootstrap_ci: need at least two values");
    if (resamples < 100) throw ConfigError("bootstrap_ci: need at least 100 resamples");
    if (!(level > 0.0 && level < 1.0)) {
        throw ConfigError("bootstrap_ci: level must lie in (0,1)");
    }
    std::vector<double> stats(static_cast<std::size_t>(resamples));
    std::vector<double> resample(n);
    Rng rng(stream);
    for (long b = 0; b < resamples; ++b) {
        for (std::size_t i = 0; i < n; ++i) {
            resample[i] = values[static_cast<std::size_t>(rng.below(n))];
        }
        stats[static_cast<std::size_t>(b)] = statistic(resample);
    }
    std::sort(stats.begin(), stats.end());
    const double alpha = 1.0 - level;
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(stats.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, stats.size() - 1);
        const double frac = pos - std::floor(pos);
        return (1.0 - frac) * stats[lo] + frac * stats[hi];
    };
    const double lo = quantile(alpha / 2.0);
    const double hi = quantile(1.0 - alpha / 2.0);

    IntervalEstimate est;
    est.mean = statistic(values);
    est.half_width = 0.5 * (hi - lo);
    est.level = level;
    est.method = CiMethod::BootstrapPercentile;
    est.n = static_cast<long>(n);
    return est;
}

std::vector<std::pair<std::string, IntervalEstimate>> replicate_summary(
    const std::vector<FlatReport>& reports, double level) {
    if (reports.size() < 2) {
        throw InsufficientData("replicate_summary: need at least two replicates");
    }
    const FlatReport& first = reports.front();
    for (const auto& rep : reports) {
        if (rep.size() != first.size()) {
            throw SchemaError("replicate_summary: reports have different shapes");
        }
        for (std::size_t i = 0; i < rep.size(); ++i) {
            if (rep[i].first != first[i].first) {
                throw SchemaError("replicate_summary: key mismatch at position " +
                                  std::to_string(i));
            }
        }
    }
    std::vector<std::pair<std::string, IntervalEstimate>> out;
    for (std::size_t i = 0; i < first.size(); ++i) {
        std::vector<double> vals;
        vals.reserve(reports.size());
        for (const auto& rep : reports) {
            if (rep[i].second) vals.push_back(*rep[i].second);
        }
        IntervalEstimate est;
        if (vals.size() >= 2) {
            est = mean_ci(vals, level);
        } else if (vals.size() == 1) {
            est.mean = vals[0];
            est.level = level;
            est.n = 1;
        } else {
            continue;  // undefined everywhere; drop the key
        }
        out.emplace_back(first[i].first, est);
    }
    return out;
}

}  // namespace fairdec
