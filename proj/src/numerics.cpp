#include "fairdec/numerics.hpp"

#include <cmath>
#include <limits>

namespace fairdec {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

double std_normal_cdf(double x) {
    if (!std::isfinite(x)) {
        throw ConfigError("std_normal_cdf: non-finite input");
    }
    return 0.5 * std::erfc(-x * kInvSqrt2);
}

double std_normal_pdf(double x) {
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

namespace {

// Rational approximation (Acklam), relative error below 1.2e-9.
double quantile_seed(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;

    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw ConfigError("std_normal_quantile: p must lie in (0,1)");
    }
    double x = quantile_seed(p);
    // One Halley step against the accurate CDF.
    double e = std_normal_cdf(x) - p;
    double u = e / std_normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

LowerTriangular::LowerTriangular(Eigen::MatrixXd m) : mat_(std::move(m)) {
    if (mat_.rows() != mat_.cols()) {
        throw ShapeError("LowerTriangular: matrix must be square");
    }
    for (Eigen::Index i = 0; i < mat_.rows(); ++i) {
        if (mat_(i, i) < 0.0) {
            throw NumericError("LowerTriangular: negative diagonal entry");
        }
        for (Eigen::Index j = i + 1; j < mat_.cols(); ++j) {
            if (mat_(i, j) != 0.0) {
                throw ShapeError("LowerTriangular: nonzero entry above diagonal");
            }
        }
    }
}

Eigen::VectorXd LowerTriangular::solve(const Eigen::VectorXd& b) const {
    const Eigen::Index n = mat_.rows();
    if (b.size() != n) throw ShapeError("LowerTriangular::solve: size mismatch");
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = b(i);
        for (Eigen::Index j = 0; j < i; ++j) s -= mat_(i, j) * x(j);
        x(i) = s / mat_(i, i);
    }
    return x;
}

Eigen::VectorXd LowerTriangular::solve_transposed(const Eigen::VectorXd& b) const {
    const Eigen::Index n = mat_.rows();
    if (b.size() != n) throw ShapeError("LowerTriangular::solve_transposed: size mismatch");
    Eigen::VectorXd x(n);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        double s = b(i);
        for (Eigen::Index j = i + 1; j < n; ++j) s -= mat_(j, i) * x(j);
        x(i) = s / mat_(i, i);
    }
    return x;
}

LowerTriangular cholesky_factor(const Eigen::MatrixXd& matrix) {
    const Eigen::Index n = matrix.rows();
    if (matrix.cols() != n) {
        throw ShapeError("cholesky_factor: matrix must be square");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (std::abs(matrix(i, j) - matrix(j, i)) > 1e-12) {
                throw ShapeError("cholesky_factor: matrix not symmetric");
            }
        }
    }
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = matrix(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (!(d > 0.0)) {
            throw NotPositiveDefinite("cholesky_factor: matrix is not positive definite");
        }
        L(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = matrix(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / L(j, j);
        }
    }
    return LowerTriangular(std::move(L));
}

Eigen::VectorXd cholesky_solve(const LowerTriangular& chol, const Eigen::VectorXd& b) {
    return chol.solve_transposed(chol.solve(b));
}

double pearson_corr(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ShapeError("pearson_corr: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw ShapeError("pearson_corr: need at least two observations");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) {
        throw DegenerateVariance("pearson_corr: zero variance input");
    }
    return sxy / std::sqrt(sxx * syy);
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

RandomStream RandomStream::substream(std::uint64_t k) const {
    std::uint64_t state = seed ^ 0x6a09e667f3bcc908ULL;
    std::uint64_t a = splitmix64(state);
    state ^= stream;
    std::uint64_t b = splitmix64(state);
    state ^= k;
    std::uint64_t c = splitmix64(state);
    return RandomStream{a ^ c, b + (k << 1) + 1};
}

Rng::Rng(RandomStream s) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
        static_cast<std::uint32_t>(s.stream), static_cast<std::uint32_t>(s.stream >> 32)};
    engine_.seed(seq);
}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
    // 53-bit mantissa, shifted into the open interval (0,1).
    const std::uint64_t bits = engine_() >> 11;
    double u = (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    return u;
}

double Rng::normal() { return std_normal_quantile(uniform()); }

std::uint64_t Rng::below(std::uint64_t n) {
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return v % n;
}

Eigen::MatrixXd sample_mvn(const LowerTriangular& L, long n, RandomStream stream) {
    if (n < 1) throw ConfigError("sample_mvn: n must be >= 1");
    const int d = L.dim();
    Rng rng(stream);
    Eigen::MatrixXd out(n, d);
    Eigen::VectorXd eps(d);
    const Eigen::MatrixXd& m = L.mat();
    for (long r = 0; r < n; ++r) {
        for (int i = 0; i < d; ++i) eps(i) = rng.normal();
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int j = 0; j <= i; ++j) s += m(i, j) * eps(j);
            out(r, i) = s;
        }
    }
    return out;
}

}  // namespace fairdec
