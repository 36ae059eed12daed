#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <span>

#include "fairdec/errors.hpp"

namespace fairdec {

// Standard normal CDF, accurate to well below 1e-12 absolute error.
double std_normal_cdf(double x);

// Standard normal density.
double std_normal_pdf(double x);

// Inverse of std_normal_cdf on (0,1). Rational approximation polished with
// one Halley step, |Phi(result) - p| <= 1e-9 (in practice ~1e-15).
double std_normal_quantile(double p);

// Lower-triangular factor with non-negative diagonal. Entries above the
// diagonal are zero by construction.
class LowerTriangular {
  public:
    explicit LowerTriangular(Eigen::MatrixXd m);

    int dim() const { return static_cast<int>(mat_.rows()); }
    const Eigen::MatrixXd& mat() const { return mat_; }

    // Solves L * x = b by forward substitution.
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    // Solves L^T * x = b by back substitution.
    Eigen::VectorXd solve_transposed(const Eigen::VectorXd& b) const;

  private:
    Eigen::MatrixXd mat_;
};

// Cholesky factorization of a symmetric positive-definite matrix.
// Doubles as the positive-definiteness test: throws NotPositiveDefinite
// when a pivot is non-positive.
LowerTriangular cholesky_factor(const Eigen::MatrixXd& matrix);

// Solves A x = b through an existing Cholesky factor of A.
Eigen::VectorXd cholesky_solve(const LowerTriangular& chol,
                               const Eigen::VectorXd& b);

// Pearson linear correlation. Throws DegenerateVariance when either input
// has zero variance, ShapeError on length mismatch or length < 2.
double pearson_corr(std::span<const double> x, std::span<const double> y);

// Immutable descriptor of a reproducible random stream. The same
// (seed, stream) always produces the same draw sequence; distinct stream
// indices give independent sequences (one stream per replicate).
struct RandomStream {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    // Derived stream for nested use (bootstrap batches, splits).
    RandomStream substream(std::uint64_t k) const;
};

// Draw source over a RandomStream. Cheap to construct; each consumer owns
// its own instance, so shared state never mutates across threads.
class Rng {
  public:
    explicit Rng(RandomStream s);

    std::uint64_t next_u64();
    // Uniform on the open interval (0,1).
    double uniform();
    // Standard normal via inverse-CDF transform of uniform().
    double normal();
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

  private:
    std::mt19937_64 engine_;
};

// n samples of a centered multivariate normal with covariance L L^T,
// returned as an n x dim matrix (one sample per row).
Eigen::MatrixXd sample_mvn(const LowerTriangular& L, long n, RandomStream stream);

}  // namespace fairdec
