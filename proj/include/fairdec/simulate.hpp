#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "fairdec/numerics.hpp"
#include "fairdec/tabular.hpp"

namespace fairdec {

struct NormalMarginal {
    double mean = 0.0;
    double sd = 1.0;  // standard deviation, not variance
};

struct UniformMarginal {
    double a = 0.0;
    double b = 1.0;
};

struct BernoulliMarginal {
    double p = 0.5;
};

using MarginalSpec = std::variant<NormalMarginal, UniformMarginal, BernoulliMarginal>;

void validate(const MarginalSpec& m);

// Latent correlation matrix from strict-lower Cholesky entries (row-major,
// dim*(dim-1)/2 values). Each diagonal entry is completed so rows have unit
// norm; the row constraint sum_{k<i} L_ik^2 < 1 must hold.
Eigen::MatrixXd build_latent_correlation(int dim,
                                         const std::vector<double>& strict_lower);

// Multiplicative shrinkage between the latent normal correlation and the
// correlation of the transformed pair: corr(X_i, X_j) = factor * rho_latent.
// Supported pairs: normal-normal (1), uniform-normal (sqrt(3/pi)), and
// Bernoulli(p)-normal (phi(q)/sqrt(tau(1-tau)) at q = quantile(tau),
// tau = 1-p). Other pairs throw UnsupportedPair.
double attenuation_factor(const MarginalSpec& a, const MarginalSpec& b);

// 1 when u >= 1-p, else 0; over uniform u the mean converges to p.
int bernoulli_threshold(double u, double p);

struct SimulationSpec {
    std::vector<std::string> names;
    std::vector<MarginalSpec> marginals;
    std::vector<Role> roles;
    // Exactly one of the two latent inputs must be present.
    std::optional<std::vector<double>> cholesky_strict_lower;
    std::optional<Eigen::MatrixXd> latent_corr;
    long rows = 0;
    long replicates = 1;
    std::uint64_t seed = 0;

    // Validates and returns the latent correlation matrix.
    Eigen::MatrixXd latent() const;
    void validate() const;

    static SimulationSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// One replicate: draw latent normals, push each column through its marginal
// transform (uniform intermediate, then threshold for Bernoulli columns).
// Replicate r draws from stream index r of the spec seed.
Dataset sample_dataset(const SimulationSpec& spec, std::uint64_t replicate_index);

std::vector<Dataset> generate_replicates(const SimulationSpec& spec);

}  // namespace fairdec
