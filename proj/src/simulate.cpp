#include "fairdec/simulate.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace fairdec {

void validate(const MarginalSpec& m) {
    if (const auto* n = std::get_if<NormalMarginal>(&m)) {
        if (!(n->sd > 0.0)) throw ConfigError("normal marginal needs sd > 0");
    } else if (const auto* u = std::get_if<UniformMarginal>(&m)) {
        if (!(u->a < u->b)) throw ConfigError("uniform marginal needs a < b");
    } else if (const auto* b = std::get_if<BernoulliMarginal>(&m)) {
        if (!(b->p > 0.0 && b->p < 1.0)) {
            throw ConfigError("bernoulli marginal needs p in (0,1)");
        }
    }
}

Eigen::MatrixXd build_latent_correlation(int dim,
                                         const std::vector<double>& strict_lower) {
    if (dim < 1) throw ConfigError("build_latent_correlation: dim must be >= 1");
    const std::size_t expected = static_cast<std::size_t>(dim) * (dim - 1) / 2;
    if (strict_lower.size() != expected) {
        throw ConfigError("build_latent_correlation: expected " +
                          std::to_string(expected) + " strict-lower entries, got " +
                          std::to_string(strict_lower.size()));
    }
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(dim, dim);
    std::size_t k = 0;
    for (int i = 0; i < dim; ++i) {
        double ss = 0.0;
        for (int j = 0; j < i; ++j) {
            L(i, j) = strict_lower[k++];
            ss += L(i, j) * L(i, j);
        }
        if (!(ss < 1.0)) throw InvalidCholeskyRow(i);
        L(i, i) = std::sqrt(1.0 - ss);
    }
    Eigen::MatrixXd R = L * L.transpose();
    for (int i = 0; i < dim; ++i) {
        R(i, i) = 1.0;
        for (int j = 0; j < i; ++j) {
            if (R(i, j) < -1.0 || R(i, j) > 1.0) throw InvalidCorrelation(i, j);
            R(j, i) = R(i, j);
        }
    }
    return R;
}

double attenuation_factor(const MarginalSpec& a, const MarginalSpec& b) {
    const bool a_norm = std::holds_alternative<NormalMarginal>(a);
    const bool b_norm = std::holds_alternative<NormalMarginal>(b);
    if (a_norm && b_norm) return 1.0;
    if (!a_norm && !b_norm) {
        throw UnsupportedPair("attenuation_factor: one side of the pair must be normal");
    }
    const MarginalSpec& other = a_norm ? b : a;
    if (std::holds_alternative<UniformMarginal>(other)) {
        return std::sqrt(3.0 / M_PI);
    }
    const double p = std::get<BernoulliMarginal>(other).p;
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("bernoulli marginal needs p in (0,1)");
    const double tau = 1.0 - p;
    return std_normal_pdf(std_normal_quantile(tau)) / std::sqrt(tau * (1.0 - tau));
}

int bernoulli_threshold(double u, double p) {
    return u >= 1.0 - p ? 1 : 0;
}

Eigen::MatrixXd SimulationSpec::latent() const {
    const int n = static_cast<int>(marginals.size());
    Eigen::MatrixXd R;
    if (cholesky_strict_lower && latent_corr) {
        throw ConfigError("simulation spec: give either strict-lower entries or a "
                          "latent correlation matrix, not both");
    }
    if (cholesky_strict_lower) {
        R = build_latent_correlation(n, *cholesky_strict_lower);
    } else if (latent_corr) {
        R = *latent_corr;
        if (R.rows() != n || R.cols() != n) {
            throw ConfigError("latent correlation matrix size does not match marginals");
        }
        for (int i = 0; i < n; ++i) {
            if (std::abs(R(i, i) - 1.0) > 1e-12) {
                throw InvalidCorrelation(i, i);
            }
            for (int j = 0; j < i; ++j) {
                if (std::abs(R(i, j) - R(j, i)) > 1e-12) {
                    throw ConfigError("latent correlation matrix is not symmetric");
                }
                if (R(i, j) < -1.0 || R(i, j) > 1.0) throw InvalidCorrelation(i, j);
            }
        }
    } else {
        throw ConfigError("simulation spec: latent correlation input missing");
    }
    cholesky_factor(R);  // positive-definiteness gate
    return R;
}

void SimulationSpec::validate() const {
    const std::size_t n = marginals.size();
    if (n == 0) throw ConfigError("simulation spec: no marginals");
    if (names.size() != n) throw ConfigError("simulation spec: names/marginals mismatch");
    if (roles.size() != n) throw ConfigError("simulation spec: roles/marginals mismatch");
    for (const auto& m : marginals) fairdec::validate(m);
    if (rows < 1) throw ConfigError("simulation spec: rows must be >= 1");
    if (replicates < 1) throw ConfigError("simulation spec: replicates must be >= 1");
    latent();
}

namespace {

MarginalSpec marginal_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "normal") {
        return NormalMarginal{j.at("mean").get<double>(), j.at("sd").get<double>()};
    }
    if (kind == "uniform") {
        return UniformMarginal{j.at("a").get<double>(), j.at("b").get<double>()};
    }
    if (kind == "bernoulli") {
        return BernoulliMarginal{j.at("p").get<double>()};
    }
    throw ConfigError("unknown marginal kind '" + kind + "'");
}

nlohmann::json marginal_to_json(const std::string& name, Role role,
                                const MarginalSpec& m) {
    nlohmann::json j{{"name", name}, {"role", to_string(role)}};
    if (const auto* n = std::get_if<NormalMarginal>(&m)) {
        j["kind"] = "normal";
        j["mean"] = n->mean;
        j["sd"] = n->sd;
    } else if (const auto* u = std::get_if<UniformMarginal>(&m)) {
        j["kind"] = "uniform";
        j["a"] = u->a;
        j["b"] = u->b;
    } else {
        j["kind"] = "bernoulli";
        j["p"] = std::get<BernoulliMarginal>(m).p;
    }
    return j;
}

}  // namespace

SimulationSpec SimulationSpec::from_json(const nlohmann::json& j) {
    SimulationSpec s;
    const auto& marg = j.at("marginals");
    if (!marg.is_array() || marg.empty()) {
        throw ConfigError("simulation spec: 'marginals' must be a non-empty array");
    }
    int auto_name = 0;
    for (const auto& m : marg) {
        s.marginals.push_back(marginal_from_json(m));
        s.names.push_back(m.contains("name") ? m.at("name").get<std::string>()
                                             : "col" + std::to_string(auto_name));
        s.roles.push_back(m.contains("role")
                              ? role_from_string(m.at("role").get<std::string>())
                              : Role::Feature);
        ++auto_name;
    }
    const auto& latent = j.at("latent");
    if (latent.contains("cholesky_strict_lower")) {
        s.cholesky_strict_lower =
            latent.at("cholesky_strict_lower").get<std::vector<double>>();
    }
    if (latent.contains("latent_corr")) {
        const auto rows_json = latent.at("latent_corr");
        const int n = static_cast<int>(rows_json.size());
        Eigen::MatrixXd R(n, n);
        for (int i = 0; i < n; ++i) {
            const auto row = rows_json.at(i).get<std::vector<double>>();
            if (static_cast<int>(row.size()) != n) {
                throw ConfigError("latent_corr must be a square matrix");
            }
            for (int jj = 0; jj < n; ++jj) R(i, jj) = row[jj];
        }
        s.latent_corr = std::move(R);
    }
    s.rows = j.at("rows").get<long>();
    s.replicates = j.value("replicates", 1L);
    s.seed = j.value("seed", std::uint64_t{0});
    s.validate();
    return s;
}

nlohmann::json SimulationSpec::to_json() const {
    nlohmann::json j;
    j["marginals"] = nlohmann::json::array();
    for (std::size_t i = 0; i < marginals.size(); ++i) {
        j["marginals"].push_back(marginal_to_json(names[i], roles[i], marginals[i]));
    }
    nlohmann::json latent_json = nlohmann::json::object();
    if (cholesky_strict_lower) {
        latent_json["cholesky_strict_lower"] = *cholesky_strict_lower;
    }
    if (latent_corr) {
        nlohmann::json rows_json = nlohmann::json::array();
        for (Eigen::Index i = 0; i < latent_corr->rows(); ++i) {
            std::vector<double> row(latent_corr->cols());
            for (Eigen::Index jj = 0; jj < latent_corr->cols(); ++jj) {
                row[jj] = (*latent_corr)(i, jj);
            }
            rows_json.push_back(row);
        }
        latent_json["latent_corr"] = rows_json;
    }
    j["latent"] = latent_json;
    j["rows"] = rows;
    j["replicates"] = replicates;
    j["seed"] = seed;
    return j;
}

Dataset sample_dataset(const SimulationSpec& spec, std::uint64_t replicate_index) {
    spec.validate();
    const Eigen::MatrixXd R = spec.latent();
    const LowerTriangular L = cholesky_factor(R);
    const Eigen::MatrixXd Z =
        sample_mvn(L, spec.rows, RandomStream{spec.seed, replicate_index});

    Dataset ds;
    ds.rows = static_cast<std::size_t>(spec.rows);
    const int n = static_cast<int>(spec.marginals.size());
    for (int c = 0; c < n; ++c) {
        Column col;
        col.name = spec.names[static_cast<std::size_t>(c)];
        col.role = spec.roles[static_cast<std::size_t>(c)];
        col.kind = Kind::Numeric;
        col.num.resize(ds.rows);
        const MarginalSpec& m = spec.marginals[static_cast<std::size_t>(c)];
        for (long r = 0; r < spec.rows; ++r) {
            const double z = Z(r, c);
            double x;
            if (const auto* nm = std::get_if<NormalMarginal>(&m)) {
                // F^{-1}(Phi(z)) collapses to the affine map for a normal target.
                x = nm->mean + nm->sd * z;
            } else if (const auto* um = std::get_if<UniformMarginal>(&m)) {
                x = um->a + std_normal_cdf(z) * (um->b - um->a);
            } else {
                const double p = std::get<BernoulliMarginal>(m).p;
                x = bernoulli_threshold(std_normal_cdf(z), p);
            }
            col.num[static_cast<std::size_t>(r)] = x;
        }
        ds.columns.push_back(std::move(col));
    }
    return ds;
}

std::vector<Dataset> generate_replicates(const SimulationSpec& spec) {
    spec.validate();
    std::vector<Dataset> out;
    out.reserve(static_cast<std::size_t>(spec.replicates));
    for (long r = 0; r < spec.replicates; ++r) {
        out.push_back(sample_dataset(spec, static_cast<std::uint64_t>(r)));
    }
    return out;
}

}  // namespace fairdec
