#include "fairdec/decorrelate.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace fairdec {

namespace {

Eigen::MatrixXd centered(const Eigen::MatrixXd& data, Eigen::VectorXd& means) {
    means = data.colwise().mean();
    return data.rowwise() - means.transpose();
}

}  // namespace

TransitionMatrix fit_transition(const Eigen::MatrixXd& data,
                                const std::vector<int>& sensitive_indices) {
    const int n = static_cast<int>(data.cols());
    const long rows = data.rows();
    const int s = static_cast<int>(sensitive_indices.size());
    if (s == 0) throw ConfigError("fit_transition: no sensitive columns given");
    if (n < s + 1) throw ConfigError("fit_transition: need at least one non-sensitive column");
    if (rows < s + 2) throw InsufficientData("fit_transition: too few rows");
    std::vector<bool> is_sensitive(static_cast<std::size_t>(n), false);
    for (int idx : sensitive_indices) {
        if (idx < 0 || idx >= n) throw ConfigError("fit_transition: sensitive index out of range");
        if (is_sensitive[static_cast<std::size_t>(idx)]) {
            throw ConfigError("fit_transition: duplicate sensitive index");
        }
        is_sensitive[static_cast<std::size_t>(idx)] = true;
    }
    if (!data.allFinite()) throw DataError("fit_transition: non-finite values in data");

    TransitionMatrix A;
    A.sensitive = sensitive_indices;
    A.rows = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd C = centered(data, A.column_means);

    Eigen::MatrixXd S(rows, s);
    for (int j = 0; j < s; ++j) S.col(j) = C.col(sensitive_indices[j]);

    // Pseudo-inverse of the sensitive block, dropping singular values below
    // 1e-10 * sigma_max.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff = 1e-10 * sv(0);
    Eigen::VectorXd inv_sv = Eigen::VectorXd::Zero(s);
    for (int j = 0; j < s; ++j) {
        if (sv(j) > cutoff) inv_sv(j) = 1.0 / sv(j);
    }

    for (int k = 0; k < n; ++k) {
        if (is_sensitive[static_cast<std::size_t>(k)]) continue;
        const Eigen::VectorXd u = C.col(k);
        const double mean_scale = 1.0 + A.column_means(k) * A.column_means(k);
        if (u.squaredNorm() / static_cast<double>(rows) <= 1e-20 * mean_scale) {
            A.warnings.push_back("column " + std::to_string(k) +
                                 " has zero variance and was left unchanged");
            continue;
        }
        // Least-squares coefficients of u on the sensitive block; the
        // constrained minimum-distance row is u minus this projection.
        const Eigen::VectorXd beta =
            svd.matrixV() * inv_sv.asDiagonal() * (svd.matrixU().transpose() * u);
        for (int j = 0; j < s; ++j) {
            A.rows(k, sensitive_indices[j]) = -beta(j);
        }
        A.rows(k, k) = 1.0;
    }
    return A;
}

Eigen::MatrixXd apply_transition(const TransitionMatrix& A, const Eigen::MatrixXd& data) {
    if (data.cols() != A.dim()) {
        throw ShapeError("apply_transition: column count does not match transition dim");
    }
    Eigen::MatrixXd out = data * A.rows.transpose();
    // Sensitive columns are identity rows; copy them back so they stay
    // bit-identical even under -0.0 and rounding of the product kernel.
    for (int idx : A.sensitive) out.col(idx) = data.col(idx);
    return out;
}

namespace {

// Sample covariance as the inner product; vectors live in the zero-mean
// space, so the mean is removed inside the product rather than from the
// stored vectors.
double cov_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double ma = a.mean();
    const double mb = b.mean();
    return ((a.array() - ma) * (b.array() - mb)).sum() / static_cast<double>(a.size());
}

}  // namespace

std::vector<Eigen::VectorXd> gram_schmidt(const std::vector<Eigen::VectorXd>& vectors) {
    if (vectors.empty()) return {};
    const Eigen::Index rows = vectors.front().size();
    for (const auto& v : vectors) {
        if (v.size() != rows) throw ShapeError("gram_schmidt: length mismatch");
    }
    std::vector<Eigen::VectorXd> out;
    out.reserve(vectors.size());
    for (const auto& u : vectors) {
        Eigen::VectorXd v = u;
        const double original = cov_inner(v, v);
        for (const auto& w : out) {
            v -= (cov_inner(v, w) / cov_inner(w, w)) * w;
        }
        if (cov_inner(v, v) <= 1e-12 * std::max(original, 1e-300)) {
            throw RankDeficient("gram_schmidt: inputs are linearly dependent");
        }
        out.push_back(std::move(v));
    }
    return out;
}

nlohmann::json TransitionMatrix::to_json() const {
    nlohmann::json j;
    j["dim"] = dim();
    j["sensitive_indices"] = sensitive;
    nlohmann::json rows_json = nlohmann::json::array();
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(rows.cols()));
        for (Eigen::Index jj = 0; jj < rows.cols(); ++jj) {
            row[static_cast<std::size_t>(jj)] = rows(i, jj);
        }
        rows_json.push_back(row);
    }
    j["rows"] = rows_json;
    std::vector<double> means(static_cast<std::size_t>(column_means.size()));
    for (Eigen::Index i = 0; i < column_means.size(); ++i) {
        means[static_cast<std::size_t>(i)] = column_means(i);
    }
    j["column_means"] = means;
    j["warnings"] = warnings;
    return j;
}

TransitionMatrix TransitionMatrix::from_json(const nlohmann::json& j) {
    TransitionMatrix A;
    const int n = j.at("dim").get<int>();
    A.sensitive = j.at("sensitive_indices").get<std::vector<int>>();
    A.rows.resize(n, n);
    const auto& rows_json = j.at("rows");
    if (static_cast<int>(rows_json.size()) != n) {
        throw ConfigError("transition JSON: row count mismatch");
    }
    for (int i = 0; i < n; ++i) {
        const auto row = rows_json.at(i).get<std::vector<double>>();
        if (static_cast<int>(row.size()) != n) {
            throw ConfigError("transition JSON: column count mismatch");
        }
        for (int jj = 0; jj < n; ++jj) A.rows(i, jj) = row[static_cast<std::size_t>(jj)];
    }
    const auto means = j.at("column_means").get<std::vector<double>>();
    A.column_means.resize(static_cast<Eigen::Index>(means.size()));
    for (std::size_t i = 0; i < means.size(); ++i) {
        A.column_means(static_cast<Eigen::Index>(i)) = means[i];
    }
    if (j.contains("warnings")) {
        A.warnings = j.at("warnings").get<std::vector<std::string>>();
    }
    return A;
}

}  // namespace fairdec
