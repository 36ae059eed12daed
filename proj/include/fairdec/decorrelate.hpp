#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "fairdec/errors.hpp"

namespace fairdec {

// Change-of-basis matrix that keeps sensitive columns untouched and replaces
// each non-sensitive column with the minimum-distance combination that is
// uncorrelated with every sensitive column. Sensitive rows are identity
// rows; each non-sensitive row k has nonzeros only at the sensitive
// positions plus a unit entry at (k,k), so the transform amounts to
// residualizing column k on the centered sensitive block.
struct TransitionMatrix {
    Eigen::MatrixXd rows;              // n x n
    std::vector<int> sensitive;        // column indices of the sensitive block
    Eigen::VectorXd column_means;      // captured at fit time, for audit
    std::vector<std::string> warnings;

    int dim() const { return static_cast<int>(rows.rows()); }

    nlohmann::json to_json() const;
    static TransitionMatrix from_json(const nlohmann::json& j);
};

// Fits the transition on a data matrix (one variable per column).
// Covariances are taken on centered columns; rank-deficient sensitive
// blocks fall back to a pseudo-inverse with singular values below
// 1e-10 * sigma_max dropped. Zero-variance non-sensitive columns pass
// through unchanged with a warning.
TransitionMatrix fit_transition(const Eigen::MatrixXd& data,
                                const std::vector<int>& sensitive_indices);

// Applies x' = A x row-wise to raw (uncentered) columns. Sensitive columns
// come back bit-identical.
Eigen::MatrixXd apply_transition(const TransitionMatrix& A,
                                 const Eigen::MatrixXd& data);

// Orthogonalizes a set of columns under the sample-covariance inner
// product. Dependent inputs throw RankDeficient.
std::vector<Eigen::VectorXd> gram_schmidt(const std::vector<Eigen::VectorXd>& vectors);

}  // namespace fairdec
