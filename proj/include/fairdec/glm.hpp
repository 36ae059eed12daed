#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "fairdec/errors.hpp"

namespace fairdec {

struct FittedModel {
    std::vector<std::string> names;  // "(Intercept)" first, then feature names
    Eigen::VectorXd coef;
    Eigen::VectorXd se;
    std::vector<double> p_values;    // two-sided Wald, normal approximation
    bool converged = false;
    int iterations = 0;
    double log_likelihood = 0.0;
    std::vector<double> loglik_trace;  // one entry per certified-improvement step
    std::string diagnostic;            // set when converged is false

    nlohmann::json to_json() const;
    static FittedModel from_json(const nlohmann::json& j);
};

struct FitOptions {
    double tol = 1e-8;     // gradient max-norm stopping rule
    int max_iter = 100;
    double ridge = 1e-10;  // jitter added to a singular information matrix
};

// Exposure-weighted Bernoulli logistic regression fit by Newton iterations
// (IRLS) with step-halving. X holds the feature columns only; the intercept
// is added internally. Weights live in (0,1] (exposure semantics).
// A monotone-likelihood fit comes back with converged=false and a
// diagnostic rather than an exception.
FittedModel fit_weighted_logistic(const Eigen::MatrixXd& X,
                                  std::span<const int> y,
                                  std::span<const double> w,
                                  const std::vector<std::string>& names = {},
                                  const FitOptions& options = {});

// Inverse-logit of the linear predictor for each row of X (features only).
Eigen::VectorXd predict_proba(const FittedModel& model, const Eigen::MatrixXd& X);

struct ThresholdResult {
    double threshold = 0.5;
    double realized_rate = 0.0;  // fraction classified positive at threshold
    bool tie_flagged = false;    // all probabilities equal
};

// Smallest threshold t such that the fraction of probabilities >= t does
// not exceed the target rate; classification rule is p >= t -> 1.
ThresholdResult calibrate_threshold(std::span<const double> probabilities,
                                    double target_rate);

// Mann-Whitney concordance probability with ties counted one half.
// Undefined (empty optional) when y holds a single class.
std::optional<double> roc_auc(std::span<const int> y, std::span<const double> scores);

struct RocPoint {
    double threshold;
    double fpr;
    double tpr;
};

// Points of the ROC curve, one per distinct score, for CSV export.
std::vector<RocPoint> roc_curve(std::span<const int> y, std::span<const double> scores);

// Names retained at level alpha; the intercept is always kept.
std::vector<std::string> select_by_pvalue(const FittedModel& model, double alpha);

}  // namespace fairdec
