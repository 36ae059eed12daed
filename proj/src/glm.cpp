#include "fairdec/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "fairdec/numerics.hpp"

namespace fairdec {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(q) and log(1-q) evaluated without overflow.
double log_sigmoid(double x) {
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

double weighted_loglik(const Eigen::VectorXd& eta, std::span<const int> y,
                       std::span<const double> w) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double ls = log_sigmoid(eta(i));
        // log(1-q) = log_sigmoid(-eta)
        ll += w[i] * (y[i] == 1 ? ls : log_sigmoid(-eta(i)));
    }
    return ll;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
    Eigen::MatrixXd D(X.rows(), X.cols() + 1);
    D.col(0).setOnes();
    D.rightCols(X.cols()) = X;
    return D;
}

// The information matrix is symmetric by construction; the blocked matrix
// product only delivers that up to rounding, so enforce it before factoring.
Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& H) {
    return 0.5 * (H + H.transpose());
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& H_raw, const Eigen::VectorXd& g,
                          double ridge) {
    const Eigen::MatrixXd H = symmetrized(H_raw);
    try {
        return cholesky_solve(cholesky_factor(H), g);
    } catch (const NotPositiveDefinite&) {
        Eigen::MatrixXd J = H;
        const double bump = ridge * std::max(1.0, H.diagonal().maxCoeff());
        J.diagonal().array() += bump;
        try {
            return cholesky_solve(cholesky_factor(J), g);
        } catch (const NotPositiveDefinite&) {
            throw SingularInformation(
                "fit_weighted_logistic: information matrix is singular even after "
                "ridge jitter");
        }
    }
}

}  // namespace

FittedModel fit_weighted_logistic(const Eigen::MatrixXd& X, std::span<const int> y,
                                  std::span<const double> w,
                                  const std::vector<std::string>& names,
                                  const FitOptions& options) {
    const long n = X.rows();
    const long p = X.cols() + 1;  // design columns including the intercept
    if (static_cast<long>(y.size()) != n || static_cast<long>(w.size()) != n) {
        throw ShapeError("fit_weighted_logistic: X, y and w sizes disagree");
    }
    if (n < p + 1) {
        throw InsufficientData("fit_weighted_logistic: need more rows than columns");
    }
    for (long i = 0; i < n; ++i) {
        if (y[i] != 0 && y[i] != 1) {
            throw DataError("fit_weighted_logistic: responses must lie in {0,1}");
        }
        if (!(w[i] > 0.0 && w[i] <= 1.0)) {
            throw DataError("fit_weighted_logistic: weights must lie in (0,1]");
        }
    }
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (X.col(j).maxCoeff() == X.col(j).minCoeff()) {
            throw ConfigError("fit_weighted_logistic: column " + std::to_string(j) +
                              " is constant; drop it (the intercept is implicit)");
        }
    }

    const Eigen::MatrixXd D = with_intercept(X);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);

    FittedModel model;
    model.names.push_back("(Intercept)");
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        model.names.push_back(j < static_cast<Eigen::Index>(names.size())
                                  ? names[static_cast<std::size_t>(j)]
                                  : "x" + std::to_string(j));
    }

    double ll = weighted_loglik(eta, y, w);
    model.loglik_trace.push_back(ll);
    bool reached_tol = false;

    for (int iter = 0; iter < options.max_iter; ++iter) {
        Eigen::VectorXd q(n);
        Eigen::VectorXd resid(n);
        Eigen::VectorXd curv(n);
        for (long i = 0; i < n; ++i) {
            q(i) = sigmoid(eta(i));
            resid(i) = w[i] * (static_cast<double>(y[i]) - q(i));
            curv(i) = w[i] * q(i) * (1.0 - q(i));
        }
        const Eigen::VectorXd grad = D.transpose() * resid;
        if (grad.cwiseAbs().maxCoeff() < options.tol) {
            reached_tol = true;
            model.iterations = iter;
            break;
        }
        const Eigen::MatrixXd H = D.transpose() * curv.asDiagonal() * D;
        Eigen::VectorXd step = solve_spd(H, grad, options.ridge);
        model.iterations = iter + 1;

        // Near the optimum the quadratic gain 0.5 g'H^{-1}g drops below the
        // rounding noise of the objective; certify nothing there and take
        // the raw Newton step, which keeps contracting the gradient.
        const double predicted_gain = 0.5 * grad.dot(step);
        const double noise = 1e-11 * (1.0 + std::abs(ll));
        if (predicted_gain <= noise) {
            beta += step;
            eta += D * step;
            ll = weighted_loglik(eta, y, w);
            continue;
        }

        // Step-halving keeps the recorded log-likelihood non-decreasing.
        double scale = 1.0;
        double new_ll = ll;
        Eigen::VectorXd new_eta;
        bool improved = false;
        for (int half = 0; half < 40; ++half) {
            new_eta = eta + scale * (D * step);
            new_ll = weighted_loglik(new_eta, y, w);
            if (new_ll >= ll) {
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if (!improved) break;  // no certifiable ascent left at double precision
        beta += scale * step;
        eta = std::move(new_eta);
        ll = new_ll;
        model.loglik_trace.push_back(ll);
    }

    // Monotone likelihood: every row fitted to its own label numerically.
    bool perfectly_fitted = true;
    for (long i = 0; i < n && perfectly_fitted; ++i) {
        const double q = sigmoid(eta(i));
        perfectly_fitted = (y[i] == 0 && q < 1e-6) || (y[i] == 1 && q > 1.0 - 1e-6);
    }
    model.converged = reached_tol && !perfectly_fitted;
    if (perfectly_fitted) {
        model.diagnostic =
            "monotone likelihood: fitted probabilities are numerically 0 or 1 "
            "for every row; the maximum is attained only in the limit";
    } else if (!reached_tol) {
        model.diagnostic = "gradient tolerance not reached within iteration cap";
    }

    model.coef = beta;
    model.log_likelihood = ll;

    // Standard errors from the inverse observed information at the optimum.
    Eigen::VectorXd curv(n);
    for (long i = 0; i < n; ++i) {
        const double q = sigmoid(eta(i));
        curv(i) = w[i] * q * (1.0 - q);
    }
    const Eigen::MatrixXd H =
        symmetrized(D.transpose() * curv.asDiagonal() * D);
    model.se.resize(p);
    try {
        const LowerTriangular chol = cholesky_factor(H);
        for (long j = 0; j < p; ++j) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(p);
            e(j) = 1.0;
            model.se(j) = std::sqrt(cholesky_solve(chol, e)(j));
        }
    } catch (const NotPositiveDefinite&) {
        model.se.setConstant(std::numeric_limits<double>::infinity());
        if (model.diagnostic.empty()) {
            model.diagnostic = "observed information singular at the optimum";
        }
        model.converged = false;
    }
    model.p_values.resize(static_cast<std::size_t>(p));
    for (long j = 0; j < p; ++j) {
        if (!std::isfinite(model.se(j)) || model.se(j) == 0.0) {
            model.p_values[static_cast<std::size_t>(j)] = 1.0;
            continue;
        }
        const double z = std::abs(model.coef(j) / model.se(j));
        model.p_values[static_cast<std::size_t>(j)] = 2.0 * (1.0 - std_normal_cdf(z));
    }
    return model;
}

Eigen::VectorXd predict_proba(const FittedModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() + 1 != model.coef.size()) {
        throw ShapeError("predict_proba: column count does not match the fit");
    }
    // Extreme predictors saturate the sigmoid at double precision; keep the
    // output inside the open interval.
    const double hi = std::nextafter(1.0, 0.0);
    const double lo = std::numeric_limits<double>::min();
    Eigen::VectorXd eta =
        (X * model.coef.tail(model.coef.size() - 1)).array() + model.coef(0);
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        eta(i) = std::clamp(sigmoid(eta(i)), lo, hi);
    }
    return eta;
}

ThresholdResult calibrate_threshold(std::span<const double> probabilities,
                                    double target_rate) {
    if (!(target_rate > 0.0 && target_rate < 1.0)) {
        throw ConfigError("calibrate_threshold: target rate must lie in (0,1)");
    }
    if (probabilities.empty()) {
        throw InsufficientData("calibrate_threshold: no probabilities");
    }
    std::vector<double> sorted(probabilities.begin(), probabilities.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    ThresholdResult result;
    result.tie_flagged = sorted.front() == sorted.back();
    // Candidate thresholds are the distinct probabilities; fraction{p >= t}
    // is non-increasing in t, so take the smallest candidate that fits.
    double chosen = std::nextafter(sorted.back(), 2.0);
    double realized = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i > 0 && sorted[i] == sorted[i - 1]) continue;
        const double frac = static_cast<double>(sorted.size() - i) / n;
        if (frac <= target_rate) {
            chosen = sorted[i];
            realized = frac;
            break;
        }
    }
    result.threshold = chosen;
    result.realized_rate = realized;
    return result;
}

std::optional<double> roc_auc(std::span<const int> y, std::span<const double> scores) {
    if (y.size() != scores.size()) throw ShapeError("roc_auc: length mismatch");
    long pos = 0;
    for (int v : y) pos += v == 1;
    const long neg = static_cast<long>(y.size()) - pos;
    if (pos == 0 || neg == 0) return std::nullopt;

    // Rank-sum formulation with midranks for ties.
    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            if (y[order[k]] == 1) rank_sum_pos += midrank;
        }
        i = j + 1;
    }
    const double auc =
        (rank_sum_pos - 0.5 * static_cast<double>(pos) * static_cast<double>(pos + 1)) /
        (static_cast<double>(pos) * static_cast<double>(neg));
    return auc;
}

std::vector<RocPoint> roc_curve(std::span<const int> y, std::span<const double> scores) {
    if (y.size() != scores.size()) throw ShapeError("roc_curve: length mismatch");
    long pos = 0;
    for (int v : y) pos += v == 1;
    const long neg = static_cast<long>(y.size()) - pos;

    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<RocPoint> points;
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            if (y[order[i]] == 1) ++tp;
            else ++fp;
            ++i;
        }
        points.push_back({s,
                          neg > 0 ? static_cast<double>(fp) / static_cast<double>(neg) : 0.0,
                          pos > 0 ? static_cast<double>(tp) / static_cast<double>(pos) : 0.0});
    }
    return points;
}

std::vector<std::string> select_by_pvalue(const FittedModel& model, double alpha) {
    std::vector<std::string> kept;
    kept.push_back(model.names.at(0));  // intercept retained unconditionally
    for (std::size_t j = 1; j < model.names.size(); ++j) {
        if (model.p_values.at(j) <= alpha) kept.push_back(model.names[j]);
    }
    return kept;
}

FittedModel FittedModel::from_json(const nlohmann::json& j) {
    FittedModel m;
    m.names = j.at("names").get<std::vector<std::string>>();
    const auto coef = j.at("coefficients").get<std::vector<double>>();
    const auto se = j.at("standard_errors").get<std::vector<double>>();
    m.coef.resize(static_cast<Eigen::Index>(coef.size()));
    m.se.resize(static_cast<Eigen::Index>(se.size()));
    for (std::size_t i = 0; i < coef.size(); ++i) m.coef(static_cast<Eigen::Index>(i)) = coef[i];
    for (std::size_t i = 0; i < se.size(); ++i) m.se(static_cast<Eigen::Index>(i)) = se[i];
    m.p_values = j.at("p_values").get<std::vector<double>>();
    const auto& conv = j.at("convergence");
    m.converged = conv.at("converged").get<bool>();
    m.iterations = conv.at("iterations").get<int>();
    m.log_likelihood = conv.at("log_likelihood").get<double>();
    m.diagnostic = conv.value("diagnostic", std::string());
    return m;
}

nlohmann::json FittedModel::to_json() const {
    nlohmann::json j;
    j["names"] = names;
    std::vector<double> coefv(static_cast<std::size_t>(coef.size()));
    std::vector<double> sev(static_cast<std::size_t>(se.size()));
    for (Eigen::Index i = 0; i < coef.size(); ++i) coefv[static_cast<std::size_t>(i)] = coef(i);
    for (Eigen::Index i = 0; i < se.size(); ++i) {
        sev[static_cast<std::size_t>(i)] =
            std::isfinite(se(i)) ? se(i) : std::numeric_limits<double>::max();
    }
    j["coefficients"] = coefv;
    j["standard_errors"] = sev;
    j["p_values"] = p_values;
    j["convergence"] = {{"converged", converged},
                        {"iterations", iterations},
                        {"log_likelihood", log_likelihood}};
    if (!diagnostic.empty()) j["convergence"]["diagnostic"] = diagnostic;
    return j;
}

}  // namespace fairdec
