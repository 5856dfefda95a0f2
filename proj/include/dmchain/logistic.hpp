#pragma once

#include <span>
#include <vector>

#include "dmchain/matrix.hpp"

namespace dmchain::models {

struct LogisticConfig {
    double C = 1.0;        ///< inverse L2 strength; the intercept is not penalised
    double tol = 1e-6;     ///< stop when the gradient max-norm falls below this
    std::size_t max_iter = 100;

    void validate() const; ///< throws ConfigError
    friend bool operator==(const LogisticConfig&, const LogisticConfig&) = default;
};

struct LogisticModel {
    double intercept = 0.0;
    std::vector<double> coefficients;
    double C = 1.0;
    bool converged = false;
    std::size_t iterations = 0;
    double gradient_norm = 0.0;
    /// Penalised log-likelihood after each accepted step (first entry is the
    /// starting point).
    std::vector<double> objective_trace;

    /// sigmoid(intercept + coefficients . x)
    double predict_proba(std::span<const double> x) const;
    int predict(std::span<const double> x) const { return predict_proba(x) >= 0.5 ? 1 : 0; }
};

/// sum_i [y_i log p_i + (1 - y_i) log(1 - p_i)] - ||beta||^2 / (2C), computed
/// in the overflow-safe softplus form.
double penalized_log_likelihood(const FeatureMatrix& m, double intercept, std::span<const double> coef, double C);

/// Gradient of penalized_log_likelihood: element 0 is d/d intercept, then one
/// entry per coefficient.
std::vector<double> penalized_gradient(const FeatureMatrix& m, double intercept, std::span<const double> coef,
                                       double C);

/// Damped Newton ascent with step halving; falls back to a gradient step when
/// the Newton direction does not improve the objective. Non-convergence is
/// reported through LogisticModel::converged. Throws DomainError on
/// non-finite features.
LogisticModel train_logistic_regression(const FeatureMatrix& m, const LogisticConfig& cfg);

} // namespace dmchain::models
