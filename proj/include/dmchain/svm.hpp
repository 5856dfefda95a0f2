#pragma once

#include <span>
#include <vector>

#include "dmchain/matrix.hpp"
#include "dmchain/parallel.hpp"

namespace dmchain::models {

struct SvmConfig {
    double C = 1.0;
    int degree = 3;
    double coef0 = 1.0;
    double tol = 1e-3; ///< maximal KKT violation accepted at termination
    std::size_t max_iter = 0; ///< 0 selects max(10'000'000, 100 n)
    std::size_t cache_mb = 256;

    void validate() const; ///< throws ConfigError
    friend bool operator==(const SvmConfig&, const SvmConfig&) = default;
};

/// (u . v + coef0)^degree
double polynomial_kernel(std::span<const double> u, std::span<const double> v, int degree, double coef0) noexcept;

/// Dense n x n Gram matrix, row-major.
std::vector<double> kernel_matrix(const FeatureMatrix& m, int degree, double coef0, Exec exec = Exec::Parallel);

struct SvmModel {
    std::size_t n_features = 0;
    std::vector<double> support_vectors; ///< row-major, n_support x n_features
    std::vector<double> dual_coef;       ///< alpha_i * y_i per support vector
    double bias = 0.0;
    int degree = 3;
    double coef0 = 1.0;
    double C = 1.0;
    bool converged = false;
    std::size_t iterations = 0;
    double dual_objective = 0.0; ///< sum alpha - 1/2 alpha' Q alpha at the solution

    std::size_t n_support() const noexcept { return dual_coef.size(); }
    std::span<const double> support_vector(std::size_t k) const noexcept {
        return {support_vectors.data() + k * n_features, n_features};
    }
    /// sum_i alpha_i y_i K(x_i, x) + b
    double decision_value(std::span<const double> x) const;
    /// Positive when the decision value is >= 0.
    int predict(std::span<const double> x) const { return decision_value(x) >= 0.0 ? 1 : 0; }
};

struct SvmTrainResult {
    SvmModel model;
    std::vector<double> alpha; ///< one multiplier per training row
    std::vector<double> y;     ///< training labels mapped to -1/+1
};

/// Soft-margin dual solved by SMO with second-order working-set selection.
/// Stops when the maximal violating pair gap drops below cfg.tol.
SvmTrainResult train_svm_detailed(const FeatureMatrix& m, const SvmConfig& cfg, Exec exec = Exec::Parallel);

inline SvmModel train_svm(const FeatureMatrix& m, const SvmConfig& cfg, Exec exec = Exec::Parallel) {
    return train_svm_detailed(m, cfg, exec).model;
}

} // namespace dmchain::models
