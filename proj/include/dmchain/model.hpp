#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dmchain/forest.hpp"
#include "dmchain/logistic.hpp"
#include "dmchain/svm.hpp"

namespace dmchain::models {

enum class Algorithm { RandomForest, LogisticRegression, Svm };

/// "rf", "lr", "svm"
std::string_view to_string(Algorithm a) noexcept;
/// Accepts the short names and "random_forest", "logistic_regression". Throws ConfigError.
Algorithm parse_algorithm(std::string_view s);

using AlgorithmConfig = std::variant<ForestConfig, LogisticConfig, SvmConfig>;
using AnyModel = std::variant<RandomForest, LogisticModel, SvmModel>;

Algorithm algorithm_of(const AlgorithmConfig& c) noexcept;
Algorithm algorithm_of(const AnyModel& m) noexcept;
AlgorithmConfig default_config(Algorithm a);

/// Compact "key=value,..." rendering, stable across runs.
std::string describe(const AlgorithmConfig& c);

AnyModel train_model(const FeatureMatrix& m, const AlgorithmConfig& cfg, Exec exec = Exec::Parallel);

/// Real-valued score: positive probability for RF and LR, signed margin for SVM.
double model_score(const AnyModel& model, std::span<const double> x);
int model_predict(const AnyModel& model, std::span<const double> x);

std::size_t model_feature_count(const AnyModel& model) noexcept;

/// Non-convergence flag of LR/SVM; forests always report true.
bool model_converged(const AnyModel& model) noexcept;

} // namespace dmchain::models
