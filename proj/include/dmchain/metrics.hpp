#pragma once

#include <span>
#include <string>
#include <vector>

#include "dmchain/model.hpp"

namespace dmchain::eval {

struct ConfusionMatrix {
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

    std::size_t total() const noexcept { return tp + tn + fp + fn; }
    ConfusionMatrix& operator+=(const ConfusionMatrix& o) noexcept;
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Labels and predictions are 0/1; throws DomainError on length mismatch.
ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted);

/// A metric whose denominator is zero is reported as 0 and its name listed in
/// `undefined`.
struct MetricSet {
    double accuracy = 0.0;
    double precision_pos = 0.0;
    double precision_neg = 0.0;
    double recall_pos = 0.0;
    double recall_neg = 0.0;
    double f_measure = 0.0; ///< positive class
    std::vector<std::string> undefined;

    bool is_undefined(std::string_view name) const noexcept;
};

/// Throws DomainError on an empty matrix.
MetricSet classification_metrics(const ConfusionMatrix& cm);

/// Trapezoidal ROC area; tied scores cross the threshold together, so the
/// result equals P(s+ > s-) + P(s+ == s-)/2. Throws DomainError unless both
/// classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct EvaluationReport {
    ConfusionMatrix confusion;
    MetricSet metrics;
    double auc = 0.0;
    double train_seconds = 0.0;
    std::string config;
};

/// Scores every row of `test` with `model`.
EvaluationReport evaluate_model(const models::AnyModel& model, const FeatureMatrix& test);

} // namespace dmchain::eval
