#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "dmchain/metrics.hpp"

namespace dmchain::eval {

/// Test-row indices per fold, each ascending. Within each class rows are
/// shuffled with `seed` and dealt round-robin, so per-class counts across
/// folds differ by at most one. Throws CvError if k < 2 or a class has fewer
/// than k rows.
std::vector<std::vector<std::size_t>> stratified_kfold_indices(const std::vector<int>& labels, std::size_t k,
                                                               std::uint64_t seed);

/// Predictions and scores for the rows of one test fold.
struct FoldOutcome {
    std::vector<int> predicted;
    std::vector<double> scores;
};
using FoldFn = std::function<FoldOutcome(const FeatureMatrix& train, const FeatureMatrix& test)>;

struct MeanStd {
    double mean = 0.0;
    double std = 0.0; ///< population standard deviation over folds
};

struct CvSummary {
    std::vector<ConfusionMatrix> fold_confusion;
    std::vector<MetricSet> fold_metrics;
    std::vector<double> fold_auc;
    MeanStd accuracy, precision_pos, precision_neg, recall_pos, recall_neg, f_measure, auc;
};

/// Runs `fn` on every fold (concurrently when exec is Parallel) and merges the
/// results by fold index.
CvSummary stratified_kfold_cv(const FeatureMatrix& m, std::size_t k, std::uint64_t seed, const FoldFn& fn,
                              Exec exec = Exec::Parallel);

/// Trains `cfg` on each training fold.
CvSummary stratified_kfold_cv(const FeatureMatrix& m, std::size_t k, const models::AlgorithmConfig& cfg,
                              std::uint64_t seed, Exec exec = Exec::Parallel);

struct RfGrid {
    std::vector<std::size_t> n_estimators;
    std::vector<models::Criterion> criterion;
    std::vector<models::MaxFeatures> max_features;
    std::vector<std::optional<std::size_t>> max_depth;
};
struct SvmGrid {
    std::vector<double> C;
    std::vector<int> degree{3};
    std::vector<double> coef0{1.0};
};
struct LrGrid {
    std::vector<double> C;
    /// Recorded in reports only; one optimizer is implemented.
    std::vector<std::string> solver{"newton"};
};

struct GridPoint {
    models::AlgorithmConfig config;
    std::string label;
};

struct HyperGrid {
    RfGrid rf;
    SvmGrid svm;
    LrGrid lr;

    void validate() const; ///< throws ConfigError on an empty axis

    /// Cartesian product in declared order; forests get `model_seed`. Throws
    /// ConfigError when an axis of that family is empty.
    std::vector<GridPoint> points(models::Algorithm a, std::uint64_t model_seed) const;

    /// The full candidate lists of the published hyperparameter table (with 50
    /// added to the tree counts).
    static HyperGrid published();
    /// Small grid used by the automated checks.
    static HyperGrid compact();
};

struct GridEntry {
    GridPoint point;
    bool failed = false;
    std::string error;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
};

struct GridResult {
    std::vector<GridEntry> table; ///< declared grid order
    std::size_t best_index = 0;

    const GridEntry& best() const { return table.at(best_index); }
};

/// Scores every point by stratified k-fold mean accuracy on shared folds.
/// The highest score wins, ties go to the earliest point, failed points are
/// excluded. Throws CvError if every point failed.
GridResult grid_search(const FeatureMatrix& m, const HyperGrid& grid, models::Algorithm a, std::size_t k,
                       std::uint64_t seed, Exec exec = Exec::Parallel);

template <class T>
struct Timed {
    T value;
    double seconds;
};

/// Steady-clock duration of `task()`.
template <class F>
auto timed_run(F&& task) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
        std::forward<F>(task)();
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } else {
        auto v = std::forward<F>(task)();
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return Timed<decltype(v)>{std::move(v), s};
    }
}

} // namespace dmchain::eval
