#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dmchain/forest.hpp"
#include "dmchain/matrix.hpp"

namespace dmchain::featsel {

/// Mean-decrease-in-impurity importance of a trained forest (see
/// RandomForest::impurity_importance).
std::vector<double> impurity_importance(const models::RandomForest& forest);

struct RfecvOptions {
    std::size_t folds = 10;
    models::ForestConfig forest{}; ///< seed is overwritten per run
    Exec exec = Exec::Parallel;
};

struct SelectionResult {
    std::vector<std::string> feature_names;     ///< input columns
    std::vector<std::string> selected_features; ///< input column order
    std::vector<double> cv_score_curve;         ///< entry c-1 is the score with c features
    std::size_t best_count = 0;
    std::vector<std::size_t> ranking; ///< per input column; 1 = last one eliminated
    std::vector<double> importance;   ///< forest on all input columns
};

/// Recursive elimination: at each feature count the current subset is scored
/// by stratified CV accuracy of a forest, then a forest fitted on all rows
/// drops its least important feature (ties: lexicographically smallest name).
/// Returns the subset at the best count; ties prefer fewer features.
/// Throws SelectionError for < 2 features, folds < 2, or a class too small
/// for the folds.
SelectionResult rfecv_select(const FeatureMatrix& m, std::size_t folds, std::uint64_t seed);
SelectionResult rfecv_select(const FeatureMatrix& m, std::uint64_t seed, const RfecvOptions& opt);

/// "n_features<sep>cv_accuracy" rows, one per count.
void write_selection_curve(std::ostream& out, const SelectionResult& r, char sep = '\t');
/// "feature<sep>importance<sep>rank" rows in input column order.
void write_importance(std::ostream& out, const SelectionResult& r, char sep = '\t');

} // namespace dmchain::featsel
