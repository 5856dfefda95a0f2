#include "dmchain/featsel.hpp"

#include <algorithm>
#include <ostream>

#include "dmchain/error.hpp"
#include "dmchain/validation.hpp"

namespace dmchain::featsel {

std::vector<double> impurity_importance(const models::RandomForest& forest) { return forest.impurity_importance(); }

SelectionResult rfecv_select(const FeatureMatrix& m, std::size_t folds, std::uint64_t seed) {
    RfecvOptions opt;
    opt.folds = folds;
    return rfecv_select(m, seed, opt);
}

namespace {

SelectionResult rfecv_canonical(const FeatureMatrix& m, std::uint64_t seed, const RfecvOptions& opt) {
    const std::size_t n = m.cols();
    if (n < 2)
        throw SelectionError("feature selection needs at least 2 features");
    if (opt.folds < 2)
        throw SelectionError("feature selection needs at least 2 folds");

    models::ForestConfig fc = opt.forest;
    fc.seed = mix_seed(seed, 0xfea7);

    SelectionResult r;
    r.feature_names = m.column_names;
    r.cv_score_curve.assign(n, 0.0);
    r.ranking.assign(n, 0);

    std::vector<std::size_t> current(n);
    for (std::size_t j = 0; j < n; ++j)
        current[j] = j;
    std::vector<std::size_t> eliminated;

    while (!current.empty()) {
        const auto sub = m.take_cols(current);
        try {
            r.cv_score_curve[current.size() - 1] =
                eval::stratified_kfold_cv(sub, opt.folds, fc, seed, opt.exec).accuracy.mean;
        } catch (const CvError& e) {
            throw SelectionError(std::string("cross-validation failed: ") + e.what());
        }
        if (current.size() == 1)
            break;
        const auto forest = models::RandomForest::train(sub, fc, opt.exec);
        const auto imp = forest.impurity_importance();
        if (current.size() == n)
            r.importance = imp;
        std::size_t drop = 0;
        for (std::size_t q = 1; q < current.size(); ++q) {
            if (imp[q] < imp[drop] ||
                (imp[q] == imp[drop] && m.column_names[current[q]] < m.column_names[current[drop]]))
                drop = q;
        }
        eliminated.push_back(current[drop]);
        current.erase(current.begin() + static_cast<std::ptrdiff_t>(drop));
    }
    eliminated.push_back(current.front());

    for (std::size_t k = 0; k < eliminated.size(); ++k)
        r.ranking[eliminated[k]] = eliminated.size() - k;

    r.best_count = 1;
    for (std::size_t c = 2; c <= n; ++c)
        if (r.cv_score_curve[c - 1] > r.cv_score_curve[r.best_count - 1])
            r.best_count = c;
    for (std::size_t j = 0; j < n; ++j)
        if (r.ranking[j] <= r.best_count)
            r.selected_features.push_back(m.column_names[j]);
    return r;
}

} // namespace

// Columns are processed in name order so the forests' feature sampling, and
// hence the result, does not depend on the caller's column order.
SelectionResult rfecv_select(const FeatureMatrix& m, std::uint64_t seed, const RfecvOptions& opt) {
    const std::size_t n = m.cols();
    std::vector<std::size_t> order(n);
    for (std::size_t j = 0; j < n; ++j)
        order[j] = j;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return m.column_names[a] < m.column_names[b]; });
    const auto c = rfecv_canonical(m.take_cols(order), seed, opt);

    SelectionResult r;
    r.feature_names = m.column_names;
    r.cv_score_curve = c.cv_score_curve;
    r.best_count = c.best_count;
    r.ranking.assign(n, 0);
    r.importance.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        r.ranking[order[k]] = c.ranking[k];
        if (k < c.importance.size())
            r.importance[order[k]] = c.importance[k];
    }
    for (std::size_t j = 0; j < n; ++j)
        if (r.ranking[j] <= r.best_count)
            r.selected_features.push_back(m.column_names[j]);
    return r;
}

void write_selection_curve(std::ostream& out, const SelectionResult& r, char sep) {
    out << "n_features" << sep << "cv_accuracy\n";
    for (std::size_t c = 1; c <= r.cv_score_curve.size(); ++c)
        out << c << sep << r.cv_score_curve[c - 1] << '\n';
}

void write_importance(std::ostream& out, const SelectionResult& r, char sep) {
    out << "feature" << sep << "importance" << sep << "rank\n";
    for (std::size_t j = 0; j < r.feature_names.size(); ++j)
        out << r.feature_names[j] << sep << (j < r.importance.size() ? r.importance[j] : 0.0) << sep << r.ranking[j]
            << '\n';
}

} // namespace dmchain::featsel
