#include "dmchain/forest.hpp"

#include <numeric>
#include <random>

#include "dmchain/error.hpp"

namespace dmchain::models {

void ForestConfig::validate() const {
    if (n_estimators == 0)
        throw ConfigError("n_estimators must be at least 1");
    if (max_depth && *max_depth == 0)
        throw ConfigError("max_depth must be at least 1 when set");
}

namespace {

DecisionTree grow_one(const FeatureMatrix& m, const ForestConfig& cfg, std::size_t t) {
    std::mt19937_64 rng(mix_seed(cfg.seed, t));
    std::vector<double> weights(m.rows(), 0.0);
    std::uniform_int_distribution<std::size_t> draw(0, m.rows() - 1);
    for (std::size_t i = 0; i < m.rows(); ++i)
        weights[draw(rng)] += 1.0;
    const TreeConfig tc{cfg.criterion, cfg.max_features, cfg.max_depth, 2};
    return DecisionTree::fit(m, weights, tc, rng);
}

} // namespace

RandomForest RandomForest::train(const FeatureMatrix& m, const ForestConfig& cfg, Exec exec) {
    cfg.validate();
    if (m.rows() == 0)
        throw TrainError("cannot train a forest on an empty matrix");
    RandomForest f;
    f.cfg_ = cfg;
    f.n_features_ = m.cols();
    f.trees_.resize(cfg.n_estimators);
    const auto n = static_cast<std::ptrdiff_t>(cfg.n_estimators);
    if (exec == Exec::Parallel && !in_parallel_region()) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t t = 0; t < n; ++t)
            f.trees_[static_cast<std::size_t>(t)] = grow_one(m, cfg, static_cast<std::size_t>(t));
    } else {
        for (std::ptrdiff_t t = 0; t < n; ++t)
            f.trees_[static_cast<std::size_t>(t)] = grow_one(m, cfg, static_cast<std::size_t>(t));
    }
    return f;
}

RandomForest RandomForest::from_trees(ForestConfig cfg, std::vector<DecisionTree> trees, std::size_t n_features) {
    RandomForest f;
    f.cfg_ = std::move(cfg);
    f.trees_ = std::move(trees);
    f.n_features_ = n_features;
    return f;
}

double RandomForest::predict_proba(std::span<const double> x) const {
    if (trees_.empty())
        throw StateError("forest is not trained");
    if (x.size() != n_features_)
        throw DomainError("input has " + std::to_string(x.size()) + " features, forest expects " +
                          std::to_string(n_features_));
    std::size_t votes = 0;
    for (const auto& t : trees_)
        votes += static_cast<std::size_t>(t.vote(x));
    return static_cast<double>(votes) / static_cast<double>(trees_.size());
}

std::vector<double> RandomForest::predict_proba_batch(const FeatureMatrix& m, Exec exec) const {
    std::vector<double> out(m.rows());
    const auto n = static_cast<std::ptrdiff_t>(m.rows());
    if (exec == Exec::Parallel && !in_parallel_region()) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] = predict_proba(m.row(static_cast<std::size_t>(i)));
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] = predict_proba(m.row(static_cast<std::size_t>(i)));
    }
    return out;
}

std::vector<double> RandomForest::impurity_importance() const {
    if (trees_.empty())
        throw StateError("forest is not trained");
    std::vector<double> total(n_features_, 0.0);
    for (const auto& t : trees_) {
        auto dec = t.impurity_decrease();
        const double s = std::accumulate(dec.begin(), dec.end(), 0.0);
        if (s <= 0.0)
            continue;
        for (std::size_t j = 0; j < dec.size(); ++j)
            total[j] += dec[j] / s;
    }
    const double s = std::accumulate(total.begin(), total.end(), 0.0);
    if (s > 0.0)
        for (auto& v : total)
            v /= s;
    return total;
}

} // namespace dmchain::models
