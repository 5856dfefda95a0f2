#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dmchain/parallel.hpp"
#include "dmchain/tree.hpp"

namespace dmchain::models {

struct ForestConfig {
    std::size_t n_estimators = 100;
    Criterion criterion = Criterion::Gini;
    MaxFeatures max_features = MaxFeatures::Sqrt;
    std::optional<std::size_t> max_depth;
    std::uint64_t seed = 0;

    void validate() const; ///< throws ConfigError
    friend bool operator==(const ForestConfig&, const ForestConfig&) = default;
};

/// Bagged CART trees. Tree t is grown from a bootstrap sample of n draws with
/// replacement using an RNG seeded by mix_seed(seed, t), so the parallel and
/// serial trainers produce identical forests.
class RandomForest {
public:
    RandomForest() = default;

    static RandomForest train(const FeatureMatrix& m, const ForestConfig& cfg, Exec exec = Exec::Parallel);
    static RandomForest from_trees(ForestConfig cfg, std::vector<DecisionTree> trees, std::size_t n_features);

    bool trained() const noexcept { return !trees_.empty(); }

    /// Fraction of trees voting positive.
    double predict_proba(std::span<const double> x) const;
    /// Even split of votes resolves to the positive class.
    int predict(std::span<const double> x) const { return predict_proba(x) >= 0.5 ? 1 : 0; }
    std::vector<double> predict_proba_batch(const FeatureMatrix& m, Exec exec = Exec::Parallel) const;

    /// Mean decrease in impurity: per-tree decreases normalised to sum 1,
    /// averaged over trees, renormalised. All zeros if no tree ever split.
    /// Throws StateError on an untrained forest.
    std::vector<double> impurity_importance() const;

    const ForestConfig& config() const noexcept { return cfg_; }
    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
    std::size_t n_features() const noexcept { return n_features_; }

    friend bool operator==(const RandomForest&, const RandomForest&) = default;

private:
    ForestConfig cfg_;
    std::vector<DecisionTree> trees_;
    std::size_t n_features_ = 0;
};

} // namespace dmchain::models
