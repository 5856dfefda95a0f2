#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "dmchain/matrix.hpp"

namespace dmchain::models {

enum class Criterion { Gini, Entropy };
enum class MaxFeatures { All, Sqrt, Log2 };

std::string_view to_string(Criterion c) noexcept;
std::string_view to_string(MaxFeatures m) noexcept;
Criterion parse_criterion(std::string_view s);      ///< throws ConfigError
MaxFeatures parse_max_features(std::string_view s); ///< throws ConfigError

/// Number of candidate features examined per split for n features.
std::size_t resolve_max_features(MaxFeatures m, std::size_t n_features) noexcept;

/// Impurity of a node holding weighted class counts. Gini: 1 - sum p^2.
/// Entropy: -sum p log2 p.
double impurity(Criterion c, double negatives, double positives) noexcept;

struct TreeConfig {
    Criterion criterion = Criterion::Gini;
    MaxFeatures max_features = MaxFeatures::Sqrt;
    std::optional<std::size_t> max_depth;
    std::size_t min_samples_split = 2;
};

/// Leaf when feature < 0. Child indices point into the owning node array.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double negatives = 0.0; ///< weighted class counts reaching the node
    double positives = 0.0;
    double impurity = 0.0;
    std::size_t depth = 0;

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// CART classification tree over weighted rows; x <= threshold goes left.
class DecisionTree {
public:
    DecisionTree() = default;

    /// weights[i] is the multiplicity of row i (0 excludes it). Features
    /// considered at each split are drawn from `rng`; constant features do not
    /// count towards max_features.
    static DecisionTree fit(const FeatureMatrix& m, std::span<const double> weights, const TreeConfig& cfg,
                            std::mt19937_64& rng);

    static DecisionTree from_nodes(std::vector<TreeNode> nodes, std::size_t n_features);

    /// Positive share of the weighted counts in the leaf reached by x.
    double positive_fraction(std::span<const double> x) const;
    /// 1 when the leaf's positive share is at least one half.
    int vote(std::span<const double> x) const { return positive_fraction(x) >= 0.5 ? 1 : 0; }

    /// Sum over internal nodes of w_node*imp - w_left*imp_left - w_right*imp_right,
    /// divided by the root weight, accumulated per feature.
    std::vector<double> impurity_decrease() const;

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    std::size_t n_features() const noexcept { return n_features_; }
    std::size_t depth() const noexcept;

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
    std::vector<TreeNode> nodes_;
    std::size_t n_features_ = 0;
};

} // namespace dmchain::models
