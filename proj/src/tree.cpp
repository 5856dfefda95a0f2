#include "dmchain/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dmchain/error.hpp"

namespace dmchain::models {

std::string_view to_string(Criterion c) noexcept { return c == Criterion::Gini ? "gini" : "entropy"; }

std::string_view to_string(MaxFeatures m) noexcept {
    switch (m) {
    case MaxFeatures::All: return "all";
    case MaxFeatures::Sqrt: return "sqrt";
    case MaxFeatures::Log2: return "log2";
    }
    return "?";
}

Criterion parse_criterion(std::string_view s) {
    if (s == "gini")
        return Criterion::Gini;
    if (s == "entropy")
        return Criterion::Entropy;
    throw ConfigError("unknown split criterion '" + std::string(s) + "'");
}

MaxFeatures parse_max_features(std::string_view s) {
    if (s == "all" || s == "none" || s == "None")
        return MaxFeatures::All;
    if (s == "sqrt")
        return MaxFeatures::Sqrt;
    if (s == "log2")
        return MaxFeatures::Log2;
    throw ConfigError("unknown max_features '" + std::string(s) + "'");
}

std::size_t resolve_max_features(MaxFeatures m, std::size_t n) noexcept {
    if (n == 0)
        return 0;
    std::size_t k = n;
    if (m == MaxFeatures::Sqrt)
        k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
    else if (m == MaxFeatures::Log2)
        k = static_cast<std::size_t>(std::log2(static_cast<double>(n)));
    return std::clamp<std::size_t>(k, 1, n);
}

double impurity(Criterion c, double neg, double pos) noexcept {
    const double total = neg + pos;
    if (total <= 0.0)
        return 0.0;
    const double pn = neg / total;
    const double pp = pos / total;
    if (c == Criterion::Gini)
        return 1.0 - pn * pn - pp * pp;
    double h = 0.0;
    if (pn > 0.0)
        h -= pn * std::log2(pn);
    if (pp > 0.0)
        h -= pp * std::log2(pp);
    return h;
}

namespace {

struct Candidate {
    double decrease = -1.0;
    int feature = -1;
    double threshold = 0.0;
};

class Builder {
public:
    Builder(const FeatureMatrix& m, std::span<const double> w, const TreeConfig& cfg, std::mt19937_64& rng)
        : m_(m), w_(w), cfg_(cfg), rng_(rng), features_(m.cols()) {
        std::iota(features_.begin(), features_.end(), 0);
        for (std::size_t i = 0; i < m.rows(); ++i)
            if (w[i] > 0.0)
                rows_.push_back(i);
        mtry_ = resolve_max_features(cfg.max_features, m.cols());
    }

    std::vector<TreeNode> build() {
        struct Task {
            std::size_t begin, end, depth;
            int parent;
            bool left;
        };
        std::vector<Task> stack{{0, rows_.size(), 0, -1, false}};
        while (!stack.empty()) {
            const Task t = stack.back();
            stack.pop_back();

            TreeNode node;
            node.depth = t.depth;
            for (std::size_t i = t.begin; i < t.end; ++i)
                (m_.labels[rows_[i]] == 1 ? node.positives : node.negatives) += w_[rows_[i]];
            node.impurity = impurity(cfg_.criterion, node.negatives, node.positives);
            const int index = static_cast<int>(nodes_.size());
            if (t.parent >= 0)
                (t.left ? nodes_[t.parent].left : nodes_[t.parent].right) = index;

            const bool depth_capped = cfg_.max_depth && t.depth >= *cfg_.max_depth;
            const bool pure = node.negatives == 0.0 || node.positives == 0.0;
            Candidate best;
            if (!pure && !depth_capped && t.end - t.begin >= cfg_.min_samples_split)
                best = find_split(t.begin, t.end, node);
            if (best.feature < 0) {
                nodes_.push_back(node);
                continue;
            }
            node.feature = best.feature;
            node.threshold = best.threshold;
            nodes_.push_back(node);

            const auto f = static_cast<std::size_t>(best.feature);
            auto mid = std::partition(rows_.begin() + static_cast<std::ptrdiff_t>(t.begin),
                                      rows_.begin() + static_cast<std::ptrdiff_t>(t.end),
                                      [&](std::size_t r) { return m_.at(r, f) <= best.threshold; });
            const auto split = static_cast<std::size_t>(mid - rows_.begin());
            // Right pushed first so the left subtree is laid out first.
            stack.push_back({split, t.end, t.depth + 1, index, false});
            stack.push_back({t.begin, split, t.depth + 1, index, true});
        }
        return std::move(nodes_);
    }

private:
    Candidate find_split(std::size_t begin, std::size_t end, const TreeNode& node) {
        const double total = node.negatives + node.positives;
        const double parent = node.impurity;
        Candidate best;
        std::size_t visited = 0;
        // Partial Fisher-Yates: draw features until mtry non-constant ones
        // were examined or the pool is exhausted.
        for (std::size_t k = 0; k < features_.size() && visited < mtry_; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, features_.size() - 1);
            std::swap(features_[k], features_[pick(rng_)]);
            const std::size_t f = features_[k];

            scratch_.clear();
            for (std::size_t i = begin; i < end; ++i)
                scratch_.emplace_back(m_.at(rows_[i], f), rows_[i]);
            std::sort(scratch_.begin(), scratch_.end());
            if (scratch_.front().first == scratch_.back().first)
                continue;
            ++visited;

            double ln = 0.0, lp = 0.0;
            for (std::size_t i = 0; i + 1 < scratch_.size(); ++i) {
                const auto r = scratch_[i].second;
                (m_.labels[r] == 1 ? lp : ln) += w_[r];
                const double x0 = scratch_[i].first;
                const double x1 = scratch_[i + 1].first;
                if (!(x1 > x0))
                    continue;
                const double wl = ln + lp;
                const double wr = total - wl;
                const double dec = parent - (wl / total) * impurity(cfg_.criterion, ln, lp) -
                                   (wr / total) * impurity(cfg_.criterion, node.negatives - ln, node.positives - lp);
                if (dec > best.decrease) {
                    double thr = x0 + (x1 - x0) / 2.0;
                    if (!(thr < x1))
                        thr = x0;
                    best = {dec, static_cast<int>(f), thr};
                }
            }
        }
        return best;
    }

    const FeatureMatrix& m_;
    std::span<const double> w_;
    const TreeConfig& cfg_;
    std::mt19937_64& rng_;
    std::vector<std::size_t> features_;
    std::vector<std::size_t> rows_;
    std::vector<std::pair<double, std::size_t>> scratch_;
    std::vector<TreeNode> nodes_;
    std::size_t mtry_ = 1;
};

} // namespace

DecisionTree DecisionTree::fit(const FeatureMatrix& m, std::span<const double> weights, const TreeConfig& cfg,
                               std::mt19937_64& rng) {
    if (weights.size() != m.rows())
        throw DomainError("weight vector length does not match row count");
    if (m.cols() == 0)
        throw DomainError("cannot grow a tree without features");
    DecisionTree t;
    t.n_features_ = m.cols();
    t.nodes_ = Builder(m, weights, cfg, rng).build();
    return t;
}

DecisionTree DecisionTree::from_nodes(std::vector<TreeNode> nodes, std::size_t n_features) {
    const auto n = static_cast<int>(nodes.size());
    for (const auto& node : nodes)
        if (!node.is_leaf() && (node.left <= 0 || node.right <= 0 || node.left >= n || node.right >= n ||
                                node.feature >= static_cast<int>(n_features)))
            throw DomainError("malformed tree node array");
    if (nodes.empty())
        throw DomainError("tree has no nodes");
    DecisionTree t;
    t.nodes_ = std::move(nodes);
    t.n_features_ = n_features;
    return t;
}

double DecisionTree::positive_fraction(std::span<const double> x) const {
    if (nodes_.empty())
        throw StateError("tree is not trained");
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& n = nodes_[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    const auto& leaf = nodes_[i];
    const double total = leaf.negatives + leaf.positives;
    return total > 0.0 ? leaf.positives / total : 0.0;
}

std::vector<double> DecisionTree::impurity_decrease() const {
    std::vector<double> imp(n_features_, 0.0);
    if (nodes_.empty())
        return imp;
    const double root = nodes_[0].negatives + nodes_[0].positives;
    for (const auto& n : nodes_) {
        if (n.is_leaf())
            continue;
        const auto& l = nodes_[static_cast<std::size_t>(n.left)];
        const auto& r = nodes_[static_cast<std::size_t>(n.right)];
        const double w = n.negatives + n.positives;
        const double wl = l.negatives + l.positives;
        const double wr = r.negatives + r.positives;
        imp[static_cast<std::size_t>(n.feature)] += (w * n.impurity - wl * l.impurity - wr * r.impurity) / root;
    }
    return imp;
}

std::size_t DecisionTree::depth() const noexcept {
    std::size_t d = 0;
    for (const auto& n : nodes_)
        d = std::max(d, n.depth);
    return d;
}

} // namespace dmchain::models
