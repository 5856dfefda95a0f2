#include "dmchain/smote.hpp"

#include <algorithm>
#include <random>

#include "dmchain/error.hpp"

namespace dmchain::smote {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

std::vector<std::size_t> knn_of(const FeatureMatrix& m, const std::vector<std::size_t>& points, std::size_t self,
                                std::size_t k) {
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(points.size() - 1);
    const auto x = m.row(points[self]);
    for (std::size_t q = 0; q < points.size(); ++q)
        if (q != self)
            cand.emplace_back(squared_distance(x, m.row(points[q])), q);
    // (distance, position) ordering; positions follow row order, so ties go to
    // the lower row index.
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i)
        out[i] = cand[i].second;
    return out;
}

} // namespace

std::vector<std::vector<std::size_t>> nearest_neighbors(const FeatureMatrix& m, const std::vector<std::size_t>& points,
                                                        std::size_t k, Exec exec) {
    if (k == 0 || k >= points.size())
        throw ConfigError("k must be at least 1 and smaller than the point count");
    std::vector<std::vector<std::size_t>> out(points.size());
    const auto n = static_cast<std::ptrdiff_t>(points.size());
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] = knn_of(m, points, static_cast<std::size_t>(i), k);
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] = knn_of(m, points, static_cast<std::size_t>(i), k);
    }
    return out;
}

SmoteResult smote_oversample_detailed(const FeatureMatrix& train, const SmoteConfig& cfg, Exec exec) {
    const std::size_t pos = train.count_positive();
    const std::size_t neg = train.rows() - pos;
    if (pos == 0 || neg == 0)
        throw DomainError("SMOTE needs both classes in the training matrix");
    if (cfg.k_neighbors == 0)
        throw ConfigError("k_neighbors must be at least 1");

    SmoteResult res{train, {}};
    if (pos == neg)
        return res;

    const int minority_label = pos < neg ? 1 : 0;
    const std::size_t needed = (pos < neg ? neg : pos) - (pos < neg ? pos : neg);
    std::vector<std::size_t> minority;
    for (std::size_t i = 0; i < train.rows(); ++i)
        if (train.labels[i] == minority_label)
            minority.push_back(i);
    if (minority.size() <= cfg.k_neighbors)
        throw ConfigError("minority class has " + std::to_string(minority.size()) + " rows, needs more than k=" +
                          std::to_string(cfg.k_neighbors));

    const auto nn = nearest_neighbors(train, minority, cfg.k_neighbors, exec);

    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::size_t> pick_base(0, minority.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_nn(0, cfg.k_neighbors - 1);
    std::uniform_real_distribution<double> gap(0.0, 1.0);

    res.matrix.values.reserve((train.rows() + needed) * train.cols());
    std::vector<double> x(train.cols());
    for (std::size_t s = 0; s < needed; ++s) {
        const std::size_t b = pick_base(rng);
        const std::size_t q = nn[b][pick_nn(rng)];
        const double lambda = gap(rng);
        const auto base = train.row(minority[b]);
        const auto other = train.row(minority[q]);
        for (std::size_t j = 0; j < x.size(); ++j)
            x[j] = base[j] + lambda * (other[j] - base[j]);
        res.matrix.push_row(x, minority_label);
        res.origins.push_back({minority[b], minority[q], lambda});
    }
    return res;
}

} // namespace dmchain::smote
