#pragma once

#include <algorithm>
#include <random>

#include "dmchain/pipeline.hpp"

namespace dmtest {

using dmchain::Dataset;
using dmchain::FeatureKind;
using dmchain::Record;
using dmchain::pipeline::PipelineOptions;
namespace models = dmchain::models;

// Numeric, binary and categorical columns; the label depends on "g" and "site".
inline Dataset toy_dataset(std::size_t n, std::uint64_t seed) {
    Dataset d;
    d.schema.features = {{"g", FeatureKind::Numeric, true},
                         {"noise", FeatureKind::Numeric, false},
                         {"smoker", FeatureKind::Binary, false},
                         {"site", FeatureKind::Categorical, false}};
    d.schema.label_name = "y";
    d.schema.positive_label = "1";
    d.schema.negative_label = "0";
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    const char* sites[] = {"north", "south", "east"};
    for (std::size_t i = 0; i < n; ++i) {
        Record r;
        const bool pos = i % 3 == 0; // imbalanced, 1:2
        const int site = static_cast<int>(rng() % 3);
        const double g = 100 + (pos ? 25 : 0) + 12 * z(rng) + (site == 2 ? 8 : 0);
        r.values = {std::max(g, 40.0), z(rng), std::string(rng() % 2 ? "yes" : "no"), std::string(sites[site])};
        r.positive = pos;
        d.rows.push_back(std::move(r));
    }
    // a few missing values to exercise the cleaning stage
    d.rows[1].values[0] = 0.0;
    d.rows[4].values[3] = std::monostate{};
    return d;
}

inline PipelineOptions fast_options(models::Algorithm a = models::Algorithm::RandomForest) {
    PipelineOptions o;
    o.algorithm = a;
    o.grid.rf.n_estimators = {15};
    o.grid.rf.criterion = {models::Criterion::Gini};
    o.grid.rf.max_features = {models::MaxFeatures::Sqrt};
    o.grid.rf.max_depth = {std::nullopt, 4};
    o.grid.lr.C = {0.25, 4};
    o.grid.svm.C = {1};
    o.cv_folds = 3;
    o.rfecv_folds = 3;
    return o;
}

inline dmchain::pipeline::RawRecord record_of(const Dataset& d, std::size_t i) {
    dmchain::pipeline::RawRecord r;
    for (std::size_t f = 0; f < d.schema.features.size(); ++f)
        r[d.schema.features[f].name] = d.rows[i].values[f];
    return r;
}

} // namespace dmtest
