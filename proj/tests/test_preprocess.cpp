#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dmchain/error.hpp"
#include "dmchain/preprocess.hpp"
#include "dmchain/smote.hpp"
#include "support.hpp"

using namespace dmchain;
using namespace dmchain::preprocess;

namespace {

FeatureMatrix matrix_from(std::vector<std::vector<double>> rows, std::vector<int> labels) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < rows.front().size(); ++j)
        names.push_back("c" + std::to_string(j));
    FeatureMatrix m(names, 0);
    for (std::size_t i = 0; i < rows.size(); ++i)
        m.push_row(rows[i], labels[i]);
    return m;
}

Dataset sentinel_dataset(std::mt19937_64& rng, std::size_t n) {
    DatasetSchema s;
    s.features = {{"a", FeatureKind::Numeric, true}, {"b", FeatureKind::Numeric, false}};
    s.label_name = "y";
    s.positive_label = "1";
    s.negative_label = "0";
    Dataset d{s, {}};
    std::uniform_int_distribution<int> pick(0, 4);
    for (std::size_t i = 0; i < n; ++i) {
        Record r;
        r.values = {Cell{static_cast<double>(pick(rng))}, pick(rng) == 0 ? Cell{} : Cell{pick(rng) * 1.5}};
        r.positive = pick(rng) % 2;
        d.rows.push_back(r);
    }
    return d;
}

} // namespace

TEST(DropMissing, PimaCounts) {
    if (!dmtest::have_data("pima.csv"))
        GTEST_SKIP();
    const auto d = drop_missing_rows(load_tabular_dataset(dmtest::data_dir() / "pima.csv", schemas::pima()));
    EXPECT_EQ(d.rows.size(), 532u);
    EXPECT_EQ(d.count_positive(), 177u);
    EXPECT_EQ(d.count_negative(), 355u);
}

TEST(DropMissing, SylhetUnchanged) {
    if (!dmtest::have_data("sylhet.csv"))
        GTEST_SKIP();
    const auto raw = load_tabular_dataset(dmtest::data_dir() / "sylhet.csv", schemas::sylhet());
    EXPECT_EQ(drop_missing_rows(raw).rows, raw.rows);
}

TEST(DropMissing, SurvivorsAreUnalteredSubsequence) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = sentinel_dataset(rng, 30);
        Dataset out;
        try {
            out = drop_missing_rows(d);
        } catch (const PreprocessError&) {
            continue;
        }
        std::size_t j = 0;
        for (const auto& r : out.rows) {
            EXPECT_NE(std::get<double>(r.values[0]), 0.0);
            EXPECT_FALSE(std::holds_alternative<std::monostate>(r.values[1]));
            while (j < d.rows.size() && !(d.rows[j] == r))
                ++j;
            ASSERT_LT(j, d.rows.size()) << "row not found in order";
            ++j;
        }
    }
}

TEST(DropMissing, NoSentinelsIsIdentity) {
    DatasetSchema s;
    s.features = {{"x", FeatureKind::Numeric, false}};
    s.label_name = "y";
    s.positive_label = "1";
    s.negative_label = "0";
    Dataset d{s, {{{Cell{0.0}}, true}, {{Cell{2.0}}, false}}};
    EXPECT_EQ(drop_missing_rows(d).rows, d.rows);
}

TEST(DropMissing, EmptyResultFails) {
    DatasetSchema s;
    s.features = {{"x", FeatureKind::Numeric, true}};
    s.label_name = "y";
    s.positive_label = "1";
    s.negative_label = "0";
    Dataset d{s, {{{Cell{0.0}}, true}}};
    EXPECT_THROW(drop_missing_rows(d), PreprocessError);
}

TEST(Normalizer, Examples) {
    const auto m = matrix_from({{44, 5}, {199, 5}, {121.5, 5}}, {0, 1, 0});
    const auto p = fit_normalizer(m);
    const auto n = apply_normalizer(m, p);
    EXPECT_DOUBLE_EQ(n.at(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(n.at(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(n.at(2, 0), 0.5);
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_EQ(n.at(i, 1), 0.0);
}

TEST(Normalizer, TestRowsMayLeaveRange) {
    const auto train = matrix_from({{0}, {10}}, {0, 1});
    const auto test = matrix_from({{20}, {-5}}, {0, 1});
    const auto n = apply_normalizer(test, fit_normalizer(train));
    EXPECT_DOUBLE_EQ(n.at(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(n.at(1, 0), -0.5);
}

TEST(Normalizer, RangeAndIdempotence) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto m = dmtest::blobs(50, 4, 3.0, seed);
        const auto n = apply_normalizer(m, fit_normalizer(m));
        for (double v : n.values) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
        const auto again = apply_normalizer(n, fit_normalizer(n));
        for (std::size_t k = 0; k < n.values.size(); ++k)
            EXPECT_NEAR(again.values[k], n.values[k], 1e-12);
    }
}

TEST(Encoder, BinaryAndCategorical) {
    DatasetSchema s;
    s.features = {{"Ethnicity", FeatureKind::Categorical, false},
                  {"Gender", FeatureKind::Binary, false},
                  {"Polyuria", FeatureKind::Binary, false}};
    s.label_name = "y";
    s.positive_label = "1";
    s.negative_label = "0";
    Dataset d{s, {}};
    const char* eth[] = {"WHITE", "ASIAN", "OTHER", "WHITE"};
    const char* gender[] = {"Male", "Female", "M", "F"};
    const char* yn[] = {"Yes", "No", "No", "Yes"};
    for (int i = 0; i < 4; ++i)
        d.rows.push_back({{Cell{std::string(eth[i])}, Cell{std::string(gender[i])}, Cell{std::string(yn[i])}}, i % 2 == 0});

    const auto enc = CategoricalEncoder::fit(d);
    const auto m = enc.apply(d);
    const std::vector<std::string> cols{"Ethnicity_ASIAN", "Ethnicity_OTHER", "Ethnicity_WHITE", "Gender", "Polyuria"};
    EXPECT_EQ(m.column_names, cols);
    for (std::size_t i = 0; i < m.rows(); ++i)
        EXPECT_EQ(m.at(i, 0) + m.at(i, 1) + m.at(i, 2), 1.0);
    EXPECT_EQ(m.at(0, 2), 1.0);
    EXPECT_EQ(m.at(0, 3), 1.0);
    EXPECT_EQ(m.at(1, 3), 0.0);
    EXPECT_EQ(m.at(0, 4), 1.0);
    EXPECT_EQ(m.at(1, 4), 0.0);
    EXPECT_EQ(m.labels, (std::vector<int>{1, 0, 1, 0}));

    Dataset unseen = d;
    unseen.rows[0].values[0] = std::string("MARTIAN");
    EXPECT_THROW(enc.apply(unseen), EncodingError);
    unseen = d;
    unseen.rows[0].values[1] = std::string("Maybe");
    EXPECT_THROW(enc.apply(unseen), EncodingError);
}

TEST(Encoder, TokenValues) {
    EXPECT_EQ(binary_token_value("Yes"), 1);
    EXPECT_EQ(binary_token_value("no"), 0);
    EXPECT_EQ(binary_token_value("Male"), 1);
    EXPECT_EQ(binary_token_value("Female"), 0);
    EXPECT_EQ(binary_token_value("TRUE"), 1);
    EXPECT_THROW(binary_token_value("perhaps"), EncodingError);
}

TEST(Encoder, ApplyRecordMatchesApply) {
    DatasetSchema s;
    s.features = {{"c", FeatureKind::Categorical, false}, {"x", FeatureKind::Numeric, false}};
    s.label_name = "y";
    s.positive_label = "1";
    s.negative_label = "0";
    Dataset d{s, {{{Cell{std::string("b")}, Cell{2.5}}, true}, {{Cell{std::string("a")}, Cell{-1.0}}, false}}};
    const auto enc = CategoricalEncoder::fit(d);
    const auto m = enc.apply(d);
    for (std::size_t i = 0; i < d.rows.size(); ++i) {
        const auto row = enc.apply_record(d.rows[i].values);
        EXPECT_TRUE(std::equal(row.begin(), row.end(), m.row(i).begin()));
    }
}

TEST(Split, TenRows) {
    const std::vector<int> labels{1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
    const auto s = stratified_holdout_indices(labels, 0.7, 1);
    EXPECT_EQ(s.train.size(), 6u);
    EXPECT_EQ(s.test.size(), 4u);
    std::size_t pos = 0;
    for (auto i : s.train)
        pos += labels[i];
    EXPECT_EQ(pos, 3u);
}

TEST(Split, PimaShape) {
    std::vector<int> labels(532, 0);
    std::fill(labels.begin(), labels.begin() + 177, 1);
    const auto s = stratified_holdout_indices(labels, 0.7, 9);
    std::size_t pos = 0;
    for (auto i : s.train)
        pos += labels[i];
    EXPECT_EQ(pos, 123u);
    EXPECT_EQ(s.train.size() - pos, 248u);
    EXPECT_EQ(s.train.size(), 371u);
}

TEST(Split, DisjointExhaustiveDeterministic) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> len(4, 200);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = len(rng);
        std::vector<int> labels(n);
        for (int i = 0; i < n; ++i)
            labels[i] = i % 2 == 0 || i % 7 == 0;
        const double frac = 0.3 + 0.6 * (trial % 10) / 10.0;
        const auto a = stratified_holdout_indices(labels, frac, trial);
        const auto b = stratified_holdout_indices(labels, frac, trial);
        EXPECT_EQ(a.train, b.train);
        EXPECT_EQ(a.test, b.test);
        EXPECT_TRUE(std::is_sorted(a.train.begin(), a.train.end()));
        std::vector<int> seen(n, 0);
        for (auto i : a.train)
            ++seen[i];
        for (auto i : a.test)
            ++seen[i];
        EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
        for (int cls : {0, 1}) {
            const auto count = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), cls));
            const auto in_train = static_cast<std::size_t>(
                std::count_if(a.train.begin(), a.train.end(), [&](std::size_t i) { return labels[i] == cls; }));
            EXPECT_EQ(in_train, static_cast<std::size_t>(std::floor(frac * count + 1e-9)));
        }
    }
}

TEST(Split, TinyClassFails) {
    EXPECT_THROW(stratified_holdout_indices({1, 0, 0, 0}, 0.7, 0), SplitError);
}

TEST(Smote, TwoPointSegment) {
    const auto m = matrix_from({{0, 0}, {1, 1}, {5, 5}, {6, 5}, {5, 6}}, {1, 1, 0, 0, 0});
    const auto r = smote::smote_oversample_detailed(m, {1, 3});
    ASSERT_EQ(r.matrix.rows(), 6u);
    EXPECT_EQ(r.matrix.count_positive(), 3u);
    const auto p = r.matrix.row(5);
    EXPECT_DOUBLE_EQ(p[0], p[1]);
    EXPECT_GE(p[0], 0.0);
    EXPECT_LE(p[0], 1.0);
}

TEST(Smote, ParityAndVerbatimOriginals) {
    auto m = dmtest::blobs(532, 3, 1.0, 6, 177.0 / 532.0);
    const auto r = smote::smote_oversample_detailed(m, {5, 1});
    EXPECT_EQ(r.matrix.count_positive(), 355u);
    EXPECT_EQ(r.matrix.count_negative(), 355u);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        EXPECT_TRUE(std::equal(m.row(i).begin(), m.row(i).end(), r.matrix.row(i).begin()));
        EXPECT_EQ(m.labels[i], r.matrix.labels[i]);
    }
}

// Each synthetic row lies on the segment between its recorded parents, and
// the neighbor is among the base point's k nearest minority rows.
TEST(Smote, SyntheticOnParentSegment) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto m = dmtest::blobs(120, 4, 2.0, seed, 0.25);
        const std::size_t k = 1 + seed % 5;
        const auto r = smote::smote_oversample_detailed(m, {k, seed});
        std::vector<std::size_t> minority;
        for (std::size_t i = 0; i < m.rows(); ++i)
            if (m.labels[i] == 1)
                minority.push_back(i);
        ASSERT_EQ(r.origins.size(), r.matrix.rows() - m.rows());
        for (std::size_t s = 0; s < r.origins.size(); ++s) {
            const auto& o = r.origins[s];
            EXPECT_EQ(m.labels[o.base], 1);
            EXPECT_EQ(m.labels[o.neighbor], 1);
            EXPECT_GE(o.lambda, 0.0);
            EXPECT_LE(o.lambda, 1.0);
            const auto row = r.matrix.row(m.rows() + s);
            for (std::size_t j = 0; j < m.cols(); ++j)
                EXPECT_NEAR(row[j], m.at(o.base, j) + o.lambda * (m.at(o.neighbor, j) - m.at(o.base, j)), 1e-12);

            // brute-force kNN oracle
            std::vector<std::pair<double, std::size_t>> dist;
            for (auto i : minority) {
                if (i == o.base)
                    continue;
                double d2 = 0;
                for (std::size_t j = 0; j < m.cols(); ++j)
                    d2 += (m.at(i, j) - m.at(o.base, j)) * (m.at(i, j) - m.at(o.base, j));
                dist.emplace_back(d2, i);
            }
            std::sort(dist.begin(), dist.end());
            bool found = false;
            for (std::size_t q = 0; q < k; ++q)
                found = found || dist[q].second == o.neighbor;
            EXPECT_TRUE(found);
        }
    }
}

TEST(Smote, BalancedIsIdentity) {
    const auto m = dmtest::blobs(40, 2, 1.0, 3);
    EXPECT_EQ(smote::smote_oversample(m, {}), m);
}

TEST(Smote, ConfigErrors) {
    const auto m = matrix_from({{0}, {1}, {2}, {3}, {4}, {5}}, {1, 1, 0, 0, 0, 0});
    EXPECT_THROW(smote::smote_oversample(m, {2, 0}), ConfigError);
    EXPECT_THROW(smote::smote_oversample(m, {0, 0}), ConfigError);
    const auto one_class = matrix_from({{0}, {1}}, {0, 0});
    EXPECT_THROW(smote::smote_oversample(one_class, {1, 0}), DomainError);
}

TEST(Smote, SerialMatchesParallel) {
    const auto m = dmtest::blobs(600, 5, 1.0, 12, 0.2);
    const auto a = smote::smote_oversample(m, {5, 77}, Exec::Serial);
    const auto b = smote::smote_oversample(m, {5, 77}, Exec::Parallel);
    EXPECT_EQ(a, b);
}

TEST(Smote, NeighborsBreakTiesByIndex) {
    // Four equidistant neighbours of the origin.
    const auto m = matrix_from({{0, 0}, {1, 0}, {0, 1}, {-1, 0}, {0, -1}}, {1, 1, 1, 1, 1});
    const auto nn = smote::nearest_neighbors(m, {0, 1, 2, 3, 4}, 2, Exec::Serial);
    EXPECT_EQ(nn[0], (std::vector<std::size_t>{1, 2}));
}

TEST(Pipeline, SplitThenSmoteLeavesTestUntouched) {
    const auto m = dmtest::blobs(300, 4, 1.5, 31, 0.3);
    const auto split = stratified_holdout_split(m, 0.7, 5);
    const auto before = fingerprint(split.test);
    const auto p = fit_normalizer(split.train);
    const auto train = smote::smote_oversample(apply_normalizer(split.train, p), {5, 5});
    (void)train;
    EXPECT_EQ(fingerprint(split.test), before);
}
