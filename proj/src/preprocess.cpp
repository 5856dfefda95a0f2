#include "dmchain/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "dmchain/error.hpp"

namespace dmchain::preprocess {

Dataset drop_missing_rows(const Dataset& d) {
    Dataset out;
    out.schema = d.schema;
    for (const auto& r : d.rows) {
        bool keep = true;
        for (std::size_t j = 0; j < r.values.size() && keep; ++j) {
            const auto& cell = r.values[j];
            if (std::holds_alternative<std::monostate>(cell))
                keep = false;
            else if (d.schema.features[j].zero_is_missing && std::get<double>(cell) == 0.0)
                keep = false;
        }
        if (keep)
            out.rows.push_back(r);
    }
    if (out.rows.empty())
        throw PreprocessError("every row has a missing value");
    return out;
}

int binary_token_value(std::string_view token) {
    std::string t(token);
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "yes" || t == "male" || t == "m" || t == "1" || t == "true")
        return 1;
    if (t == "no" || t == "female" || t == "f" || t == "0" || t == "false")
        return 0;
    throw EncodingError("unknown binary token '" + std::string(token) + "'");
}

namespace {

double binary_cell(const Cell& c, const std::string& feature) {
    if (const auto* s = std::get_if<std::string>(&c))
        return binary_token_value(*s);
    if (const auto* v = std::get_if<double>(&c)) {
        if (*v == 0.0 || *v == 1.0)
            return *v;
        throw EncodingError("binary feature '" + feature + "' holds " + format_double(*v));
    }
    throw EncodingError("binary feature '" + feature + "' is absent");
}

} // namespace

CategoricalEncoder CategoricalEncoder::fit(const Dataset& d) {
    CategoricalEncoder enc;
    enc.schema_ = d.schema;
    for (std::size_t j = 0; j < d.schema.features.size(); ++j) {
        const auto& f = d.schema.features[j];
        if (f.kind != FeatureKind::Categorical)
            continue;
        std::set<std::string> lv;
        for (const auto& r : d.rows)
            if (const auto* s = std::get_if<std::string>(&r.values[j]))
                lv.insert(*s);
        enc.levels_[f.name] = {lv.begin(), lv.end()};
    }
    enc.build_columns();
    return enc;
}

CategoricalEncoder CategoricalEncoder::from_parts(DatasetSchema schema,
                                                  std::map<std::string, std::vector<std::string>> levels) {
    CategoricalEncoder enc;
    enc.schema_ = std::move(schema);
    enc.levels_ = std::move(levels);
    enc.build_columns();
    return enc;
}

void CategoricalEncoder::build_columns() {
    columns_.clear();
    for (const auto& f : schema_.features) {
        if (f.kind == FeatureKind::Categorical) {
            for (const auto& level : levels_.at(f.name))
                columns_.push_back(f.name + "_" + level);
        } else {
            columns_.push_back(f.name);
        }
    }
}

std::vector<double> CategoricalEncoder::apply_record(const std::vector<Cell>& values) const {
    if (values.size() != schema_.features.size())
        throw EncodingError("record has " + std::to_string(values.size()) + " values, expected " +
                            std::to_string(schema_.features.size()));
    std::vector<double> out;
    out.reserve(columns_.size());
    for (std::size_t j = 0; j < schema_.features.size(); ++j) {
        const auto& f = schema_.features[j];
        const auto& c = values[j];
        switch (f.kind) {
        case FeatureKind::Numeric: {
            const auto* v = std::get_if<double>(&c);
            if (!v)
                throw EncodingError("numeric feature '" + f.name + "' is absent or not a number");
            out.push_back(*v);
            break;
        }
        case FeatureKind::Binary:
            out.push_back(binary_cell(c, f.name));
            break;
        case FeatureKind::Categorical: {
            const auto* s = std::get_if<std::string>(&c);
            if (!s)
                throw EncodingError("categorical feature '" + f.name + "' is absent");
            const auto& lv = levels_.at(f.name);
            auto it = std::find(lv.begin(), lv.end(), *s);
            if (it == lv.end())
                throw EncodingError("unseen level '" + *s + "' for feature '" + f.name + "'");
            for (auto l = lv.begin(); l != lv.end(); ++l)
                out.push_back(l == it ? 1.0 : 0.0);
            break;
        }
        }
    }
    return out;
}

FeatureMatrix CategoricalEncoder::apply(const Dataset& d) const {
    if (d.schema.features.size() != schema_.features.size())
        throw EncodingError("dataset schema does not match the encoder");
    FeatureMatrix m;
    m.column_names = columns_;
    m.values.reserve(d.rows.size() * columns_.size());
    m.labels.reserve(d.rows.size());
    for (const auto& r : d.rows) {
        auto x = apply_record(r.values);
        m.values.insert(m.values.end(), x.begin(), x.end());
        m.labels.push_back(r.positive ? 1 : 0);
    }
    return m;
}

FeatureMatrix encode_categoricals(const Dataset& d) { return CategoricalEncoder::fit(d).apply(d); }

NormalizerParams fit_normalizer(const FeatureMatrix& train) {
    if (train.rows() == 0)
        throw PreprocessError("cannot fit a normalizer on an empty matrix");
    NormalizerParams p;
    p.columns = train.column_names;
    p.min.assign(train.cols(), 0.0);
    p.max.assign(train.cols(), 0.0);
    for (std::size_t j = 0; j < train.cols(); ++j) {
        double lo = train.at(0, j), hi = lo;
        for (std::size_t i = 1; i < train.rows(); ++i) {
            lo = std::min(lo, train.at(i, j));
            hi = std::max(hi, train.at(i, j));
        }
        p.min[j] = lo;
        p.max[j] = hi;
    }
    return p;
}

void apply_normalizer_inplace(std::span<double> row, const NormalizerParams& p) {
    if (row.size() != p.min.size())
        throw PreprocessError("row width does not match normalizer");
    for (std::size_t j = 0; j < row.size(); ++j) {
        const double range = p.max[j] - p.min[j];
        row[j] = range > 0.0 ? (row[j] - p.min[j]) / range : 0.0;
    }
}

FeatureMatrix apply_normalizer(const FeatureMatrix& m, const NormalizerParams& p) {
    if (m.column_names != p.columns)
        throw PreprocessError("matrix columns do not match normalizer columns");
    FeatureMatrix out = m;
    for (std::size_t i = 0; i < out.rows(); ++i)
        apply_normalizer_inplace(out.row(i), p);
    return out;
}

SplitIndices stratified_holdout_indices(const std::vector<int>& labels, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw SplitError("train_fraction must lie strictly between 0 and 1");
    std::mt19937_64 rng(seed);
    SplitIndices out;
    for (int cls : {1, 0}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls)
                members.push_back(i);
        if (members.size() < 2)
            throw SplitError("class " + std::to_string(cls) + " has fewer than 2 rows");
        std::shuffle(members.begin(), members.end(), rng);
        // The epsilon keeps products like 0.7 * 30 from flooring to 20.
        const auto n_train =
            static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(members.size()) + 1e-9));
        out.train.insert(out.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.test.insert(out.test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

Split stratified_holdout_split(const FeatureMatrix& m, double train_fraction, std::uint64_t seed) {
    const auto idx = stratified_holdout_indices(m.labels, train_fraction, seed);
    return {m.take_rows(idx.train), m.take_rows(idx.test)};
}

} // namespace dmchain::preprocess
