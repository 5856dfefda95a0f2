#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dmchain/dataset.hpp"
#include "dmchain/matrix.hpp"

namespace dmchain::preprocess {

/// Removes rows with an absent cell or a zero in any zero_is_missing column.
/// Surviving rows are copied unchanged. Throws PreprocessError if none remain.
Dataset drop_missing_rows(const Dataset& d);

/// Binary tokens: Yes/No, Male/Female, M/F, 1/0, true/false. Categorical
/// columns expand to one indicator per level named "FEATURE_level", levels in
/// sorted order.
class CategoricalEncoder {
public:
    static CategoricalEncoder fit(const Dataset& d);

    /// Throws EncodingError on an unseen level or unknown binary token.
    FeatureMatrix apply(const Dataset& d) const;
    /// Encodes one raw record (labels set to 0).
    std::vector<double> apply_record(const std::vector<Cell>& values) const;

    const std::vector<std::string>& output_columns() const noexcept { return columns_; }
    const DatasetSchema& schema() const noexcept { return schema_; }
    const std::map<std::string, std::vector<std::string>>& levels() const noexcept { return levels_; }

    static CategoricalEncoder from_parts(DatasetSchema schema, std::map<std::string, std::vector<std::string>> levels);

private:
    void build_columns();

    DatasetSchema schema_;
    std::map<std::string, std::vector<std::string>> levels_;
    std::vector<std::string> columns_;
};

/// Shorthand for CategoricalEncoder::fit(d).apply(d).
FeatureMatrix encode_categoricals(const Dataset& d);

/// 1 for Yes/Male/M/1/true (any case), 0 for No/Female/F/0/false.
int binary_token_value(std::string_view token);

struct NormalizerParams {
    std::vector<std::string> columns;
    std::vector<double> min;
    std::vector<double> max;

    friend bool operator==(const NormalizerParams&, const NormalizerParams&) = default;
};

/// Per-column min-max fitted on training rows.
NormalizerParams fit_normalizer(const FeatureMatrix& train);
/// (x - min) / (max - min); a constant column maps to 0. Values outside the
/// fitted range are not clipped.
FeatureMatrix apply_normalizer(const FeatureMatrix& m, const NormalizerParams& p);
void apply_normalizer_inplace(std::span<double> row, const NormalizerParams& p);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Per class, floor(train_fraction * count) rows go to train. Indices are
/// returned in ascending order. Throws SplitError if a class has < 2 rows.
SplitIndices stratified_holdout_indices(const std::vector<int>& labels, double train_fraction, std::uint64_t seed);

struct Split {
    FeatureMatrix train;
    FeatureMatrix test;
};

Split stratified_holdout_split(const FeatureMatrix& m, double train_fraction, std::uint64_t seed);

} // namespace dmchain::preprocess
