#include "dmchain/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "dmchain/error.hpp"

namespace dmchain {

FeatureMatrix::FeatureMatrix(std::vector<std::string> names, std::size_t rows)
    : column_names(std::move(names)), values(rows * column_names.size(), 0.0), labels(rows, 0) {}

std::size_t FeatureMatrix::count_positive() const noexcept {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

void FeatureMatrix::push_row(std::span<const double> x, int label) {
    if (x.size() != cols())
        throw DomainError("row width does not match column count");
    values.insert(values.end(), x.begin(), x.end());
    labels.push_back(label);
}

FeatureMatrix FeatureMatrix::take_rows(std::span<const std::size_t> idx) const {
    FeatureMatrix out;
    out.column_names = column_names;
    out.values.reserve(idx.size() * cols());
    out.labels.reserve(idx.size());
    for (auto i : idx) {
        auto r = row(i);
        out.values.insert(out.values.end(), r.begin(), r.end());
        out.labels.push_back(labels[i]);
    }
    return out;
}

FeatureMatrix FeatureMatrix::take_cols(std::span<const std::size_t> idx) const {
    FeatureMatrix out;
    for (auto j : idx)
        out.column_names.push_back(column_names.at(j));
    out.labels = labels;
    out.values.reserve(rows() * idx.size());
    for (std::size_t i = 0; i < rows(); ++i)
        for (auto j : idx)
            out.values.push_back(at(i, j));
    return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::string> names) const {
    std::vector<std::size_t> idx;
    for (const auto& n : names) {
        auto it = std::find(column_names.begin(), column_names.end(), n);
        if (it == column_names.end())
            throw ConfigError("no column named '" + n + "'");
        idx.push_back(static_cast<std::size_t>(it - column_names.begin()));
    }
    return take_cols(idx);
}

void FeatureMatrix::validate() const {
    if (values.size() != rows() * cols())
        throw DomainError("feature matrix shape mismatch");
    for (double v : values)
        if (!std::isfinite(v))
            throw DomainError("feature matrix contains a non-finite value");
    for (int y : labels)
        if (y != 0 && y != 1)
            throw DomainError("labels must be 0 or 1");
}

std::uint64_t fingerprint(const FeatureMatrix& m) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& n : m.column_names)
        feed(n.data(), n.size() + 1);
    feed(m.values.data(), m.values.size() * sizeof(double));
    feed(m.labels.data(), m.labels.size() * sizeof(int));
    return h;
}

} // namespace dmchain
