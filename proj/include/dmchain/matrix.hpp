#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dmchain {

/// Dense row-major numeric design matrix with binary labels (1 = positive).
struct FeatureMatrix {
    std::vector<std::string> column_names;
    std::vector<double> values;
    std::vector<int> labels;

    FeatureMatrix() = default;
    FeatureMatrix(std::vector<std::string> names, std::size_t rows);

    std::size_t rows() const noexcept { return labels.size(); }
    std::size_t cols() const noexcept { return column_names.size(); }

    std::span<const double> row(std::size_t i) const noexcept { return {values.data() + i * cols(), cols()}; }
    std::span<double> row(std::size_t i) noexcept { return {values.data() + i * cols(), cols()}; }
    double at(std::size_t i, std::size_t j) const noexcept { return values[i * cols() + j]; }
    double& at(std::size_t i, std::size_t j) noexcept { return values[i * cols() + j]; }

    std::size_t count_positive() const noexcept;
    std::size_t count_negative() const noexcept { return rows() - count_positive(); }

    void push_row(std::span<const double> x, int label);

    /// Rows in the given order.
    FeatureMatrix take_rows(std::span<const std::size_t> idx) const;
    /// Columns in the given order.
    FeatureMatrix take_cols(std::span<const std::size_t> idx) const;
    /// Columns by name; throws ConfigError for an unknown name.
    FeatureMatrix select_columns(std::span<const std::string> names) const;

    /// Throws DomainError on non-finite entries or inconsistent shape.
    void validate() const;

    friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

/// FNV-1a over the exact bytes of names, values and labels; used to assert a
/// partition was not touched.
std::uint64_t fingerprint(const FeatureMatrix& m) noexcept;

} // namespace dmchain
