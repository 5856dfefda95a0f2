#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace dmchain {

enum class FeatureKind { Numeric, Binary, Categorical };

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::Numeric;
    /// Zero encodes "not measured" for this column (PIMA style sentinels).
    bool zero_is_missing = false;
};

struct DatasetSchema {
    std::vector<FeatureSpec> features;
    std::string label_name;
    std::string positive_label;
    std::string negative_label;

    /// Throws ConfigError on duplicate names or zero_is_missing on a
    /// non-numeric column.
    void validate() const;
    std::size_t index_of(std::string_view feature) const; ///< throws ConfigError
};

/// A cell is absent (empty in the source file), numeric, or a raw token.
using Cell = std::variant<std::monostate, double, std::string>;

struct Record {
    std::vector<Cell> values;
    bool positive = false;

    friend bool operator==(const Record&, const Record&) = default;
};

struct Dataset {
    DatasetSchema schema;
    std::vector<Record> rows;

    std::size_t count_positive() const noexcept;
    std::size_t count_negative() const noexcept { return rows.size() - count_positive(); }
};

/// Comma-separated text with a header row whose names equal the schema's
/// feature names followed by the label column. Throws LoadError naming the
/// row and column of the first offending cell.
Dataset load_tabular_dataset(const std::filesystem::path& path, const DatasetSchema& schema);
Dataset parse_tabular_dataset(std::istream& in, const DatasetSchema& schema,
                              const std::string& source = "<stream>");

/// Writes in the format load_tabular_dataset reads back exactly (numbers use
/// the shortest round-trip representation).
void write_tabular_dataset(std::ostream& out, const Dataset& d);
std::string serialize_dataset(const Dataset& d);

namespace schemas {
DatasetSchema pima();
DatasetSchema sylhet();
DatasetSchema mimic_like();
/// "pima", "sylhet" or "mimic"; throws ConfigError otherwise.
DatasetSchema by_name(std::string_view name);
} // namespace schemas

/// Splits one CSV line honouring double quotes; inside quotes a backslash
/// escapes the next character.
std::vector<std::string> split_csv_line(const std::string& line);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

} // namespace dmchain
