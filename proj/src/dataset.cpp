#include "dmchain/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/tokenizer.hpp>

#include "dmchain/error.hpp"

namespace dmchain {

void DatasetSchema::validate() const {
    std::set<std::string> seen;
    for (const auto& f : features) {
        if (f.name.empty())
            throw ConfigError("schema has an unnamed feature");
        if (!seen.insert(f.name).second)
            throw ConfigError("duplicate feature name '" + f.name + "'");
        if (f.zero_is_missing && f.kind != FeatureKind::Numeric)
            throw ConfigError("zero_is_missing set on non-numeric feature '" + f.name + "'");
    }
    if (label_name.empty() || seen.count(label_name))
        throw ConfigError("label column must be named and distinct from the features");
    if (positive_label.empty() || positive_label == negative_label)
        throw ConfigError("schema needs distinct positive and negative labels");
}

std::size_t DatasetSchema::index_of(std::string_view feature) const {
    for (std::size_t i = 0; i < features.size(); ++i)
        if (features[i].name == feature)
            return i;
    throw ConfigError("no feature named '" + std::string(feature) + "'");
}

std::size_t Dataset::count_positive() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const Record& r) { return r.positive; }));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    using Sep = boost::escaped_list_separator<char>;
    boost::tokenizer<Sep> tok(line, Sep('\\', ',', '"'));
    return {tok.begin(), tok.end()};
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string where(const std::string& source, std::size_t row, const std::string& column) {
    return source + ": row " + std::to_string(row) + ", column '" + column + "'";
}

} // namespace

Dataset parse_tabular_dataset(std::istream& in, const DatasetSchema& schema, const std::string& source) {
    schema.validate();
    std::string line;
    if (!std::getline(in, line) || trim(line).empty())
        throw LoadError(source + ": empty file");

    auto header = split_csv_line(trim(line));
    for (auto& h : header)
        h = trim(h);
    const std::size_t ncols = schema.features.size() + 1;
    if (header.size() != ncols)
        throw LoadError(source + ": header has " + std::to_string(header.size()) + " columns, expected " +
                        std::to_string(ncols));
    for (std::size_t j = 0; j < schema.features.size(); ++j)
        if (header[j] != schema.features[j].name)
            throw LoadError(source + ": header column " + std::to_string(j) + " is '" + header[j] +
                            "', expected '" + schema.features[j].name + "'");
    if (header.back() != schema.label_name)
        throw LoadError(source + ": last header column is '" + header.back() + "', expected '" +
                        schema.label_name + "'");

    Dataset d;
    d.schema = schema;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (trim(line).empty())
            continue;
        std::vector<std::string> cells;
        try {
            cells = split_csv_line(trim(line));
        } catch (const std::exception& e) {
            throw LoadError(source + ": row " + std::to_string(row_no) + ": " + e.what());
        }
        if (cells.size() != ncols)
            throw LoadError(source + ": row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(ncols));
        Record rec;
        rec.values.reserve(schema.features.size());
        for (std::size_t j = 0; j < schema.features.size(); ++j) {
            const auto& spec = schema.features[j];
            auto text = trim(cells[j]);
            if (text.empty()) {
                rec.values.emplace_back(std::monostate{});
            } else if (spec.kind == FeatureKind::Numeric) {
                double v = 0.0;
                auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
                if (ec != std::errc() || ptr != text.data() + text.size())
                    throw LoadError(where(source, row_no, spec.name) + ": unparseable number '" + text + "'");
                rec.values.emplace_back(v);
            } else {
                rec.values.emplace_back(std::move(text));
            }
        }
        const auto label = trim(cells.back());
        if (label == schema.positive_label)
            rec.positive = true;
        else if (label == schema.negative_label)
            rec.positive = false;
        else
            throw LoadError(where(source, row_no, schema.label_name) + ": unknown label '" + label + "'");
        d.rows.push_back(std::move(rec));
    }
    if (d.rows.empty())
        throw LoadError(source + ": no data rows");
    return d;
}

Dataset load_tabular_dataset(const std::filesystem::path& path, const DatasetSchema& schema) {
    std::ifstream in(path);
    if (!in)
        throw LoadError("cannot open '" + path.string() + "'");
    return parse_tabular_dataset(in, schema, path.string());
}

namespace {

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\\") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out + '"';
}

} // namespace

void write_tabular_dataset(std::ostream& out, const Dataset& d) {
    for (const auto& f : d.schema.features)
        out << quote_if_needed(f.name) << ',';
    out << quote_if_needed(d.schema.label_name) << '\n';
    for (const auto& r : d.rows) {
        for (const auto& c : r.values) {
            if (const auto* v = std::get_if<double>(&c))
                out << format_double(*v);
            else if (const auto* s = std::get_if<std::string>(&c))
                out << quote_if_needed(*s);
            out << ',';
        }
        out << (r.positive ? d.schema.positive_label : d.schema.negative_label) << '\n';
    }
}

std::string serialize_dataset(const Dataset& d) {
    std::ostringstream os;
    write_tabular_dataset(os, d);
    return os.str();
}

namespace schemas {

DatasetSchema pima() {
    DatasetSchema s;
    // A zero glucose, blood pressure, skin thickness or BMI is a missing
    // measurement. Insulin zeros are kept.
    s.features = {
        {"Pregnancies", FeatureKind::Numeric, false},
        {"Glucose", FeatureKind::Numeric, true},
        {"BloodPressure", FeatureKind::Numeric, true},
        {"SkinThickness", FeatureKind::Numeric, true},
        {"Insulin", FeatureKind::Numeric, false},
        {"BMI", FeatureKind::Numeric, true},
        {"DiabetesPedigreeFunction", FeatureKind::Numeric, false},
        {"Age", FeatureKind::Numeric, false},
    };
    s.label_name = "Outcome";
    s.positive_label = "1";
    s.negative_label = "0";
    return s;
}

DatasetSchema sylhet() {
    DatasetSchema s;
    s.features.push_back({"Age", FeatureKind::Numeric, false});
    for (const char* name : {"Gender", "Polyuria", "Polydipsia", "sudden weight loss", "weakness", "Polyphagia",
                             "Genital thrush", "visual blurring", "Itching", "Irritability", "delayed healing",
                             "partial paresis", "muscle stiffness", "Alopecia", "Obesity"})
        s.features.push_back({name, FeatureKind::Binary, false});
    s.label_name = "class";
    s.positive_label = "Positive";
    s.negative_label = "Negative";
    return s;
}

DatasetSchema mimic_like() {
    DatasetSchema s;
    s.features = {
        {"Ethnicity", FeatureKind::Categorical, false},
        {"Gender", FeatureKind::Binary, false},
        {"Age", FeatureKind::Numeric, false},
        {"FamilyHistory", FeatureKind::Binary, false},
    };
    s.label_name = "Diabetes";
    s.positive_label = "1";
    s.negative_label = "0";
    return s;
}

DatasetSchema by_name(std::string_view name) {
    if (name == "pima")
        return pima();
    if (name == "sylhet")
        return sylhet();
    if (name == "mimic")
        return mimic_like();
    throw ConfigError("unknown dataset '" + std::string(name) + "'");
}

} // namespace schemas

} // namespace dmchain
