#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dmchain/dataset.hpp"
#include "dmchain/validation.hpp"

namespace dmchain::config {

struct DatasetSource {
    enum class Kind { Csv, MimicSynthetic, MimicTables };
    Kind kind = Kind::Csv;
    std::string schema;          ///< "pima", "sylhet" or "mimic"
    std::filesystem::path path;  ///< CSV file or directory of exported tables
    std::size_t cohort_rows = 46'520;
    double positive_ratio = 0.2245;
    std::uint64_t cohort_seed = 2101;
};

struct AppConfig {
    std::map<std::string, DatasetSource> datasets;
    eval::HyperGrid grid = eval::HyperGrid::compact();
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::size_t smote_k = 5;
    std::size_t sealing_batch = 1;
    std::size_t cv_folds = 10;
    std::size_t rfecv_folds = 10;
    double train_fraction = 0.7;

    void validate() const; ///< throws ConfigError
};

/// pima/sylhet CSVs under `data_dir` and the synthetic MIMIC-like cohort.
AppConfig default_config(const std::filesystem::path& data_dir);

/// JSON config; relative dataset paths resolve against the file's directory.
/// Throws ConfigError on unknown keys or bad values, LoadError if unreadable.
AppConfig load_config(const std::filesystem::path& file);
AppConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir);

/// Throws ConfigError for an unknown name and LoadError when the file is absent.
Dataset load_dataset(const AppConfig& cfg, const std::string& name);
bool dataset_available(const AppConfig& cfg, const std::string& name);

} // namespace dmchain::config
