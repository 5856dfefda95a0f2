#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dmchain/matrix.hpp"

namespace dmtest {

inline std::filesystem::path data_dir() { return DMCHAIN_DATA_DIR; }

inline bool have_data(const std::string& file) { return std::filesystem::exists(data_dir() / file); }

/// Gaussian blobs: positives shifted by `sep` along every axis.
inline dmchain::FeatureMatrix blobs(std::size_t n, std::size_t d, double sep, std::uint64_t seed,
                                    double positive_share = 0.5) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<std::string> names;
    for (std::size_t j = 0; j < d; ++j)
        names.push_back("f" + std::to_string(j));
    dmchain::FeatureMatrix m(names, 0);
    const auto n_pos = static_cast<std::size_t>(positive_share * static_cast<double>(n));
    std::vector<double> x(d);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = i < n_pos ? 1 : 0;
        for (auto& v : x)
            v = noise(rng) + (y ? sep : 0.0);
        m.push_row(x, y);
    }
    return m;
}

/// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static std::mt19937_64 rng(std::random_device{}());
        path = std::filesystem::temp_directory_path() / ("dmchain-test-" + std::to_string(rng()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

} // namespace dmtest
