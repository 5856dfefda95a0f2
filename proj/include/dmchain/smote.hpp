#pragma once

#include <cstdint>
#include <vector>

#include "dmchain/matrix.hpp"
#include "dmchain/parallel.hpp"

namespace dmchain::smote {

struct SmoteConfig {
    std::size_t k_neighbors = 5;
    std::uint64_t seed = 0;
};

/// For every row of `points` (a subset of m's rows, given by index), the k
/// nearest other rows of that subset by Euclidean distance, ties broken by the
/// lower row index. Result holds positions into `points`.
std::vector<std::vector<std::size_t>> nearest_neighbors(const FeatureMatrix& m,
                                                        const std::vector<std::size_t>& points, std::size_t k,
                                                        Exec exec = Exec::Parallel);

/// Provenance of one synthetic row: x + lambda * (neighbor - x).
struct SyntheticOrigin {
    std::size_t base;     ///< row index in the input matrix
    std::size_t neighbor; ///< row index in the input matrix
    double lambda;
};

struct SmoteResult {
    FeatureMatrix matrix; ///< input rows verbatim, then synthetic rows
    std::vector<SyntheticOrigin> origins;
};

/// Oversamples the minority class to exact parity with the majority class.
/// Balanced input is returned unchanged. Throws ConfigError when k is 0 or
/// the minority class has <= k rows, DomainError when a class is empty.
SmoteResult smote_oversample_detailed(const FeatureMatrix& train, const SmoteConfig& cfg,
                                      Exec exec = Exec::Parallel);

inline FeatureMatrix smote_oversample(const FeatureMatrix& train, const SmoteConfig& cfg,
                                      Exec exec = Exec::Parallel) {
    return smote_oversample_detailed(train, cfg, exec).matrix;
}

} // namespace dmchain::smote
