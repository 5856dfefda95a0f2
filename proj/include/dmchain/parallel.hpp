#pragma once

#include <cstdint>

namespace dmchain {

/// Selects between the OpenMP kernel and its serial reference. Both paths
/// produce bit-identical results; the serial one is kept for testing and for
/// callers already running inside a parallel region.
enum class Exec { Serial, Parallel };

/// SplitMix64 finalizer. Used to derive independent per-task seeds (per tree,
/// per fold) from one user seed so results do not depend on scheduling.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// True when called from inside an active OpenMP parallel region.
bool in_parallel_region() noexcept;

} // namespace dmchain
