#include "dmchain/parallel.hpp"

#include <omp.h>

namespace dmchain {

bool in_parallel_region() noexcept { return omp_in_parallel() != 0; }

} // namespace dmchain
