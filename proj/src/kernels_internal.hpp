#pragma once

#include "gcde/kernels.hpp"

namespace gcde::kernels {

// Per-architecture probes; each returns its table when this CPU can run it,
// nullptr otherwise. Defined in kernels_avx2.cpp / kernels_neon.cpp.
const KernelTable* avx2_kernels_if_supported();
const KernelTable* neon_kernels_if_supported();

}  // namespace gcde::kernels
