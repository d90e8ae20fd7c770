#include <cstdlib>
#include <cstring>

#include "kernels_internal.hpp"

namespace gcde::kernels {

const KernelTable* simd_kernels() {
  if (const KernelTable* t = avx2_kernels_if_supported()) return t;
  if (const KernelTable* t = neon_kernels_if_supported()) return t;
  return nullptr;
}

namespace {

const KernelTable* pick_active() {
  if (const char* force = std::getenv("GCDE_SIMD")) {
    if (std::strcmp(force, "scalar") == 0) return &scalar_kernels();
    if (std::strcmp(force, "avx2") == 0) {
      if (const KernelTable* t = avx2_kernels_if_supported()) return t;
      return &scalar_kernels();
    }
    if (std::strcmp(force, "neon") == 0) {
      if (const KernelTable* t = neon_kernels_if_supported()) return t;
      return &scalar_kernels();
    }
    // Unknown value: ignore and auto-detect.
  }
  if (const KernelTable* t = simd_kernels()) return t;
  return &scalar_kernels();
}

}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable* table = pick_active();
  return *table;
}

Backend active_backend() { return active_kernels().backend; }

const char* backend_name(Backend backend) {
  switch (backend) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

}  // namespace gcde::kernels
