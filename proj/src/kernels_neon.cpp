#include "kernels_internal.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

// NEON variants, 2 doubles per vector with scalar tails. float64 NEON is
// baseline on aarch64, so no runtime probe is needed there.

namespace gcde::kernels {
namespace {

void matmul_neon(double* c, const double* a, const double* b, std::size_t m,
                 std::size_t k, std::size_t n) {
  const std::size_t total = m * n;
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= total; i += 2) vst1q_f64(c + i, zero);
  for (; i < total; ++i) c[i] = 0.0;

  for (std::size_t row = 0; row < m; ++row) {
    const double* arow = a + row * k;
    double* crow = c + row * n;
    for (std::size_t l = 0; l < k; ++l) {
      const double aval = arow[l];
      const float64x2_t avec = vdupq_n_f64(aval);
      const double* brow = b + l * n;
      std::size_t j = 0;
      for (; j + 2 <= n; j += 2) {
        float64x2_t cvec = vld1q_f64(crow + j);
        cvec = vfmaq_f64(cvec, avec, vld1q_f64(brow + j));
        vst1q_f64(crow + j, cvec);
      }
      for (; j < n; ++j) crow[j] = std::fma(aval, brow[j], crow[j]);
    }
  }
}

void hadamard_neon(double* dst, const double* a, const double* b,
                   std::size_t len) {
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    vst1q_f64(dst + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < len; ++i) dst[i] = a[i] * b[i];
}

void relu_neon(double* dst, const double* src, std::size_t len) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const float64x2_t v = vld1q_f64(src + i);
    const uint64x2_t mask = vcgtq_f64(v, zero);
    vst1q_f64(dst + i, vbslq_f64(mask, v, zero));
  }
  for (; i < len; ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
}

void step_neon(double* dst, const double* src, std::size_t len) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const uint64x2_t mask = vcgtq_f64(vld1q_f64(src + i), zero);
    vst1q_f64(dst + i, vbslq_f64(mask, one, zero));
  }
  for (; i < len; ++i) dst[i] = src[i] > 0.0 ? 1.0 : 0.0;
}

void step_mask_neon(double* dst, const double* a, const double* b,
                    std::size_t len) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const uint64x2_t mask = vcgtq_f64(vld1q_f64(b + i), zero);
    vst1q_f64(dst + i, vbslq_f64(mask, vld1q_f64(a + i), zero));
  }
  for (; i < len; ++i) dst[i] = b[i] > 0.0 ? a[i] : 0.0;
}

void axpy_neon(double* y, double alpha, const double* x, std::size_t len) {
  const float64x2_t avec = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    float64x2_t yvec = vld1q_f64(y + i);
    yvec = vfmaq_f64(yvec, avec, vld1q_f64(x + i));
    vst1q_f64(y + i, yvec);
  }
  for (; i < len; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

}  // namespace

const KernelTable* neon_kernels_if_supported() {
  static const KernelTable table{
      matmul_neon, hadamard_neon, relu_neon,     step_neon,
      step_mask_neon, axpy_neon,  Backend::Neon, "neon"};
  return &table;
}

}  // namespace gcde::kernels

#else

namespace gcde::kernels {
const KernelTable* neon_kernels_if_supported() { return nullptr; }
}  // namespace gcde::kernels

#endif
