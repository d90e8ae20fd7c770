#include "kernels_internal.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cmath>

// AVX2+FMA variants, 4 doubles per lane-group with scalar tails. Built with
// function-level target attributes so the rest of the library keeps the
// baseline ISA; dispatch happens at runtime via __builtin_cpu_supports.

#define GCDE_TARGET_AVX2 __attribute__((target("avx2,fma")))

namespace gcde::kernels {
namespace {

GCDE_TARGET_AVX2 void matmul_avx2(double* c, const double* a, const double* b,
                                  std::size_t m, std::size_t k,
                                  std::size_t n) {
  const std::size_t total = m * n;
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= total; i += 4) _mm256_storeu_pd(c + i, zero);
  for (; i < total; ++i) c[i] = 0.0;

  for (std::size_t row = 0; row < m; ++row) {
    const double* arow = a + row * k;
    double* crow = c + row * n;
    for (std::size_t l = 0; l < k; ++l) {
      const double aval = arow[l];
      const __m256d avec = _mm256_set1_pd(aval);
      const double* brow = b + l * n;
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        __m256d cvec = _mm256_loadu_pd(crow + j);
        cvec = _mm256_fmadd_pd(avec, _mm256_loadu_pd(brow + j), cvec);
        _mm256_storeu_pd(crow + j, cvec);
      }
      for (; j < n; ++j) crow[j] = std::fma(aval, brow[j], crow[j]);
    }
  }
}

GCDE_TARGET_AVX2 void hadamard_avx2(double* dst, const double* a,
                                    const double* b, std::size_t len) {
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    _mm256_storeu_pd(
        dst + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < len; ++i) dst[i] = a[i] * b[i];
}

GCDE_TARGET_AVX2 void relu_avx2(double* dst, const double* src,
                                std::size_t len) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d v = _mm256_loadu_pd(src + i);
    const __m256d mask = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(dst + i, _mm256_and_pd(mask, v));
  }
  for (; i < len; ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
}

GCDE_TARGET_AVX2 void step_avx2(double* dst, const double* src,
                                std::size_t len) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(src + i), zero,
                                       _CMP_GT_OQ);
    _mm256_storeu_pd(dst + i, _mm256_and_pd(mask, one));
  }
  for (; i < len; ++i) dst[i] = src[i] > 0.0 ? 1.0 : 0.0;
}

GCDE_TARGET_AVX2 void step_mask_avx2(double* dst, const double* a,
                                     const double* b, std::size_t len) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(b + i), zero,
                                       _CMP_GT_OQ);
    _mm256_storeu_pd(dst + i, _mm256_and_pd(mask, _mm256_loadu_pd(a + i)));
  }
  for (; i < len; ++i) dst[i] = b[i] > 0.0 ? a[i] : 0.0;
}

GCDE_TARGET_AVX2 void axpy_avx2(double* y, double alpha, const double* x,
                                std::size_t len) {
  const __m256d avec = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    __m256d yvec = _mm256_loadu_pd(y + i);
    yvec = _mm256_fmadd_pd(avec, _mm256_loadu_pd(x + i), yvec);
    _mm256_storeu_pd(y + i, yvec);
  }
  for (; i < len; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

}  // namespace

const KernelTable* avx2_kernels_if_supported() {
  static const KernelTable table{
      matmul_avx2, hadamard_avx2, relu_avx2,     step_avx2,
      step_mask_avx2, axpy_avx2,  Backend::Avx2, "avx2"};
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return &table;
  }
  return nullptr;
}

}  // namespace gcde::kernels

#else

namespace gcde::kernels {
const KernelTable* avx2_kernels_if_supported() { return nullptr; }
}  // namespace gcde::kernels

#endif
