#include <cmath>

#include "gcde/kernels.hpp"

// Reference kernels. Accumulations go through std::fma so that the FMA-based
// SIMD variants produce bit-identical results and the equivalence tests can
// assert exact equality.

namespace gcde::kernels {
namespace {

void matmul_scalar(double* c, const double* a, const double* b, std::size_t m,
                   std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m * n; ++i) c[i] = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t l = 0; l < k; ++l) {
      const double aval = arow[l];
      const double* brow = b + l * n;
      for (std::size_t j = 0; j < n; ++j) {
        crow[j] = std::fma(aval, brow[j], crow[j]);
      }
    }
  }
}

void hadamard_scalar(double* dst, const double* a, const double* b,
                     std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) dst[i] = a[i] * b[i];
}

void relu_scalar(double* dst, const double* src, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
}

void step_scalar(double* dst, const double* src, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) dst[i] = src[i] > 0.0 ? 1.0 : 0.0;
}

void step_mask_scalar(double* dst, const double* a, const double* b,
                      std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) dst[i] = b[i] > 0.0 ? a[i] : 0.0;
}

void axpy_scalar(double* y, double alpha, const double* x, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      matmul_scalar, hadamard_scalar, relu_scalar,    step_scalar,
      step_mask_scalar, axpy_scalar,  Backend::Scalar, "scalar"};
  return table;
}

}  // namespace gcde::kernels
