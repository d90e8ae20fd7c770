#pragma once

#include <cstddef>

namespace gcde::kernels {

/// c (m x n) = a (m x k) * b (k x n); c is overwritten. Row-major, no alias.
using MatmulFn = void (*)(double* c, const double* a, const double* b,
                          std::size_t m, std::size_t k, std::size_t n);
/// dst[i] = f(a[i], b[i])
using BinaryFn = void (*)(double* dst, const double* a, const double* b,
                          std::size_t len);
/// dst[i] = f(src[i])
using UnaryFn = void (*)(double* dst, const double* src, std::size_t len);
/// y[i] += alpha * x[i]
using AxpyFn = void (*)(double* y, double alpha, const double* x,
                        std::size_t len);

enum class Backend { Scalar, Avx2, Neon };

/// One dispatchable implementation of the arithmetic inner loops. The scalar
/// table is the reference; SIMD tables must produce bit-identical results
/// (the scalar kernels accumulate through std::fma for exactly this reason).
struct KernelTable {
  MatmulFn matmul;
  BinaryFn hadamard;   // dst = a (*) b
  UnaryFn relu;        // dst = max(0, src), with relu(-0.0) = +0.0
  UnaryFn step;        // dst = 1 if src > 0 else 0
  BinaryFn step_mask;  // dst = (b > 0) ? a : 0  -- the ReLU backward gate
  AxpyFn axpy;
  Backend backend;
  const char* name;
};

/// Portable reference kernels; always available.
const KernelTable& scalar_kernels();

/// Widest SIMD table this CPU supports, or nullptr when there is none.
const KernelTable* simd_kernels();

/// Table the linalg layer dispatches to: the SIMD table when available.
/// GCDE_SIMD=scalar|avx2|neon overrides the choice (checked once per
/// process; an unavailable request falls back to scalar).
const KernelTable& active_kernels();

Backend active_backend();
const char* backend_name(Backend backend);

}  // namespace gcde::kernels
