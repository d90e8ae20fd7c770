#pragma once

#include <functional>

#include "gcde/matrix.hpp"

namespace gcde {

/// Fully materialized derivative of a matrix-to-matrix map, flattened on
/// both sides. The unroll conventions travel with the matrix so no caller
/// can pair a VJP with the wrong axis ordering.
///
/// These explicit Jacobians are quadratic in the problem size and exist as
/// desk-scale ground truth for the vectorized adjoint kernels, which never
/// materialize them.
struct UnrolledJacobian {
  Matrix inner;  // (out_rows*out_cols) x (in_rows*in_cols)
  std::size_t out_rows = 0;
  std::size_t out_cols = 0;
  std::size_t in_rows = 0;
  std::size_t in_cols = 0;
  UnrollOrder out_order = UnrollOrder::ByRows;
  UnrollOrder in_order = UnrollOrder::ByCols;
};

/// Size cap (on N*C) for the GCDE oracle Jacobians; beyond it the NC x NC
/// matrix stops being desk-scale and construction is refused.
inline constexpr std::size_t kOracleCellLimit = 256;

/// d(unroll_rows(X*A)) / d(unroll_cols(A)) for fixed x (m x n); the input A
/// is n x p. Result is mp x np: row block i carries x's row i on a block
/// diagonal.
UnrolledJacobian jacobian_left_mul(const Matrix& x, std::size_t p);

/// d(unroll_rows(B*Y)) / d(unroll_rows(B)) for fixed y (p x q); the input B
/// is m x p. Result is mq x mp, block diagonal with m copies of y^T.
UnrolledJacobian jacobian_right_mul(const Matrix& y, std::size_t m);

/// d(unroll_rows(X*A*Y)) / d(unroll_cols(A)) for fixed x (m x n) and
/// y (p x q); the input A is n x p. Block (i,j) (q x n) is the outer
/// product y_row(j)^T * x_row(i); equals the chain product
/// jacobian_right_mul(y, m) * jacobian_left_mul(x, p) entry for entry.
UnrolledJacobian jacobian_sandwich(const Matrix& x, const Matrix& y,
                                   std::size_t p);

/// d(unroll_rows(relu(A*H*W))) / d(unroll_cols(H)): the sandwich Jacobian
/// with rows gated by step(A*H*W). NC x NC; refuses N*C > kOracleCellLimit.
UnrolledJacobian gcde_jacobian_wrt_state(const Matrix& a, const Matrix& w,
                                         const Matrix& h);

/// d(unroll_rows(relu(A*H*W))) / d(unroll_cols(W)): left-multiplication by
/// A*H, rows gated by step(A*H*W). NC x C^2; same size cap.
UnrolledJacobian gcde_jacobian_wrt_weights(const Matrix& a, const Matrix& h,
                                           const Matrix& w);

using MatrixFn = std::function<Matrix(const Matrix&)>;

/// Central-difference Jacobian of `fn` at `at`, one input entry at a time.
/// Columns are ordered by in_order, rows by out_order. Non-finite values in
/// fn's output propagate into the result. The default step balances
/// truncation against roundoff at double precision.
UnrolledJacobian numeric_jacobian(const MatrixFn& fn, const Matrix& at,
                                  UnrollOrder in_order, UnrollOrder out_order,
                                  double eps = 1e-5);

/// upstream (shaped like the map's output) times the Jacobian, rolled back
/// to the input's shape: the reference VJP every vectorized kernel is
/// checked against. No sign is applied.
Matrix vjp_via_jacobian(const UnrolledJacobian& j, const Matrix& upstream);

}  // namespace gcde
