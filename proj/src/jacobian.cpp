#include "gcde/jacobian.hpp"

#include <string>

#include "gcde/kernels.hpp"
#include "gcde/linalg.hpp"

namespace gcde {
namespace {

std::size_t flat_index(std::size_t i, std::size_t j, std::size_t rows,
                       std::size_t cols, UnrollOrder order) {
  return order == UnrollOrder::ByRows ? i * cols + j : j * rows + i;
}

void require_oracle_scale(std::size_t cells, const char* op) {
  if (cells > kOracleCellLimit) {
    throw OracleSizeError(std::string(op) + ": N*C = " +
                          std::to_string(cells) + " exceeds the unrolled "
                          "Jacobian cap of " +
                          std::to_string(kOracleCellLimit));
  }
}

// Scales row r of j.inner by mask[r]; the diag(step(...)) factor of the
// GCDE Jacobians.
void gate_rows(UnrolledJacobian& j, const Vector& mask) {
  for (std::size_t r = 0; r < j.inner.rows(); ++r) {
    for (std::size_t c = 0; c < j.inner.cols(); ++c) {
      j.inner(r, c) *= mask[r];
    }
  }
}

}  // namespace

UnrolledJacobian jacobian_left_mul(const Matrix& x, std::size_t p) {
  if (p == 0) {
    throw ShapeError("jacobian_left_mul: input column count p must be >= 1");
  }
  if (x.empty()) {
    throw ShapeError("jacobian_left_mul: empty multiplier");
  }
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();

  UnrolledJacobian j;
  j.out_rows = m;
  j.out_cols = p;
  j.out_order = UnrollOrder::ByRows;
  j.in_rows = n;
  j.in_cols = p;
  j.in_order = UnrollOrder::ByCols;
  j.inner = Matrix(m * p, n * p);
  // d(XA)[i,l] / dA[k,l] = X[i,k]; entries in different input columns do not
  // interact, which is the block-diagonal-per-row-block pattern.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t l = 0; l < p; ++l) {
      for (std::size_t k = 0; k < n; ++k) {
        j.inner(i * p + l, l * n + k) = x(i, k);
      }
    }
  }
  return j;
}

UnrolledJacobian jacobian_right_mul(const Matrix& y, std::size_t m) {
  if (m == 0) {
    throw ShapeError("jacobian_right_mul: input row count m must be >= 1");
  }
  if (y.empty()) {
    throw ShapeError("jacobian_right_mul: empty multiplier");
  }
  const std::size_t p = y.rows();
  const std::size_t q = y.cols();

  UnrolledJacobian j;
  j.out_rows = m;
  j.out_cols = q;
  j.out_order = UnrollOrder::ByRows;
  j.in_rows = m;
  j.in_cols = p;
  j.in_order = UnrollOrder::ByRows;
  j.inner = Matrix(m * q, m * p);
  // Block diagonal: m copies of Y^T.
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t jj = 0; jj < q; ++jj) {
      for (std::size_t kk = 0; kk < p; ++kk) {
        j.inner(r * q + jj, r * p + kk) = y(kk, jj);
      }
    }
  }
  return j;
}

UnrolledJacobian jacobian_sandwich(const Matrix& x, const Matrix& y,
                                   std::size_t p) {
  if (x.empty() || y.empty()) {
    throw ShapeError("jacobian_sandwich: empty multiplier");
  }
  if (p == 0 || p != y.rows()) {
    throw ShapeError("jacobian_sandwich: input column count p = " +
                     std::to_string(p) + " must equal rows of y (" +
                     y.shape_string() + ")");
  }
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  const std::size_t q = y.cols();

  UnrolledJacobian j;
  j.out_rows = m;
  j.out_cols = q;
  j.out_order = UnrollOrder::ByRows;
  j.in_rows = n;
  j.in_cols = p;
  j.in_order = UnrollOrder::ByCols;
  j.inner = Matrix(m * q, n * p);
  // Block (i,jj) is the q x n outer product y_row(jj)^T * x_row(i).
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t jj = 0; jj < p; ++jj) {
      for (std::size_t r = 0; r < q; ++r) {
        for (std::size_t s = 0; s < n; ++s) {
          j.inner(i * q + r, jj * n + s) = y(jj, r) * x(i, s);
        }
      }
    }
  }
  return j;
}

UnrolledJacobian gcde_jacobian_wrt_state(const Matrix& a, const Matrix& w,
                                         const Matrix& h) {
  if (a.rows() != a.cols() || a.cols() != h.rows() || h.cols() != w.rows() ||
      w.rows() != w.cols()) {
    throw ShapeError("gcde_jacobian_wrt_state: incompatible shapes A " +
                     a.shape_string() + ", H " + h.shape_string() + ", W " +
                     w.shape_string());
  }
  require_oracle_scale(h.size(), "gcde_jacobian_wrt_state");

  UnrolledJacobian j = jacobian_sandwich(a, w, w.rows());
  const Matrix z = matmul(matmul(a, h), w);
  gate_rows(j, unroll(step(z), j.out_order));
  return j;
}

UnrolledJacobian gcde_jacobian_wrt_weights(const Matrix& a, const Matrix& h,
                                           const Matrix& w) {
  if (a.rows() != a.cols() || a.cols() != h.rows() || h.cols() != w.rows() ||
      w.rows() != w.cols()) {
    throw ShapeError("gcde_jacobian_wrt_weights: incompatible shapes A " +
                     a.shape_string() + ", H " + h.shape_string() + ", W " +
                     w.shape_string());
  }
  require_oracle_scale(h.size(), "gcde_jacobian_wrt_weights");

  // A*H is the fixed left multiplier once W is the differentiated input.
  UnrolledJacobian j = jacobian_left_mul(matmul(a, h), w.cols());
  const Matrix z = matmul(matmul(a, h), w);
  gate_rows(j, unroll(step(z), j.out_order));
  return j;
}

UnrolledJacobian numeric_jacobian(const MatrixFn& fn, const Matrix& at,
                                  UnrollOrder in_order, UnrollOrder out_order,
                                  double eps) {
  if (!(eps > 0.0)) {
    throw ValidationError("numeric_jacobian: eps must be positive");
  }
  const Matrix base = fn(at);

  UnrolledJacobian j;
  j.out_rows = base.rows();
  j.out_cols = base.cols();
  j.out_order = out_order;
  j.in_rows = at.rows();
  j.in_cols = at.cols();
  j.in_order = in_order;
  j.inner = Matrix(base.size(), at.size());

  for (std::size_t r = 0; r < at.rows(); ++r) {
    for (std::size_t c = 0; c < at.cols(); ++c) {
      Matrix plus = at;
      Matrix minus = at;
      plus(r, c) += eps;
      minus(r, c) -= eps;
      const Matrix fplus = fn(plus);
      const Matrix fminus = fn(minus);
      if (!fplus.same_shape(base) || !fminus.same_shape(base)) {
        throw ShapeError("numeric_jacobian: fn output shape changed between "
                         "evaluations");
      }
      const Vector column = unroll(sub(fplus, fminus), out_order);
      const std::size_t col = flat_index(r, c, at.rows(), at.cols(), in_order);
      for (std::size_t row = 0; row < column.size(); ++row) {
        j.inner(row, col) = column[row] / (2.0 * eps);
      }
    }
  }
  return j;
}

Matrix vjp_via_jacobian(const UnrolledJacobian& j, const Matrix& upstream) {
  if (upstream.rows() != j.out_rows || upstream.cols() != j.out_cols) {
    throw ShapeError("vjp_via_jacobian: upstream is " +
                     upstream.shape_string() + ", Jacobian output is " +
                     std::to_string(j.out_rows) + "x" +
                     std::to_string(j.out_cols));
  }
  const Vector u = unroll(upstream, j.out_order);
  Vector result(j.inner.cols(), 0.0);
  // result^T = u^T * inner, accumulated row by row.
  const auto& k = kernels::active_kernels();
  for (std::size_t r = 0; r < j.inner.rows(); ++r) {
    k.axpy(result.data(), u[r], j.inner.data() + r * j.inner.cols(),
           result.size());
  }
  return roll(result, j.in_rows, j.in_cols, j.in_order);
}

}  // namespace gcde
