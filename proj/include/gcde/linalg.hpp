#pragma once

#include "gcde/matrix.hpp"

namespace gcde {

/// Standard product, shape (lhs.rows x rhs.cols). Throws ShapeError naming
/// both shapes when lhs.cols != rhs.rows.
Matrix matmul(const Matrix& lhs, const Matrix& rhs);

Matrix transpose(const Matrix& m);

/// Elementwise product; shapes must match.
Matrix hadamard(const Matrix& a, const Matrix& b);

/// max(0, entry), with negative zeros mapped to +0.0.
Matrix relu(const Matrix& m);

/// Binary step: 1 for entry > 0, 0 for entry <= 0.
Matrix step(const Matrix& m);

/// (gate > 0) ? src : 0, elementwise; equals hadamard(src, step(gate)).
Matrix step_mask(const Matrix& src, const Matrix& gate);

/// Flatten to a vector of length rows*cols in the given order.
Vector unroll(const Matrix& m, UnrollOrder order);

/// Inverse of unroll with the same order; v.size() must equal rows*cols.
Matrix roll(const Vector& v, std::size_t rows, std::size_t cols,
            UnrollOrder order);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double s);

/// y += alpha * x (fused per entry).
void axpy(Matrix& y, double alpha, const Matrix& x);

double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);

/// ||a - b||_F / ||b||_F; 0 when both vanish, +inf when only b does.
double norm_rel_err(const Matrix& a, const Matrix& b);

/// max |m(i,j) - m(j,i)| over a square matrix.
double max_symmetry_violation(const Matrix& m);

/// Tolerance used wherever a symmetric adjacency matrix is a premise.
inline constexpr double kSymmetryTol = 1e-9;

}  // namespace gcde
