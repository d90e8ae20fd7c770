#include "gcde/linalg.hpp"

#include <cmath>
#include <limits>

#include "gcde/kernels.hpp"

namespace gcde {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shapes " + a.shape_string() +
                     " and " + b.shape_string() + " do not match");
  }
}

void require_nonempty(const Matrix& m, const char* op) {
  if (m.empty()) {
    throw ShapeError(std::string(op) + ": empty matrix operand");
  }
}

}  // namespace

Matrix matmul(const Matrix& lhs, const Matrix& rhs) {
  require_nonempty(lhs, "matmul");
  require_nonempty(rhs, "matmul");
  if (lhs.cols() != rhs.rows()) {
    throw ShapeError("matmul: inner dimensions of " + lhs.shape_string() +
                     " and " + rhs.shape_string() + " do not agree");
  }
  Matrix out(lhs.rows(), rhs.cols());
  kernels::active_kernels().matmul(out.data(), lhs.data(), rhs.data(),
                                   lhs.rows(), lhs.cols(), rhs.cols());
  return out;
}

Matrix transpose(const Matrix& m) {
  require_nonempty(m, "transpose");
  Matrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      out(j, i) = m(i, j);
    }
  }
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_nonempty(a, "hadamard");
  require_same_shape(a, b, "hadamard");
  Matrix out(a.rows(), a.cols());
  kernels::active_kernels().hadamard(out.data(), a.data(), b.data(), a.size());
  return out;
}

Matrix relu(const Matrix& m) {
  require_nonempty(m, "relu");
  Matrix out(m.rows(), m.cols());
  kernels::active_kernels().relu(out.data(), m.data(), m.size());
  return out;
}

Matrix step(const Matrix& m) {
  require_nonempty(m, "step");
  Matrix out(m.rows(), m.cols());
  kernels::active_kernels().step(out.data(), m.data(), m.size());
  return out;
}

Matrix step_mask(const Matrix& src, const Matrix& gate) {
  require_nonempty(src, "step_mask");
  require_same_shape(src, gate, "step_mask");
  Matrix out(src.rows(), src.cols());
  kernels::active_kernels().step_mask(out.data(), src.data(), gate.data(),
                                      src.size());
  return out;
}

Vector unroll(const Matrix& m, UnrollOrder order) {
  require_nonempty(m, "unroll");
  if (order == UnrollOrder::ByRows) {
    // Row-major storage: by-rows flattening is a straight copy.
    return Vector(m.data(), m.data() + m.size());
  }
  Vector v(m.size());
  std::size_t idx = 0;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
      v[idx++] = m(i, j);
    }
  }
  return v;
}

Matrix roll(const Vector& v, std::size_t rows, std::size_t cols,
            UnrollOrder order) {
  if (v.size() != rows * cols) {
    throw ShapeError("roll: vector of length " + std::to_string(v.size()) +
                     " does not fill a " + std::to_string(rows) + "x" +
                     std::to_string(cols) + " matrix");
  }
  if (order == UnrollOrder::ByRows) {
    return Matrix(rows, cols, v);
  }
  Matrix m(rows, cols);
  std::size_t idx = 0;
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) {
      m(i, j) = v[idx++];
    }
  }
  return m;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_nonempty(a, "add");
  require_same_shape(a, b, "add");
  Matrix out = a;
  axpy(out, 1.0, b);
  return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  require_nonempty(a, "sub");
  require_same_shape(a, b, "sub");
  Matrix out = a;
  axpy(out, -1.0, b);
  return out;
}

Matrix scale(const Matrix& m, double s) {
  require_nonempty(m, "scale");
  Matrix out(m.rows(), m.cols());
  kernels::active_kernels().axpy(out.data(), s, m.data(), m.size());
  return out;
}

void axpy(Matrix& y, double alpha, const Matrix& x) {
  require_nonempty(y, "axpy");
  require_same_shape(y, x, "axpy");
  kernels::active_kernels().axpy(y.data(), alpha, x.data(), y.size());
}

double frobenius_norm(const Matrix& m) {
  double sum = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    sum += m.data()[i] * m.data()[i];
  }
  return std::sqrt(sum);
}

double max_abs(const Matrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    best = std::max(best, std::abs(m.data()[i]));
  }
  return best;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    best = std::max(best, std::abs(a.data()[i] - b.data()[i]));
  }
  return best;
}

double norm_rel_err(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "norm_rel_err");
  const double diff = frobenius_norm(sub(a, b));
  const double ref = frobenius_norm(b);
  if (ref == 0.0) {
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return diff / ref;
}

double max_symmetry_violation(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw ShapeError("max_symmetry_violation: matrix is " + m.shape_string() +
                     ", not square");
  }
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      best = std::max(best, std::abs(m(i, j) - m(j, i)));
    }
  }
  return best;
}

}  // namespace gcde
