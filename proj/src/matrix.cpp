#include "gcde/matrix.hpp"

#include <cmath>

namespace gcde {

const char* to_string(UnrollOrder order) noexcept {
  return order == UnrollOrder::ByRows ? "by-rows" : "by-cols";
}

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
  if (rows == 0 || cols == 0) {
    throw ShapeError("matrix dimensions must be positive, got " +
                     shape_string());
  }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, Vector data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) {
    throw ShapeError("matrix dimensions must be positive, got " +
                     shape_string());
  }
  if (data_.size() != rows * cols) {
    throw ShapeError("data length " + std::to_string(data_.size()) +
                     " does not fill a " + shape_string() + " matrix");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  if (rows_ == 0 || cols_ == 0) {
    throw ShapeError("matrix literal must be non-empty");
  }
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) {
      throw ShapeError("ragged matrix literal: row of length " +
                       std::to_string(row.size()) + " in a " + shape_string() +
                       " matrix");
    }
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::filled(std::size_t rows, std::size_t cols, double value) {
  Matrix m(rows, cols);
  for (double& v : m.data_) v = value;
  return m;
}

bool Matrix::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Matrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

}  // namespace gcde
