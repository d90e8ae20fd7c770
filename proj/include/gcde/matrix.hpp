#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "gcde/errors.hpp"

namespace gcde {

using Vector = std::vector<double>;

/// Flattening direction used by roll/unroll: ByRows concatenates rows,
/// ByCols concatenates columns.
enum class UnrollOrder { ByRows, ByCols };

const char* to_string(UnrollOrder order) noexcept;

/// Dense row-major matrix of doubles. All library operations treat matrices
/// as immutable values: inputs are taken by const reference and results are
/// returned fresh, so shared instances are safe to use concurrently.
class Matrix {
 public:
  /// Empty 0x0 placeholder; any sized matrix has rows, cols >= 1.
  Matrix() = default;

  /// Zero-filled rows x cols matrix.
  Matrix(std::size_t rows, std::size_t cols);

  /// Adopts `data` (row-major, length rows*cols).
  Matrix(std::size_t rows, std::size_t cols, Vector data);

  /// Row-literal construction, mainly for tests and fixtures:
  /// Matrix{{1, 2}, {3, 4}}.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix filled(std::size_t rows, std::size_t cols, double value);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }

  const double* data() const noexcept { return data_.data(); }
  double* data() noexcept { return data_.data(); }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  /// True when no entry is NaN or infinite.
  bool all_finite() const noexcept;

  /// "RxC", for error messages.
  std::string shape_string() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

}  // namespace gcde
