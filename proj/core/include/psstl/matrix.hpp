// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace psstl {

/// Dense row-major matrix of doubles. Vectors are 1 x n matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);
  static Matrix row_vector(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  void fill(double value);
  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  /// "RxC", used in error messages.
  std::string shape_string() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Products. Gradient rules for C = A*B: dA = dC * B^T, dB = A^T * dC.
Matrix matmul(const Matrix& a, const Matrix& b);
/// a^T * b without materialising the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a * b^T without materialising the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

Matrix hadamard(const Matrix& a, const Matrix& b);
void add_inplace(Matrix& target, const Matrix& other);
void scale_inplace(Matrix& target, double factor);
/// target += factor * other
void axpy_inplace(Matrix& target, double factor, const Matrix& other);
/// Adds a 1 x cols bias to every row.
void add_row_inplace(Matrix& target, const Matrix& row);
/// 1 x cols vector of column sums (bias gradient).
Matrix column_sums(const Matrix& a);

/// max(0, x); the subgradient at 0 is taken as 0.
Matrix relu(const Matrix& x);
/// grad_out masked to positions where pre > 0.
Matrix relu_backward(const Matrix& grad_out, const Matrix& pre);

Matrix gather_rows(const Matrix& a, std::span<const std::size_t> indices);

bool all_finite(const Matrix& a) noexcept;
/// Smallest |x| over all entries; +inf for an empty matrix.
double min_abs(const Matrix& a) noexcept;
double max_abs(const Matrix& a) noexcept;

void require_same_shape(const Matrix& a, const Matrix& b, std::string_view what);

}  // namespace psstl
