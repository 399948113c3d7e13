#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lgcn/common.hpp"

namespace lgcn {

// Dense row-major matrix. Trainers instantiate it at float or double; all
// oracle paths run at double.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

  static Matrix from(std::size_t rows, std::size_t cols, std::vector<T> values) {
    if (values.size() != rows * cols)
      throw ValidationError("matrix: value count does not match shape");
    Matrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.data_ = std::move(values);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  std::uint64_t byte_size() const {
    return static_cast<std::uint64_t>(data_.size()) * sizeof(T);
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T* row(std::size_t i) { return data_.data() + i * cols_; }
  const T* row(std::size_t i) const { return data_.data() + i * cols_; }
  std::span<T> row_span(std::size_t i) { return {row(i), cols_}; }
  std::span<const T> row_span(std::size_t i) const { return {row(i), cols_}; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  const std::vector<T>& values() const { return data_; }

  bool same_shape(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <typename To, typename From>
Matrix<To> matrix_cast(const Matrix<From>& in) {
  Matrix<To> out(in.rows(), in.cols());
  const From* src = in.data();
  To* dst = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) dst[i] = static_cast<To>(src[i]);
  return out;
}

}  // namespace lgcn
