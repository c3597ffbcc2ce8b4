#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "btm/error.hpp"

namespace btm {

/// Dense row-major matrix. Embeddings are stored as float (the on-disk
/// precision) and promoted to double whenever arithmetic happens.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw Error(ErrorKind::dimension_mismatch,
                  "matrix payload " + std::to_string(data_.size()) + " != " +
                      std::to_string(rows_) + "x" + std::to_string(cols_));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const std::vector<T>& data() const noexcept { return data_; }
  std::vector<T>& data() noexcept { return data_; }

  void append_row(std::span<const T> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_)
      throw Error(ErrorKind::dimension_mismatch,
                  "row of length " + std::to_string(values.size()) + " appended to matrix with " +
                      std::to_string(cols_) + " columns");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <typename T>
double squared_norm(std::span<const T> v) {
  double s = 0.0;
  for (T x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return s;
}

template <typename T>
bool is_zero_vector(std::span<const T> v) {
  for (T x : v)
    if (x != T{}) return false;
  return true;
}

/// Cosine similarity in 64-bit. Rejects zero vectors and mismatched lengths
/// rather than returning NaN.
template <typename T, typename U>
double cosine_similarity(std::span<const T> u, std::span<const U> v) {
  if (u.size() != v.size())
    throw Error(ErrorKind::dimension_mismatch,
                "cosine of vectors with dims " + std::to_string(u.size()) + " and " +
                    std::to_string(v.size()));
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double a = static_cast<double>(u[k]);
    const double b = static_cast<double>(v[k]);
    dot += a * b;
    nu += a * a;
    nv += b * b;
  }
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorKind::zero_vector, "cosine similarity of zero vector");
  const double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  // rounding can push |c| a hair past 1 for parallel vectors
  return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

inline double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v) {
  return cosine_similarity(std::span<const double>(u), std::span<const double>(v));
}

}  // namespace btm
