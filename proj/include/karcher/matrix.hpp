#pragma once

// Dense row-major matrix with value semantics. Only what the SPD routines
// need: elementwise arithmetic, products, transpose and a few norms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "karcher/error.hpp"

namespace karcher {

template <typename T = double>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// Nested-brace construction, e.g. `Matrix<>{{2, 1}, {1, 2}}`.
  Matrix(std::initializer_list<std::initializer_list<T>> rows)
      : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) throw DimensionMismatch("ragged initializer list");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  static Matrix diagonal(std::span<const T> values) {
    Matrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
  }

  static Matrix diagonal(std::initializer_list<T> values) {
    return diagonal(std::span<const T>(values.begin(), values.size()));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  template <typename U>
  Matrix<U> cast() const {
    Matrix<U> out(rows_, cols_);
    auto dst = out.data();
    for (std::size_t k = 0; k < data_.size(); ++k) dst[k] = static_cast<U>(data_[k]);
    return out;
  }

  Matrix& operator+=(const Matrix& rhs) {
    require_same_shape(rhs, "operator+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs.data_[k];
    return *this;
  }

  Matrix& operator-=(const Matrix& rhs) {
    require_same_shape(rhs, "operator-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs.data_[k];
    return *this;
  }

  Matrix& operator*=(const T& s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  Matrix& operator/=(const T& s) {
    for (auto& v : data_) v /= s;
    return *this;
  }

  friend Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
  friend Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
  friend Matrix operator*(Matrix lhs, const T& s) { return lhs *= s; }
  friend Matrix operator*(const T& s, Matrix rhs) { return rhs *= s; }
  friend Matrix operator/(Matrix lhs, const T& s) { return lhs /= s; }
  friend Matrix operator-(Matrix m) { return m *= T(-1); }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_)
      throw DimensionMismatch("matrix product: " + a.shape() + " * " + b.shape());
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T aik = a(i, k);
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

  void require_same_shape(const Matrix& other, const char* where) const {
    if (rows_ != other.rows_ || cols_ != other.cols_)
      throw DimensionMismatch(std::string(where) + ": " + shape() + " vs " + other.shape());
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <typename T>
T frobenius_norm(const Matrix<T>& m) {
  using std::sqrt;
  T sum(0);
  for (const auto& v : m.data()) sum += v * v;
  return sqrt(sum);
}

template <typename T>
T trace(const Matrix<T>& m) {
  if (!m.square()) throw DimensionMismatch("trace of non-square " + m.shape());
  T sum(0);
  for (std::size_t i = 0; i < m.rows(); ++i) sum += m(i, i);
  return sum;
}

/// (M + Mᵀ) / 2.
template <typename T>
Matrix<T> symmetrized(const Matrix<T>& m) {
  if (!m.square()) throw DimensionMismatch("symmetrize non-square " + m.shape());
  Matrix<T> s(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    s(i, i) = m(i, i);
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      const T v = (m(i, j) + m(j, i)) / T(2);
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return s;
}

/// ‖M − Mᵀ‖_F / ‖M‖_F (zero for the zero matrix).
template <typename T>
T relative_asymmetry(const Matrix<T>& m) {
  if (!m.square()) throw DimensionMismatch("asymmetry of non-square " + m.shape());
  T off(0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      const T d = m(i, j) - m(j, i);
      off += T(2) * d * d;
    }
  using std::sqrt;
  const T norm = frobenius_norm(m);
  return norm == T(0) ? T(0) : sqrt(off) / norm;
}

template <typename T>
std::ostream& operator<<(std::ostream& os, const Matrix<T>& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << (i == 0 ? "[[" : " [");
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << m(i, j);
    os << (i + 1 == m.rows() ? "]]" : "]\n");
  }
  return os;
}

}  // namespace karcher
