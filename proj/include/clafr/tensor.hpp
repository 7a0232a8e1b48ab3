#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace clafr {

/// Dense real-64 vector. Entries are finite; contents are fixed at construction.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::vector<double> data);
  Vector(std::initializer_list<double> values);

  static Vector zeros(std::size_t len);

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  double operator[](std::size_t i) const { return data_[i]; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

/// Dense real-64 matrix stored row-major. Entries are finite; contents are
/// fixed at construction.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix zeros(std::size_t rows, std::size_t cols);
  static Matrix identity(std::size_t n);
  /// Matrix whose columns are the given vectors (all of equal length).
  static Matrix from_columns(std::span<const std::vector<double>> columns, std::size_t rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }
  std::vector<double> col(std::size_t c) const;
  std::span<const double> values() const noexcept { return data_; }

  Matrix transposed() const;
  /// First `n` columns.
  Matrix left_columns(std::size_t n) const;
  /// Rows listed in `indices`, in that order.
  Matrix select_rows(std::span<const std::size_t> indices) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Standard product a·b. Throws ShapeError when a.cols() != b.rows().
Matrix matmul(const Matrix& a, const Matrix& b);

/// Row vector times matrix: zᵀ·m. Throws ShapeError when z.size() != m.rows().
Vector row_times(std::span<const double> z, const Matrix& m);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);
inline double l2_norm(const Vector& v) { return l2_norm(v.values()); }

/// Frobenius norm.
double frobenius_norm(const Matrix& m);
/// Frobenius norm of a − b. Throws ShapeError on mismatch.
double frobenius_distance(const Matrix& a, const Matrix& b);

/// Scales a vector to unit L2 norm; the zero vector is returned unchanged.
std::vector<double> normalized(std::span<const double> v);

/// Scales every nonzero row to unit L2 norm; zero rows pass through.
Matrix normalize_rows(const Matrix& z);

/// ‖mᵀm − I‖_F. Zero for a matrix with exactly orthonormal columns.
double orthonormality_defect(const Matrix& m);

/// 64-bit FNV-1a over the shape and the IEEE-754 bits of every entry.
std::uint64_t content_hash(const Matrix& m);
/// Zero-padded 16-digit lowercase hex.
std::string hash_hex(std::uint64_t h);

/// True when every entry is finite.
bool all_finite(std::span<const double> v) noexcept;

}  // namespace clafr
