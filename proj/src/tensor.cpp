#include "clafr/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <string>

#include "clafr/error.hpp"

namespace clafr {

namespace {

void require_finite(std::span<const double> v, const char* what) {
  if (!all_finite(v)) {
    throw NumericalError(std::string(what) + " contains a non-finite entry");
  }
}

}  // namespace

bool all_finite(std::span<const double> v) noexcept {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Vector::Vector(std::vector<double> data) : data_(std::move(data)) {
  require_finite(data_, "vector");
}

Vector::Vector(std::initializer_list<double> values) : Vector(std::vector<double>(values)) {}

Vector Vector::zeros(std::size_t len) { return Vector(std::vector<double>(len, 0.0)); }

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) + " != " +
                     std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  require_finite(data_, "matrix");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_, "matrix");
}

Matrix Matrix::zeros(std::size_t rows, std::size_t cols) {
  return Matrix(rows, cols, std::vector<double>(rows * cols, 0.0));
}

Matrix Matrix::identity(std::size_t n) {
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 1.0;
  return Matrix(n, n, std::move(d));
}

Matrix Matrix::from_columns(std::span<const std::vector<double>> columns, std::size_t rows) {
  const std::size_t cols = columns.size();
  std::vector<double> d(rows * cols);
  for (std::size_t c = 0; c < cols; ++c) {
    if (columns[c].size() != rows) throw ShapeError("column length mismatch");
    for (std::size_t r = 0; r < rows; ++r) d[r * cols + c] = columns[c][r];
  }
  return Matrix(rows, cols, std::move(d));
}

std::vector<double> Matrix::col(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = data_[r * cols_ + c];
  return out;
}

Matrix Matrix::transposed() const {
  std::vector<double> d(data_.size());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) d[c * rows_ + r] = data_[r * cols_ + c];
  return Matrix(cols_, rows_, std::move(d));
}

Matrix Matrix::left_columns(std::size_t n) const {
  if (n > cols_) throw ShapeError("requested more columns than available");
  std::vector<double> d(rows_ * n);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < n; ++c) d[r * n + c] = data_[r * cols_ + c];
  return Matrix(rows_, n, std::move(d));
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  std::vector<double> d;
  d.reserve(indices.size() * cols_);
  for (std::size_t i : indices) {
    if (i >= rows_) throw ShapeError("row index out of range");
    auto r = row(i);
    d.insert(d.end(), r.begin(), r.end());
  }
  return Matrix(indices.size(), cols_, std::move(d));
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  std::vector<double> out(n * m, 0.0);
  const auto bv = b.values();
  for (std::size_t i = 0; i < n; ++i) {
    double* dst = out.data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a(i, p);
      const double* src = bv.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) dst[j] += aip * src[j];
    }
  }
  return Matrix(n, m, std::move(out));
}

Vector row_times(std::span<const double> z, const Matrix& m) {
  if (z.size() != m.rows()) {
    throw ShapeError("row_times: vector length " + std::to_string(z.size()) +
                     " != matrix rows " + std::to_string(m.rows()));
  }
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double zr = z[r];
    auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] += zr * row[c];
  }
  return Vector(std::move(out));
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> v) {
  // Scale by the largest magnitude so squares cannot overflow.
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  if (scale > 1e150 || scale < 1e-150) {
    double s = 0.0;
    for (double x : v) {
      const double t = x / scale;
      s += t * t;
    }
    return scale * std::sqrt(s);
  }
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double frobenius_norm(const Matrix& m) { return l2_norm(m.values()); }

double frobenius_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("frobenius_distance: shape mismatch");
  double s = 0.0;
  auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<double> normalized(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  const double n = l2_norm(v);
  if (n > 0.0) {
    for (double& x : out) x /= n;
  }
  return out;
}

Matrix normalize_rows(const Matrix& z) {
  std::vector<double> out;
  out.reserve(z.rows() * z.cols());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto n = normalized(z.row(r));
    out.insert(out.end(), n.begin(), n.end());
  }
  return Matrix(z.rows(), z.cols(), std::move(out));
}

double orthonormality_defect(const Matrix& m) {
  const std::size_t k = m.cols();
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double g = 0.0;
      for (std::size_t r = 0; r < m.rows(); ++r) g += m(r, i) * m(r, j);
      const double d = g - (i == j ? 1.0 : 0.0);
      s += d * d;
    }
  }
  return std::sqrt(s);
}

std::uint64_t content_hash(const Matrix& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      h ^= (word >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  mix(m.rows());
  mix(m.cols());
  for (double v : m.values()) mix(std::bit_cast<std::uint64_t>(v));
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace clafr
