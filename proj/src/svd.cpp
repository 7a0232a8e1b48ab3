#include "clafr/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "clafr/error.hpp"

namespace clafr {

namespace {

using Column = std::vector<double>;

double col_dot(const Column& a, const Column& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void rotate(Column& a, Column& b, double c, double s) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    a[i] = c * x - s * y;
    b[i] = s * x + c * y;
  }
}

// Unit vector orthogonal to every column in `basis`,
// chosen deterministically among the canonical directions.
Column complete_direction(const std::vector<const Column*>& basis, std::size_t n) {
  Column best;
  double best_norm = -1.0;
  for (std::size_t e = 0; e < n; ++e) {
    Column x(n, 0.0);
    x[e] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (const Column* q : basis) {
        const double p = col_dot(*q, x);
        for (std::size_t i = 0; i < n; ++i) x[i] -= p * (*q)[i];
      }
    }
    const double nx = std::sqrt(col_dot(x, x));
    if (nx > best_norm) {
      best_norm = nx;
      best = std::move(x);
    }
    if (best_norm > 0.5) break;
  }
  for (double& v : best) v /= best_norm;
  return best;
}

struct TallResult {
  std::vector<Column> u;  // k columns, length rows
  std::vector<double> sigma;
  std::vector<Column> v;  // k columns, length k
};

// One-sided Jacobi on a tall (rows ≥ cols) matrix given by its columns.
TallResult jacobi_tall(std::vector<Column> a, const JacobiOptions& opt) {
  const std::size_t n = a.size();
  const std::size_t rows = n ? a[0].size() : 0;

  std::vector<Column> v(n, Column(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  bool converged = n < 2;
  int sweep = 0;
  while (!converged) {
    if (sweep == opt.max_sweeps) {
      throw ConvergenceError("svd: Jacobi sweeps did not converge after " +
                                 std::to_string(sweep) + " sweeps",
                             sweep);
    }
    ++sweep;
    std::size_t rotations = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double alpha = col_dot(a[i], a[i]);
        const double beta = col_dot(a[j], a[j]);
        const double gamma = col_dot(a[i], a[j]);
        const double scale = std::sqrt(alpha) * std::sqrt(beta);
        if (!(std::abs(gamma) > opt.tolerance * scale)) continue;
        if (std::abs(gamma) < std::numeric_limits<double>::min()) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate(a[i], a[j], c, s);
        rotate(v[i], v[j], c, s);
        ++rotations;
      }
    }
    converged = rotations == 0;
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = std::sqrt(col_dot(a[j], a[j]));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  TallResult out;
  out.sigma.resize(n);
  out.u.resize(n);
  out.v.resize(n);
  const double sigma_max = n ? sigma[order[0]] : 0.0;
  const double negligible =
      sigma_max * static_cast<double>(std::max(rows, n)) * std::numeric_limits<double>::epsilon();
  std::vector<bool> needs_completion(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.sigma[k] = sigma[j];
    out.v[k] = std::move(v[j]);
    if (sigma[j] > negligible && sigma[j] > 0.0) {
      out.u[k] = std::move(a[j]);
      for (double& x : out.u[k]) x /= sigma[j];
    } else {
      needs_completion[k] = true;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!needs_completion[k]) continue;
    std::vector<const Column*> basis;
    for (std::size_t q = 0; q < n; ++q) {
      if (!out.u[q].empty()) basis.push_back(&out.u[q]);
    }
    out.u[k] = complete_direction(basis, rows);
  }
  return out;
}

}  // namespace

SvdFactors svd(const Matrix& w, const JacobiOptions& options) {
  if (w.rows() == 0 || w.cols() == 0) {
    throw ShapeError("svd: input must have at least one row and one column");
  }
  const bool tall = w.rows() >= w.cols();
  const Matrix& src = w;
  std::vector<Column> cols;
  if (tall) {
    cols.resize(w.cols());
    for (std::size_t c = 0; c < w.cols(); ++c) cols[c] = src.col(c);
  } else {
    cols.resize(w.rows());
    for (std::size_t r = 0; r < w.rows(); ++r) {
      auto row = src.row(r);
      cols[r].assign(row.begin(), row.end());
    }
  }

  TallResult t = jacobi_tall(std::move(cols), options);
  const std::size_t k = t.sigma.size();
  const std::size_t long_len = tall ? w.rows() : w.cols();

  Matrix left = Matrix::from_columns(t.u, long_len);
  Matrix right = Matrix::from_columns(t.v, k);
  Vector sigma(std::move(t.sigma));
  if (tall) return SvdFactors{std::move(left), std::move(sigma), std::move(right)};
  return SvdFactors{std::move(right), std::move(sigma), std::move(left)};
}

Matrix reconstruct(const SvdFactors& f) {
  const std::size_t k = f.sigma.size();
  if (f.u.cols() != k || f.v.cols() != k) throw ShapeError("reconstruct: factor shapes disagree");
  std::vector<double> us(f.u.rows() * k);
  for (std::size_t r = 0; r < f.u.rows(); ++r)
    for (std::size_t c = 0; c < k; ++c) us[r * k + c] = f.u(r, c) * f.sigma[c];
  return matmul(Matrix(f.u.rows(), k, std::move(us)), f.v.transposed());
}

}  // namespace clafr
