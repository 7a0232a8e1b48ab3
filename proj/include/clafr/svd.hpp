#pragma once

#include "clafr/tensor.hpp"

namespace clafr {

/// Thin singular value decomposition w = u · diag(sigma) · vᵀ.
///
/// For a D×C input with k = min(D, C): u is D×k, sigma has length k and is
/// sorted descending, v is C×k. Columns of u and v are orthonormal; left
/// vectors belonging to zero singular values are completed to an
/// orthonormal set. Signs of singular vectors are arbitrary.
struct SvdFactors {
  Matrix u;
  Vector sigma;
  Matrix v;
};

struct JacobiOptions {
  int max_sweeps = 100;
  /// A column pair counts as orthogonal once |aᵢ·aⱼ| ≤ tolerance·‖aᵢ‖‖aⱼ‖.
  double tolerance = 1e-12;
};

/// One-sided (Hestenes) Jacobi SVD with a fixed cyclic pair order, so the
/// result is a deterministic function of the input.
///
/// Throws ShapeError for an empty input and ConvergenceError (carrying the
/// sweep count) if rotations are still required after `max_sweeps`.
SvdFactors svd(const Matrix& w, const JacobiOptions& options = {});

/// u · diag(sigma) · vᵀ.
Matrix reconstruct(const SvdFactors& f);

}  // namespace clafr
