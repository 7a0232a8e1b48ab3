#include "clafr/subspace.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "clafr/error.hpp"

namespace clafr {

namespace {

constexpr double kOrthonormalTolerance = 1e-10;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must lie in (0, 1], got " + io::format_double(alpha));
  }
}

std::vector<double> prepared(std::span<const double> z, const Subspace& s, const SubspaceConfig& cfg) {
  if (z.size() != s.dim()) {
    throw ShapeError("feature length " + std::to_string(z.size()) + " != subspace dim " +
                     std::to_string(s.dim()));
  }
  if (cfg.normalize_features) return normalized(z);
  return std::vector<double>(z.begin(), z.end());
}

}  // namespace

void SubspaceConfig::validate(std::optional<std::size_t> max_rank) const {
  check_alpha(alpha);
  if (m_override) {
    if (*m_override == 0) throw ConfigError("m override must be at least 1");
    if (max_rank && *m_override > *max_rank) {
      throw ConfigError("m override " + std::to_string(*m_override) + " exceeds min(D, C) = " +
                        std::to_string(*max_rank));
    }
  }
}

Subspace::Subspace(Matrix basis, double alpha_used, Vector sigma, std::uint64_t weight_fingerprint)
    : basis_(std::move(basis)),
      alpha_used_(alpha_used),
      sigma_(std::move(sigma)),
      weight_fingerprint_(weight_fingerprint) {
  if (basis_.cols() == 0 || basis_.rows() == 0) throw ShapeError("subspace basis must be non-empty");
  if (basis_.cols() > basis_.rows()) throw ShapeError("subspace basis has more columns than rows");
  if (basis_.cols() > sigma_.size()) throw ShapeError("subspace m exceeds the number of singular values");
  for (std::size_t i = 0; i < sigma_.size(); ++i) {
    if (sigma_[i] < 0.0 || (i > 0 && sigma_[i] > sigma_[i - 1])) {
      throw NumericalError("singular values must be non-negative and descending");
    }
  }
  const double defect = orthonormality_defect(basis_);
  if (defect > kOrthonormalTolerance) {
    throw NumericalError("subspace basis is not orthonormal (defect " + io::format_double(defect) + ")");
  }
}

std::size_t select_m(const Vector& sigma, double alpha) {
  check_alpha(alpha);
  double total = 0.0;
  for (double s : sigma.values()) total += s;
  if (!(total > 0.0)) throw DegenerateWeightsError("all singular values are zero");
  const double target = alpha * total;
  double partial = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    partial += sigma[i];
    if (partial > target) return i + 1;
  }
  // alpha = 1 with exact summation lands here: every direction is needed,
  // trailing zero singular values excluded.
  std::size_t rank = sigma.size();
  while (rank > 1 && sigma[rank - 1] == 0.0) --rank;
  return rank;
}

Subspace build_subspace(const SvdFactors& factors, std::uint64_t weight_fingerprint,
                        const SubspaceConfig& cfg) {
  const std::size_t k = factors.sigma.size();
  cfg.validate(k);
  std::size_t m = 0;
  if (cfg.m_override) {
    double total = 0.0;
    for (double s : factors.sigma.values()) total += s;
    if (!(total > 0.0)) throw DegenerateWeightsError("all singular values are zero");
    m = *cfg.m_override;
  } else {
    m = select_m(factors.sigma, cfg.alpha);
  }
  return Subspace(factors.u.left_columns(m), cfg.alpha, factors.sigma, weight_fingerprint);
}

Subspace build_subspace(const Matrix& weights, const SubspaceConfig& cfg) {
  if (weights.rows() == 0 || weights.cols() == 0) throw ShapeError("weights must be at least 1x1");
  cfg.validate(std::min(weights.rows(), weights.cols()));
  return build_subspace(svd(weights), content_hash(weights), cfg);
}

double clafr_score(std::span<const double> z, const Subspace& s, const SubspaceConfig& cfg) {
  const std::vector<double> x = prepared(z, s, cfg);
  const double score = l2_norm(row_times(x, s.basis()));
  // A unit vector's projection cannot be longer than 1; clip rounding.
  return cfg.normalize_features ? std::min(score, 1.0) : score;
}

double reconstruction_error(std::span<const double> z, const Subspace& s, const SubspaceConfig& cfg) {
  const std::vector<double> x = prepared(z, s, cfg);
  const Vector coords = row_times(x, s.basis());
  const Matrix& u = s.basis();
  std::vector<double> residual(x.size());
  for (std::size_t r = 0; r < u.rows(); ++r) {
    double back = 0.0;
    for (std::size_t c = 0; c < u.cols(); ++c) back += u(r, c) * coords[c];
    residual[r] = back - x[r];
  }
  return -l2_norm(residual);
}

Vector score_rows(const Matrix& z, const Subspace& s, const SubspaceConfig& cfg) {
  if (z.cols() != s.dim()) {
    throw ShapeError("feature dim " + std::to_string(z.cols()) + " != subspace dim " +
                     std::to_string(s.dim()));
  }
  std::vector<double> out(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) out[i] = clafr_score(z.row(i), s, cfg);
  return Vector(std::move(out));
}

Fingerprint clafr_fingerprint(const Subspace& s, const SubspaceConfig& cfg) {
  Fingerprint f;
  f.method = "clafr";
  f.alpha = s.alpha_used();
  f.m = s.m();
  f.normalize = cfg.normalize_features;
  f.weight_hash = s.weight_fingerprint();
  return f;
}

ScoredBatch score_batch(const Matrix& z, const Subspace& s, const SubspaceConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  Vector scores = score_rows(z, s, cfg);
  const auto stop = std::chrono::steady_clock::now();
  return ScoredBatch{std::move(scores), clafr_fingerprint(s, cfg),
                     std::chrono::duration<double, std::nano>(stop - start).count()};
}

}  // namespace clafr
