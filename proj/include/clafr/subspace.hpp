#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "clafr/svd.hpp"
#include "clafr/tensor.hpp"

namespace clafr {

inline constexpr double kDefaultAlpha = 0.9;

/// How the class-known subspace is cut from the weight SVD and how features
/// are prepared before projection.
struct SubspaceConfig {
  /// Fraction of the total singular-value sum the retained directions must
  /// strictly exceed. In (0, 1].
  double alpha = kDefaultAlpha;
  /// Scale each feature to unit norm before projecting.
  bool normalize_features = true;
  /// Fixed subspace dimension; takes precedence over alpha.
  std::optional<std::size_t> m_override;

  /// Throws ConfigError unless alpha ∈ (0, 1]. When `max_rank` is given the
  /// override must also lie in [1, max_rank].
  void validate(std::optional<std::size_t> max_rank = std::nullopt) const;
};

/// Immutable detector state: an orthonormal D×m basis of the class-known
/// subspace together with how it was chosen.
class Subspace {
 public:
  /// Throws ShapeError/NumericalError if the basis is empty, wider than tall,
  /// not orthonormal within 1e-10, or `sigma` is not descending and
  /// non-negative.
  Subspace(Matrix basis, double alpha_used, Vector sigma, std::uint64_t weight_fingerprint);

  const Matrix& basis() const noexcept { return basis_; }
  std::size_t dim() const noexcept { return basis_.rows(); }
  std::size_t m() const noexcept { return basis_.cols(); }
  double alpha_used() const noexcept { return alpha_used_; }
  const Vector& sigma() const noexcept { return sigma_; }
  std::uint64_t weight_fingerprint() const noexcept { return weight_fingerprint_; }

 private:
  Matrix basis_;
  double alpha_used_;
  Vector sigma_;
  std::uint64_t weight_fingerprint_;
};

/// Smallest m with σ₁ + … + σₘ > alpha · Σσ (strict). Requires a descending,
/// non-negative sigma. Throws DegenerateWeightsError if every σ is zero and
/// ConfigError for alpha outside (0, 1].
std::size_t select_m(const Vector& sigma, double alpha);

/// SVD of the D×C weights, then the top-m left singular vectors.
Subspace build_subspace(const Matrix& weights, const SubspaceConfig& cfg);

/// Same cut from precomputed factors, so one SVD can serve many alphas.
Subspace build_subspace(const SvdFactors& factors, std::uint64_t weight_fingerprint,
                        const SubspaceConfig& cfg);

/// ‖zᵀ·U_M‖₂ (after unit-normalising z when the config says so). Higher
/// means more in-distribution.
double clafr_score(std::span<const double> z, const Subspace& s, const SubspaceConfig& cfg);

/// −‖z·U_M·U_Mᵀ − z‖₂, computed explicitly through the back-projection.
double reconstruction_error(std::span<const double> z, const Subspace& s, const SubspaceConfig& cfg);

/// clafr_score for every row of z, in order.
Vector score_rows(const Matrix& z, const Subspace& s, const SubspaceConfig& cfg);

}  // namespace clafr

#include "clafr/scored_batch.hpp"

namespace clafr {

Fingerprint clafr_fingerprint(const Subspace& s, const SubspaceConfig& cfg);

/// Timed score_rows, tagged with the subspace fingerprint.
ScoredBatch score_batch(const Matrix& z, const Subspace& s, const SubspaceConfig& cfg);

}  // namespace clafr
