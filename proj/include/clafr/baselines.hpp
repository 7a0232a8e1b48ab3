#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "clafr/scored_batch.hpp"
#include "clafr/tensor.hpp"

namespace clafr {

// Logit-based baselines. Every score is oriented so that higher = more
// in-distribution. Inputs must be non-empty.

/// Largest softmax probability.
double msp_score(std::span<const double> logits);
/// log Σ exp(logitᵢ), i.e. the negated free energy.
double energy_score(std::span<const double> logits);
double maxlogit_score(std::span<const double> logits);

/// Training features for the KNN baseline, rows unit-normalised at
/// construction.
class FeatureBank {
 public:
  /// Throws ConfigError for an empty bank or an all-zero row.
  explicit FeatureBank(const Matrix& features, std::string source = {});

  const Matrix& features() const noexcept { return features_; }
  std::size_t size() const noexcept { return features_.rows(); }
  std::size_t dim() const noexcept { return features_.cols(); }
  const std::string& source() const noexcept { return source_; }

 private:
  Matrix features_;
  std::string source_;
};

inline constexpr std::size_t kDefaultKnnK = 10;

/// Negative Euclidean distance from the normalised z to its k-th nearest
/// bank row, by exhaustive scan. Throws ConfigError for k outside
/// [1, bank.size()] and ShapeError on a dimension mismatch.
double knn_score(std::span<const double> z, const FeatureBank& bank, std::size_t k);

/// z · W: N×C logits from N×D features and D×C weights.
Matrix logits_from_features(const Matrix& z, const Matrix& w);

enum class LogitMethod { kMsp, kEnergy, kMaxLogit };

std::string method_name(LogitMethod m);
double logit_score(LogitMethod m, std::span<const double> logits);

/// Timed row-wise scoring of a logit matrix.
ScoredBatch score_logits(const Matrix& logits, LogitMethod m);
/// Timed row-wise KNN scoring.
ScoredBatch score_knn(const Matrix& z, const FeatureBank& bank, std::size_t k);

}  // namespace clafr
