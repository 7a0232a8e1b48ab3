#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "clafr/tensor.hpp"

namespace clafr {

/// Gaussian-mixture stand-in for extracted network features.
///
/// Class c has mean (class_sep/√2)·q_c for orthonormal random directions
/// q_c, so every pair of means is exactly class_sep apart. OOD samples
/// are centred at ood_shift·q_ood with q_ood orthogonal to all class
/// means (when d > c). Every sample adds isotropic noise of std noise_sigma.
struct SynthConfig {
  std::uint64_t seed = 42;
  std::size_t d = 64;
  std::size_t c = 10;
  std::size_t n_train = 2000;
  std::size_t n_id_test = 1000;
  std::size_t n_ood_test = 1000;
  double class_sep = 4.0;
  double ood_shift = 3.0;
  double noise_sigma = 1.0;

  /// Throws ConfigError unless d ≥ c ≥ 2, the counts are ≥ 1 (n_ood_test
  /// may be 0) and class_sep, noise_sigma > 0.
  void validate() const;
};

struct SynthData {
  Matrix train_features;
  std::vector<std::size_t> train_labels;
  Matrix id_test;
  Matrix ood_test;
  /// c×d, one mean per row.
  Matrix class_means;
  std::vector<double> ood_center;
};

/// Deterministic in cfg: same config, bitwise-identical tensors.
SynthData generate(const SynthConfig& cfg);

/// Nearest-class-mean classifier: column c of the D×C result is the
/// unit-normalised mean of the class-c rows. Throws ConfigError if a class
/// has no samples or a label is ≥ num_classes.
Matrix fit_linear_classifier(const Matrix& features, std::span<const std::size_t> labels,
                             std::size_t num_classes);

}  // namespace clafr
