#include "clafr/synth.hpp"

#include <cmath>
#include <string>

#include "clafr/error.hpp"
#include "clafr/rng.hpp"

namespace clafr {

namespace {

using Column = std::vector<double>;

// Orthonormal set of `count` directions in R^d from Gaussian draws,
// modified Gram–Schmidt applied twice.
std::vector<Column> random_orthonormal(Rng& rng, std::size_t d, std::size_t count) {
  std::vector<Column> q;
  q.reserve(count);
  while (q.size() < count) {
    Column x(d);
    for (double& v : x) v = rng.normal();
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : q) {
        const double p = dot(b, x);
        for (std::size_t i = 0; i < d; ++i) x[i] -= p * b[i];
      }
    }
    const double n = l2_norm(x);
    if (n < 1e-8) continue;
    for (double& v : x) v /= n;
    q.push_back(std::move(x));
  }
  return q;
}

Matrix sample_around(Rng& rng, std::span<const Column> centers, std::size_t n, double noise) {
  const std::size_t d = centers.front().size();
  std::vector<double> data(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const Column& mu = centers[i % centers.size()];
    for (std::size_t j = 0; j < d; ++j) data[i * d + j] = mu[j] + noise * rng.normal();
  }
  return Matrix(n, d, std::move(data));
}

}  // namespace

void SynthConfig::validate() const {
  if (c < 2) throw ConfigError("synthetic config needs c >= 2");
  if (d < c) throw ConfigError("synthetic config needs d >= c");
  if (n_train < 1 || n_id_test < 1) throw ConfigError("synthetic sample counts must be >= 1");
  if (!(class_sep > 0.0)) throw ConfigError("class_sep must be > 0");
  if (!(noise_sigma > 0.0)) throw ConfigError("noise_sigma must be > 0");
  if (!std::isfinite(ood_shift)) throw ConfigError("ood_shift must be finite");
}

SynthData generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const std::size_t extra = cfg.d > cfg.c ? 1 : 0;
  std::vector<Column> dirs = random_orthonormal(rng, cfg.d, cfg.c + extra);

  const double radius = cfg.class_sep / std::sqrt(2.0);
  std::vector<Column> means(cfg.c, Column(cfg.d));
  for (std::size_t k = 0; k < cfg.c; ++k)
    for (std::size_t j = 0; j < cfg.d; ++j) means[k][j] = radius * dirs[k][j];

  Column ood_dir(cfg.d, 0.0);
  if (extra) {
    ood_dir = dirs[cfg.c];
  } else {
    // No room for an orthogonal direction: point away from all classes.
    for (std::size_t k = 0; k < cfg.c; ++k)
      for (std::size_t j = 0; j < cfg.d; ++j) ood_dir[j] -= dirs[k][j];
    ood_dir = normalized(ood_dir);
  }
  Column ood_center(cfg.d);
  for (std::size_t j = 0; j < cfg.d; ++j) ood_center[j] = cfg.ood_shift * ood_dir[j];

  SynthData out;
  out.train_features = sample_around(rng, means, cfg.n_train, cfg.noise_sigma);
  out.train_labels.resize(cfg.n_train);
  for (std::size_t i = 0; i < cfg.n_train; ++i) out.train_labels[i] = i % cfg.c;
  out.id_test = sample_around(rng, means, cfg.n_id_test, cfg.noise_sigma);
  if (cfg.n_ood_test > 0) {
    out.ood_test = sample_around(rng, std::span(&ood_center, 1), cfg.n_ood_test, cfg.noise_sigma);
  } else {
    out.ood_test = Matrix::zeros(0, cfg.d);
  }
  std::vector<double> mean_rows;
  for (const auto& mu : means) mean_rows.insert(mean_rows.end(), mu.begin(), mu.end());
  out.class_means = Matrix(cfg.c, cfg.d, std::move(mean_rows));
  out.ood_center = std::move(ood_center);
  return out;
}

Matrix fit_linear_classifier(const Matrix& features, std::span<const std::size_t> labels,
                             std::size_t num_classes) {
  if (labels.size() != features.rows()) throw ShapeError("one label per feature row required");
  const std::size_t d = features.cols();
  std::vector<Column> sums(num_classes, Column(d, 0.0));
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const std::size_t y = labels[i];
    if (y >= num_classes) throw ConfigError("label " + std::to_string(y) + " >= num_classes");
    const auto row = features.row(i);
    for (std::size_t j = 0; j < d; ++j) sums[y][j] += row[j];
    ++counts[y];
  }
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (counts[k] == 0) throw ConfigError("class " + std::to_string(k) + " has no training samples");
    for (double& v : sums[k]) v /= static_cast<double>(counts[k]);
    sums[k] = normalized(sums[k]);
  }
  return Matrix::from_columns(sums, d);
}

}  // namespace clafr
