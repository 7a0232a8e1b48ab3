#include "clafr/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "clafr/error.hpp"

namespace clafr {

namespace {

double max_of(std::span<const double> x) {
  if (x.empty()) throw ShapeError("logit vector must be non-empty");
  return *std::max_element(x.begin(), x.end());
}

template <class F>
ScoredBatch timed_rows(std::size_t n, Fingerprint fp, F&& score_row) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = score_row(i);
  const auto stop = std::chrono::steady_clock::now();
  return ScoredBatch{Vector(std::move(out)), std::move(fp),
                     std::chrono::duration<double, std::nano>(stop - start).count()};
}

}  // namespace

double msp_score(std::span<const double> logits) {
  const double top = max_of(logits);
  double denom = 0.0;
  for (double l : logits) denom += std::exp(l - top);
  return 1.0 / denom;
}

double energy_score(std::span<const double> logits) {
  const double top = max_of(logits);
  double s = 0.0;
  for (double l : logits) s += std::exp(l - top);
  return top + std::log(s);
}

double maxlogit_score(std::span<const double> logits) { return max_of(logits); }

FeatureBank::FeatureBank(const Matrix& features, std::string source)
    : features_(normalize_rows(features)), source_(std::move(source)) {
  if (features_.rows() == 0) throw ConfigError("feature bank is empty");
  for (std::size_t r = 0; r < features_.rows(); ++r) {
    if (l2_norm(features_.row(r)) == 0.0) {
      throw ConfigError("feature bank row " + std::to_string(r) + " is all zeros");
    }
  }
}

double knn_score(std::span<const double> z, const FeatureBank& bank, std::size_t k) {
  if (k < 1 || k > bank.size()) {
    throw ConfigError("k = " + std::to_string(k) + " outside [1, " + std::to_string(bank.size()) + "]");
  }
  if (z.size() != bank.dim()) {
    throw ShapeError("feature length " + std::to_string(z.size()) + " != bank dim " +
                     std::to_string(bank.dim()));
  }
  const std::vector<double> q = normalized(z);
  const Matrix& b = bank.features();
  std::vector<double> d2(b.rows());
  for (std::size_t r = 0; r < b.rows(); ++r) {
    const auto row = b.row(r);
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double t = q[i] - row[i];
      s += t * t;
    }
    d2[r] = s;
  }
  std::nth_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(k - 1), d2.end());
  return -std::sqrt(d2[k - 1]);
}

Matrix logits_from_features(const Matrix& z, const Matrix& w) { return matmul(z, w); }

std::string method_name(LogitMethod m) {
  switch (m) {
    case LogitMethod::kMsp:
      return "msp";
    case LogitMethod::kEnergy:
      return "energy";
    case LogitMethod::kMaxLogit:
      return "maxlogit";
  }
  return "unknown";
}

double logit_score(LogitMethod m, std::span<const double> logits) {
  switch (m) {
    case LogitMethod::kMsp:
      return msp_score(logits);
    case LogitMethod::kEnergy:
      return energy_score(logits);
    case LogitMethod::kMaxLogit:
      return maxlogit_score(logits);
  }
  return 0.0;
}

ScoredBatch score_logits(const Matrix& logits, LogitMethod m) {
  Fingerprint fp;
  fp.method = method_name(m);
  return timed_rows(logits.rows(), std::move(fp),
                    [&](std::size_t i) { return logit_score(m, logits.row(i)); });
}

ScoredBatch score_knn(const Matrix& z, const FeatureBank& bank, std::size_t k) {
  if (z.cols() != bank.dim()) {
    throw ShapeError("feature dim " + std::to_string(z.cols()) + " != bank dim " +
                     std::to_string(bank.dim()));
  }
  Fingerprint fp;
  fp.method = "knn";
  fp.k = k;
  return timed_rows(z.rows(), std::move(fp), [&](std::size_t i) { return knn_score(z.row(i), bank, k); });
}

}  // namespace clafr
