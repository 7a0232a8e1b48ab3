#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "clafr/io.hpp"
#include "clafr/tensor.hpp"

namespace clafr {

/// Identifies the scorer configuration that produced a batch of scores.
/// Two batches are comparable only when their fingerprints are equal.
struct Fingerprint {
  std::string method;
  std::optional<double> alpha;
  std::optional<std::size_t> m;
  std::optional<bool> normalize;
  std::optional<std::uint64_t> weight_hash;
  std::optional<std::size_t> k;

  /// Stable single-line rendering, e.g. `clafr alpha=0.9 m=9 normalize=true w=…`.
  std::string canonical() const;
  io::KeyValues to_key_values() const;
  static Fingerprint from_key_values(const io::KeyValues& kv);

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

/// Per-sample scores (higher = more in-distribution) plus provenance.
struct ScoredBatch {
  Vector scores;
  Fingerprint fingerprint;
  /// Wall-clock time spent scoring the whole batch.
  double elapsed_ns = 0.0;

  std::size_t size() const noexcept { return scores.size(); }
};

}  // namespace clafr
