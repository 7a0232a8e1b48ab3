#pragma once

#include <cstdint>

namespace clafr {

/// xoshiro256** seeded through splitmix64, with Box–Muller normals.
/// The stream is a pure function of the seed on every platform (normal
/// draws rely on the platform's log/sqrt/cos/sin).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal.
  double normal() noexcept;

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

}  // namespace clafr
