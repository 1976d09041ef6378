#pragma once

// Deterministic splitmix64 generator and stream derivation.
//
// Every random decision in the engine is drawn from a stream derived from
// (seed, purpose tag, index), so per-sample work may run in any order or on
// any number of threads without changing results. The algorithm is fixed and
// documented in docs/FORMAT.md so other implementations can reproduce it.

#include <cstddef>
#include <cstdint>

namespace cardiomix {

/// splitmix64 output mixing function applied to `x + golden gamma`.
std::uint64_t mix64(std::uint64_t x) noexcept;

enum class StreamTag : std::uint64_t {
  Window = 1,
  LabeledToUnlabeled = 2,
  UnlabeledToLabeled = 3,
  Vanilla = 4,
  BatchSampling = 5,
  Synthesis = 6,
  Corruption = 7,
};

class Rng {
public:
  explicit Rng(std::uint64_t state) noexcept : state_(state) {}

  /// Independent stream for (seed, tag, index).
  static Rng derive(std::uint64_t seed, StreamTag tag, std::uint64_t index) noexcept;

  std::uint64_t next() noexcept;

  /// Uniform integer in [lo, hi] (inclusive), unbiased by rejection.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept;

  /// Standard normal via Box-Muller (no cached second variate).
  double normal() noexcept;

private:
  std::uint64_t state_;
};

}  // namespace cardiomix
