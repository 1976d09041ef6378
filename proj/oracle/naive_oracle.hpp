#pragma once

// Straight-line reference implementations. These deliberately share no code
// with the engine's search path: every score is recomputed from dense labels
// position by position, so they can serve as independent oracles.

#include <cstddef>
#include <span>
#include <vector>

#include "cardiomix/signal_core.hpp"

namespace cardiomix::oracle {

/// Per-class (intersection, union) counts by direct position scan.
struct NaiveCounts {
  std::vector<std::size_t> intersection;
  std::vector<std::size_t> union_count;
};

NaiveCounts naive_counts(std::span<const ClassId> a, std::span<const ClassId> b,
                         std::size_t num_classes = kNumClasses);

/// Class-averaged IoU over classes present in either segment, as an exact
/// fraction (numerator, denominator) reduced to lowest terms.
struct NaiveFraction {
  unsigned __int128 num = 0;
  unsigned __int128 den = 1;
  friend bool operator==(const NaiveFraction& x, const NaiveFraction& y) {
    return x.num * y.den == y.num * x.den;
  }
};

NaiveFraction naive_sim(std::span<const ClassId> a, std::span<const ClassId> b,
                        bool literal_mean = false, std::size_t num_classes = kNumClasses);

/// a > b, exactly (cross products fit in 128 bits for W <= 10000, C = 4).
bool naive_greater(const NaiveFraction& a, const NaiveFraction& b);

/// Window starts by direct enumeration: multiples of the stride that fit, plus
/// the final position.
std::vector<std::size_t> naive_windows(std::size_t length, std::size_t width, std::size_t stride);

struct NaiveMatch {
  std::size_t source_index = 0;
  std::size_t key_start = 0;
  NaiveFraction score;
};

/// Exhaustive argmax over every (j, start); first strictly-greater wins.
NaiveMatch naive_search(std::span<const ClassId> query, std::span<const LabelSequence> pool,
                        std::size_t stride);

/// Naive splice of dense vectors: out[t] = source[t - q + k] inside the window.
template <typename T>
std::vector<T> naive_splice(const std::vector<T>& target, const std::vector<T>& source,
                            std::size_t query_start, std::size_t key_start, std::size_t width) {
  std::vector<T> out(target.size());
  for (std::size_t t = 0; t < target.size(); ++t) {
    const bool inside = t >= query_start && t < query_start + width;
    out[t] = inside ? source[t - query_start + key_start] : target[t];
  }
  return out;
}

}  // namespace cardiomix::oracle
