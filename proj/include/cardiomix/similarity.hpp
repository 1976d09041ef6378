#pragma once

// Cardiac-pattern similarity between equal-width label segments
// (class-averaged IoU) and its evaluation over a strided window scan.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cardiomix/signal_core.hpp"

namespace cardiomix {

/// How a class absent from both segments enters the class average.
enum class AbsentClassRule {
  Exclude,     // average over classes present in at least one segment
  CountAsOne,  // literal 1/C average with absent classes scored as IoU 1
};

inline constexpr std::size_t kMaxClasses = 4;

/// Class-averaged IoU with the exact per-class integer counts retained.
/// Ordering is exact rational comparison, so argmax ties are platform-stable.
class SimScore {
public:
  SimScore() = default;
  SimScore(std::array<std::uint32_t, kMaxClasses> intersection,
           std::array<std::uint32_t, kMaxClasses> union_counts, std::size_t num_classes,
           AbsentClassRule rule);

  double value() const noexcept { return value_; }
  std::uint32_t intersection(std::size_t c) const noexcept { return inter_[c]; }
  std::uint32_t union_count(std::size_t c) const noexcept { return union_[c]; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  AbsentClassRule rule() const noexcept { return rule_; }

  friend std::strong_ordering operator<=>(const SimScore& a, const SimScore& b);
  friend bool operator==(const SimScore& a, const SimScore& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }

private:
  std::array<std::uint32_t, kMaxClasses> inter_{};
  std::array<std::uint32_t, kMaxClasses> union_{};
  std::size_t num_classes_ = kNumClasses;
  AbsentClassRule rule_ = AbsentClassRule::Exclude;
  double value_ = 0.0;
};

/// IoU of class `c`; std::nullopt when the class is in neither segment.
std::optional<double> iou_class(std::span<const ClassId> a, std::span<const ClassId> b, ClassId c);

SimScore sim(std::span<const ClassId> a, std::span<const ClassId> b,
             AbsentClassRule rule = AbsentClassRule::Exclude,
             std::size_t num_classes = kNumClasses);

struct WindowScan {
  std::size_t width = 0;
  std::size_t stride = 0;
  std::vector<std::size_t> starts;
};

/// Starts {0, S, 2S, ...} within [0, T - W], plus T - W when not already
/// present so the last window always reaches the end of the sequence.
WindowScan enumerate_windows(std::size_t length, std::size_t width, std::size_t stride);

/// Run-length index of a key sequence, built once and reused across queries.
class RunIndex {
public:
  RunIndex() = default;
  explicit RunIndex(const LabelSequence& labels);

  std::size_t size() const noexcept { return length_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  const LabelRuns& runs() const noexcept { return runs_; }
  /// Index of the run containing position t.
  std::size_t run_at(std::size_t t) const;

private:
  LabelRuns runs_;
  std::vector<std::size_t> run_starts_;
  std::size_t length_ = 0;
  std::size_t num_classes_ = kNumClasses;
};

/// A query segment prepared for repeated window scoring.
class QueryPattern {
public:
  explicit QueryPattern(std::span<const ClassId> query, std::size_t num_classes = kNumClasses);

  std::size_t width() const noexcept { return width_; }

  /// Score of the key window [start, start + width()) by merging run lists;
  /// cost is linear in the number of runs overlapping the two segments.
  SimScore score(const RunIndex& key, std::size_t start, AbsentClassRule rule) const;

private:
  LabelRuns runs_;
  std::array<std::uint32_t, kMaxClasses> counts_{};
  std::size_t width_ = 0;
  std::size_t num_classes_ = kNumClasses;
};

/// One score per scan start; equal, count for count, to calling `sim` on each
/// window independently.
std::vector<SimScore> sliding_sim(std::span<const ClassId> query, const RunIndex& key,
                                  const WindowScan& scan,
                                  AbsentClassRule rule = AbsentClassRule::Exclude);
std::vector<SimScore> sliding_sim(std::span<const ClassId> query, const LabelSequence& key,
                                  const WindowScan& scan,
                                  AbsentClassRule rule = AbsentClassRule::Exclude);

/// dot(a,b) / (|a| |b|); 0 when either vector is all zeros.
double cosine_signal_sim(std::span<const double> a, std::span<const double> b);

}  // namespace cardiomix
