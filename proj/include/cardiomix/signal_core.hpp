#pragma once

// Core data model: ECG records, per-timestep wave labels (dense and
// run-length forms), teacher probability maps and fixed-width windows.
//
// All intervals in this library are 0-based and half-open: a window
// starting at `start` with width `W` covers [start, start + W).

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cardiomix {

/// Invalid caller-supplied argument (maps to CLI exit code 2).
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent data (maps to CLI exit code 3).
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using ClassId = std::uint8_t;

enum class WaveClass : ClassId { Background = 0, P = 1, Qrs = 2, T = 3 };

inline constexpr std::size_t kNumClasses = 4;

constexpr ClassId to_id(WaveClass c) noexcept { return static_cast<ClassId>(c); }

const char* class_name(ClassId c) noexcept;

struct EcgRecord {
  std::string record_id;
  std::string lead_id;
  std::uint32_t sample_rate = 250;
  std::vector<double> samples;

  std::size_t size() const noexcept { return samples.size(); }

  /// Throws FormatError unless T >= 1, sample_rate >= 1 and all samples are finite.
  void validate() const;
};

/// Dense per-timestep class ids.
class LabelSequence {
public:
  LabelSequence() = default;
  explicit LabelSequence(std::vector<ClassId> classes, std::size_t num_classes = kNumClasses);
  LabelSequence(std::size_t length, ClassId fill, std::size_t num_classes = kNumClasses);

  /// Parses a string of decimal digits, e.g. "00220330".
  static LabelSequence from_string(std::string_view digits);

  std::size_t size() const noexcept { return classes_.size(); }
  bool empty() const noexcept { return classes_.empty(); }
  std::size_t num_classes() const noexcept { return num_classes_; }
  ClassId operator[](std::size_t t) const noexcept { return classes_[t]; }
  std::span<const ClassId> view() const noexcept { return classes_; }
  std::span<const ClassId> slice(std::size_t start, std::size_t width) const;
  const std::vector<ClassId>& values() const noexcept { return classes_; }
  std::vector<ClassId>& mutable_values() noexcept { return classes_; }

  std::string to_string() const;

  friend bool operator==(const LabelSequence&, const LabelSequence&) = default;

private:
  std::vector<ClassId> classes_;
  std::size_t num_classes_ = kNumClasses;
};

struct LabelRun {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
  ClassId cls = 0;

  std::size_t length() const noexcept { return end - start; }
  friend bool operator==(const LabelRun&, const LabelRun&) = default;
};

using LabelRuns = std::vector<LabelRun>;

/// Expands runs that tile [0, length) exactly. Throws FormatError naming the
/// first offending run on overlap, gap, empty run or coverage mismatch.
LabelSequence to_dense(std::span<const LabelRun> runs, std::size_t length,
                       std::size_t num_classes = kNumClasses);

/// Minimal (adjacent-merged) run list.
LabelRuns to_runs(std::span<const ClassId> dense);
inline LabelRuns to_runs(const LabelSequence& dense) { return to_runs(dense.view()); }

/// Per-timestep class distributions, row-major T x C.
class ProbabilityMap {
public:
  ProbabilityMap() = default;
  ProbabilityMap(std::size_t length, std::size_t num_classes, std::vector<double> values);

  /// One-hot map of `labels`.
  static ProbabilityMap one_hot(const LabelSequence& labels);

  std::size_t size() const noexcept { return length_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  std::span<const double> row(std::size_t t) const noexcept {
    return {values_.data() + t * num_classes_, num_classes_};
  }
  double at(std::size_t t, std::size_t c) const noexcept { return values_[t * num_classes_ + c]; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Entries in [0,1], rows summing to 1 within `tolerance`.
  void validate(double tolerance = 1e-6) const;

private:
  std::size_t length_ = 0;
  std::size_t num_classes_ = kNumClasses;
  std::vector<double> values_;
};

/// Pseudo-labels: per-timestep argmax, ties resolved to the lowest class id.
LabelSequence argmax_labels(const ProbabilityMap& probs);

struct Window {
  std::size_t start = 0;
  std::size_t width = 1;

  std::size_t end() const noexcept { return start + width; }
  bool fits(std::size_t length) const noexcept {
    return width >= 1 && start <= length && width <= length - start;
  }
  friend bool operator==(const Window&, const Window&) = default;
};

}  // namespace cardiomix
