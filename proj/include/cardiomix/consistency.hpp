#pragma once

// Cardiac-cycle validity: a T wave must be preceded by a QRS complex since
// the previous T wave.

#include <cstddef>
#include <span>
#include <vector>

#include "cardiomix/signal_core.hpp"

namespace cardiomix {

enum class ViolationReason { NoPrecedingQrs };

struct Violation {
  std::size_t start = 0;  // maximal T run [start, end)
  std::size_t end = 0;
  ViolationReason reason = ViolationReason::NoPrecedingQrs;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ConsistencyOptions {
  /// Skip the check for a T run that is the first non-background run of the
  /// sequence (recordings may begin mid-beat).
  bool exempt_first_wave = true;
};

std::vector<Violation> find_violations(const LabelSequence& labels,
                                       const ConsistencyOptions& options = {});

/// Fraction of sequences with no violations. Throws ArgumentError on an
/// empty batch.
double consistency_ratio(std::span<const LabelSequence> batch,
                         const ConsistencyOptions& options = {});

}  // namespace cardiomix
