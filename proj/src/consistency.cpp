#include "cardiomix/consistency.hpp"

namespace cardiomix {

std::vector<Violation> find_violations(const LabelSequence& labels,
                                       const ConsistencyOptions& options) {
  std::vector<Violation> out;
  bool qrs_since_last_t = false;
  bool seen_wave = false;
  for (const LabelRun& run : to_runs(labels)) {
    const auto cls = static_cast<WaveClass>(run.cls);
    if (cls == WaveClass::Background) continue;
    const bool first_wave = !seen_wave;
    seen_wave = true;
    if (cls == WaveClass::Qrs) {
      qrs_since_last_t = true;
    } else if (cls == WaveClass::T) {
      if (!qrs_since_last_t && !(first_wave && options.exempt_first_wave)) {
        out.push_back({run.start, run.end, ViolationReason::NoPrecedingQrs});
      }
      qrs_since_last_t = false;
    }
  }
  return out;
}

double consistency_ratio(std::span<const LabelSequence> batch, const ConsistencyOptions& options) {
  if (batch.empty()) throw ArgumentError("consistency_ratio: empty batch");
  std::size_t valid = 0;
  for (const auto& labels : batch) valid += find_violations(labels, options).empty();
  return static_cast<double>(valid) / static_cast<double>(batch.size());
}

}  // namespace cardiomix
