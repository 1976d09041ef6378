#pragma once

// Segmentation metrics: global-confusion-matrix mIoU and beat-level
// interval errors (PR, QRS, QT) in milliseconds.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cardiomix/signal_core.hpp"

namespace cardiomix {

/// C x C timestep counts indexed [gt][pred].
class ConfusionMatrix {
public:
  explicit ConfusionMatrix(std::size_t num_classes = kNumClasses);

  void add(const LabelSequence& pred, const LabelSequence& gt);
  void merge(const ConfusionMatrix& other);

  std::size_t num_classes() const noexcept { return num_classes_; }
  std::uint64_t at(std::size_t gt, std::size_t pred) const noexcept {
    return counts_[gt * num_classes_ + pred];
  }
  std::uint64_t total() const noexcept;

  /// TP / (TP + FP + FN); 1 when the class has no support on either side.
  double iou(std::size_t c) const noexcept;
  double miou() const noexcept;

private:
  std::size_t num_classes_;
  std::vector<std::uint64_t> counts_;
};

double miou(std::span<const LabelSequence> preds, std::span<const LabelSequence> gts);

struct BeatFiducials {
  std::optional<std::size_t> p_onset;
  std::size_t qrs_onset = 0;
  std::size_t qrs_offset = 0;  // exclusive run end
  std::optional<std::size_t> t_offset;

  std::optional<std::size_t> pr_samples() const;
  std::size_t qrs_samples() const { return qrs_offset - qrs_onset; }
  std::optional<std::size_t> qt_samples() const;

  friend bool operator==(const BeatFiducials&, const BeatFiducials&) = default;
};

/// One beat per maximal QRS run, in temporal order. P onset is the start of
/// the last P run between the previous QRS run (or sequence start) and this
/// one; T offset is the end of the first T run before the next QRS run (or
/// sequence end).
std::vector<BeatFiducials> extract_fiducials(const LabelSequence& labels);

struct IntervalErrors {
  std::optional<double> pr_ms;
  std::optional<double> qrs_ms;
  std::optional<double> qt_ms;
  /// Mean of the three interval MAEs; defined only when all three are.
  std::optional<double> average_ms;
  std::size_t matched_beats = 0;
  std::size_t pred_beats = 0;
  std::size_t gt_beats = 0;
};

/// Accumulates per-beat absolute interval errors across record pairs.
class IntervalErrorAccumulator {
public:
  explicit IntervalErrorAccumulator(double match_tol_ms = 150.0) : match_tol_ms_(match_tol_ms) {}

  void add(const LabelSequence& pred, const LabelSequence& gt, std::uint32_t sample_rate);
  IntervalErrors result() const;

private:
  struct Sum {
    double total = 0.0;
    std::size_t count = 0;
  };
  double match_tol_ms_;
  Sum pr_, qrs_, qt_;
  std::size_t matched_ = 0, pred_beats_ = 0, gt_beats_ = 0;
};

/// Beats are matched greedily by nearest QRS onset within `match_tol_ms`,
/// each beat used at most once.
IntervalErrors interval_mae(const LabelSequence& pred, const LabelSequence& gt,
                            std::uint32_t sample_rate, double match_tol_ms = 150.0);

}  // namespace cardiomix
