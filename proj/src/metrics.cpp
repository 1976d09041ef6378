#include "cardiomix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

namespace cardiomix {

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes)
    : num_classes_(num_classes), counts_(num_classes * num_classes, 0) {}

void ConfusionMatrix::add(const LabelSequence& pred, const LabelSequence& gt) {
  if (pred.size() != gt.size()) {
    throw ArgumentError("prediction length " + std::to_string(pred.size()) +
                        " != ground-truth length " + std::to_string(gt.size()));
  }
  for (std::size_t t = 0; t < pred.size(); ++t) {
    if (pred[t] >= num_classes_ || gt[t] >= num_classes_) {
      throw ArgumentError("class id out of range at index " + std::to_string(t));
    }
    ++counts_[gt[t] * num_classes_ + pred[t]];
  }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.num_classes_ != num_classes_) throw ArgumentError("confusion matrix size mismatch");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  std::uint64_t sum = 0;
  for (auto v : counts_) sum += v;
  return sum;
}

double ConfusionMatrix::iou(std::size_t c) const noexcept {
  const std::uint64_t tp = at(c, c);
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  for (std::size_t k = 0; k < num_classes_; ++k) {
    if (k == c) continue;
    fp += at(k, c);
    fn += at(c, k);
  }
  const std::uint64_t denom = tp + fp + fn;
  if (denom == 0) return 1.0;
  return static_cast<double>(tp) / static_cast<double>(denom);
}

double ConfusionMatrix::miou() const noexcept {
  double sum = 0.0;
  for (std::size_t c = 0; c < num_classes_; ++c) sum += iou(c);
  return sum / static_cast<double>(num_classes_);
}

double miou(std::span<const LabelSequence> preds, std::span<const LabelSequence> gts) {
  if (preds.size() != gts.size()) throw ArgumentError("miou: prediction and ground-truth counts differ");
  ConfusionMatrix cm(preds.empty() ? kNumClasses : preds.front().num_classes());
  for (std::size_t i = 0; i < preds.size(); ++i) cm.add(preds[i], gts[i]);
  return cm.miou();
}

std::optional<std::size_t> BeatFiducials::pr_samples() const {
  if (!p_onset) return std::nullopt;
  return qrs_onset - *p_onset;
}

std::optional<std::size_t> BeatFiducials::qt_samples() const {
  if (!t_offset) return std::nullopt;
  return *t_offset - qrs_onset;
}

std::vector<BeatFiducials> extract_fiducials(const LabelSequence& labels) {
  const LabelRuns runs = to_runs(labels);
  std::vector<std::size_t> qrs_runs;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].cls == to_id(WaveClass::Qrs)) qrs_runs.push_back(i);
  }
  std::vector<BeatFiducials> beats;
  beats.reserve(qrs_runs.size());
  for (std::size_t b = 0; b < qrs_runs.size(); ++b) {
    const std::size_t qi = qrs_runs[b];
    BeatFiducials beat;
    beat.qrs_onset = runs[qi].start;
    beat.qrs_offset = runs[qi].end;
    const std::size_t first = b == 0 ? 0 : qrs_runs[b - 1] + 1;
    for (std::size_t i = qi; i-- > first;) {
      if (runs[i].cls == to_id(WaveClass::P)) {
        beat.p_onset = runs[i].start;
        break;
      }
    }
    const std::size_t last = b + 1 < qrs_runs.size() ? qrs_runs[b + 1] : runs.size();
    for (std::size_t i = qi + 1; i < last; ++i) {
      if (runs[i].cls == to_id(WaveClass::T)) {
        beat.t_offset = runs[i].end;
        break;
      }
    }
    beats.push_back(beat);
  }
  return beats;
}

void IntervalErrorAccumulator::add(const LabelSequence& pred, const LabelSequence& gt,
                                   std::uint32_t sample_rate) {
  if (pred.size() != gt.size()) {
    throw ArgumentError("interval_mae: prediction length " + std::to_string(pred.size()) +
                        " != ground-truth length " + std::to_string(gt.size()));
  }
  if (sample_rate == 0) throw ArgumentError("interval_mae: sample rate must be >= 1");
  const double ms_per_sample = 1000.0 / static_cast<double>(sample_rate);
  const auto pred_beats = extract_fiducials(pred);
  const auto gt_beats = extract_fiducials(gt);
  pred_beats_ += pred_beats.size();
  gt_beats_ += gt_beats.size();

  struct Candidate {
    std::size_t distance, gt, pred;
  };
  std::vector<Candidate> candidates;
  for (std::size_t g = 0; g < gt_beats.size(); ++g) {
    for (std::size_t p = 0; p < pred_beats.size(); ++p) {
      const std::size_t a = gt_beats[g].qrs_onset;
      const std::size_t b = pred_beats[p].qrs_onset;
      const std::size_t d = a > b ? a - b : b - a;
      if (static_cast<double>(d) * ms_per_sample <= match_tol_ms_) candidates.push_back({d, g, p});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    return std::tie(x.distance, x.gt, x.pred) < std::tie(y.distance, y.gt, y.pred);
  });
  std::vector<bool> gt_used(gt_beats.size(), false);
  std::vector<bool> pred_used(pred_beats.size(), false);
  auto accumulate = [&](Sum& sum, std::optional<std::size_t> p, std::optional<std::size_t> g) {
    if (!p || !g) return;
    const double diff = static_cast<double>(*p) - static_cast<double>(*g);
    sum.total += std::abs(diff) * ms_per_sample;
    ++sum.count;
  };
  for (const Candidate& c : candidates) {
    if (gt_used[c.gt] || pred_used[c.pred]) continue;
    gt_used[c.gt] = pred_used[c.pred] = true;
    ++matched_;
    const BeatFiducials& g = gt_beats[c.gt];
    const BeatFiducials& p = pred_beats[c.pred];
    accumulate(pr_, p.pr_samples(), g.pr_samples());
    accumulate(qrs_, p.qrs_samples(), g.qrs_samples());
    accumulate(qt_, p.qt_samples(), g.qt_samples());
  }
}

IntervalErrors IntervalErrorAccumulator::result() const {
  auto mean = [](const Sum& s) -> std::optional<double> {
    if (s.count == 0) return std::nullopt;
    return s.total / static_cast<double>(s.count);
  };
  IntervalErrors e;
  e.pr_ms = mean(pr_);
  e.qrs_ms = mean(qrs_);
  e.qt_ms = mean(qt_);
  if (e.pr_ms && e.qrs_ms && e.qt_ms) e.average_ms = (*e.pr_ms + *e.qrs_ms + *e.qt_ms) / 3.0;
  e.matched_beats = matched_;
  e.pred_beats = pred_beats_;
  e.gt_beats = gt_beats_;
  return e;
}

IntervalErrors interval_mae(const LabelSequence& pred, const LabelSequence& gt,
                            std::uint32_t sample_rate, double match_tol_ms) {
  IntervalErrorAccumulator acc(match_tol_ms);
  acc.add(pred, gt, sample_rate);
  return acc.result();
}

}  // namespace cardiomix
