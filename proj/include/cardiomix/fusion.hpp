#pragma once

// Pattern-guided CutMix between labeled and unlabeled ECG batches.
//
// L2U pastes the best-matching labeled segment (signal and ground truth)
// into each unlabeled sample. U2L pastes the best-matching unlabeled segment
// (signal and pseudo-labels) into each labeled sample, but only when the
// teacher's mean max-probability over that segment exceeds tau.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cardiomix/rng.hpp"
#include "cardiomix/signal_core.hpp"
#include "cardiomix/similarity.hpp"

namespace cardiomix {

enum class Criterion { Pattern, Signal, Random };
enum class FusionMode { CardioMix, LabeledToUnlabeled, UnlabeledToLabeled, Vanilla };
enum class Direction { LabeledToUnlabeled, UnlabeledToLabeled, Vanilla };

const char* to_string(Criterion c) noexcept;
const char* to_string(FusionMode m) noexcept;
const char* to_string(Direction d) noexcept;
Criterion parse_criterion(std::string_view s);
FusionMode parse_mode(std::string_view s);

struct FusionParams {
  std::size_t window_min = 250;
  std::size_t window_max = 1250;
  double tau = 0.8;
  Criterion criterion = Criterion::Pattern;
  FusionMode mode = FusionMode::CardioMix;
  AbsentClassRule absent_rule = AbsentClassRule::Exclude;
  unsigned threads = 1;

  /// Throws ArgumentError unless 1 <= window_min <= window_max <= length and
  /// tau is in [0, 1].
  void validate(std::size_t length) const;
};

/// Key stride for window width W.
constexpr std::size_t stride_for(std::size_t width) noexcept { return width / 2 > 0 ? width / 2 : 1; }

/// Per-mini-batch draw shared by both fusion directions.
struct StepPlan {
  std::size_t window = 0;
  std::uint64_t seed = 0;
};

/// Draws W uniformly from [window_min, window_max] on the seed's window stream.
StepPlan draw_plan(const FusionParams& params, std::uint64_t seed);

struct LabeledSample {
  EcgRecord record;
  LabelSequence labels;
};

struct UnlabeledSample {
  EcgRecord record;
  ProbabilityMap probs;
};

/// Non-owning search pool over equal-length label sequences (and optional
/// signals). Run indexes are built once so every query reuses them.
class KeyPool {
public:
  KeyPool(std::span<const LabelSequence* const> labels,
          std::span<const std::span<const double>> signals = {});

  std::size_t size() const noexcept { return indexes_.size(); }
  std::size_t min_length() const noexcept { return min_length_; }
  const RunIndex& index(std::size_t j) const noexcept { return indexes_[j]; }
  const LabelSequence& labels(std::size_t j) const noexcept { return *labels_[j]; }
  bool has_signals() const noexcept { return !signals_.empty(); }
  std::span<const double> signal(std::size_t j) const noexcept { return signals_[j]; }

private:
  std::vector<const LabelSequence*> labels_;
  std::vector<RunIndex> indexes_;
  std::vector<std::span<const double>> signals_;
  std::size_t min_length_ = 0;
};

struct KeyMatch {
  std::size_t source_index = 0;
  std::size_t key_start = 0;
  /// Criterion score: pattern Sim for Pattern and Random, cosine for Signal.
  double score = 0.0;
};

/// Argmax of the criterion over every (pool index, scan start); ties go to
/// the lexicographically smallest (index, start). Random draws one candidate
/// uniformly from `rng` and reports its pattern Sim.
KeyMatch search_best_key(std::span<const ClassId> query_labels,
                         std::span<const double> query_signal, const KeyPool& pool,
                         std::size_t stride, Criterion criterion, AbsentClassRule rule,
                         Rng* rng = nullptr);

/// Copies source[key_start .. key_start + W) over target[query) for both the
/// signal and the labels; everything outside the query window is the target.
std::pair<EcgRecord, LabelSequence> splice(const EcgRecord& target_signal,
                                           const LabelSequence& target_labels,
                                           const EcgRecord& source_signal,
                                           const LabelSequence& source_labels, Window query,
                                           std::size_t key_start);

/// Mean over the window of the per-timestep maximum class probability.
double segment_confidence(const ProbabilityMap& probs, std::size_t start, std::size_t width);

struct FusionOutcome {
  Direction direction = Direction::LabeledToUnlabeled;
  std::size_t target_index = 0;
  EcgRecord signal;      // fused signal, identity of the target record
  LabelSequence labels;  // fused labels (ground truth or pseudo-labels)
  std::size_t window = 0;
  std::size_t query_start = 0;
  std::size_t source_index = 0;
  std::size_t key_start = 0;
  double score = 0.0;
  std::optional<double> confidence;  // U2L only
  bool applied = true;               // false when the U2L gate rejected the key
};

std::vector<FusionOutcome> fuse_l2u(std::span<const UnlabeledSample> unlabeled,
                                    std::span<const LabeledSample> labeled,
                                    const FusionParams& params, const StepPlan& plan);

std::vector<FusionOutcome> fuse_u2l(std::span<const LabeledSample> labeled,
                                    std::span<const UnlabeledSample> unlabeled,
                                    const FusionParams& params, const StepPlan& plan);

std::vector<FusionOutcome> vanilla_cutmix(std::span<const UnlabeledSample> unlabeled,
                                          const FusionParams& params, const StepPlan& plan);

struct StepResult {
  std::size_t window = 0;
  std::vector<FusionOutcome> l2u;  // augmented unlabeled batch (or vanilla outcomes)
  std::vector<FusionOutcome> u2l;  // augmented labeled batch
};

/// One CardioMix step: L2U then U2L with a single shared window width.
StepResult cardiomix_step(std::span<const LabeledSample> labeled,
                          std::span<const UnlabeledSample> unlabeled, const FusionParams& params,
                          std::uint64_t seed);

/// Runs whichever directions `params.mode` selects.
StepResult fuse_batch(std::span<const LabeledSample> labeled,
                      std::span<const UnlabeledSample> unlabeled, const FusionParams& params,
                      std::uint64_t seed);

}  // namespace cardiomix
