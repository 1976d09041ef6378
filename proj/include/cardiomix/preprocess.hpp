#pragma once

// Signal conditioning applied to every record before fusion:
// duration fix -> resample -> zero-phase band-pass -> z-score.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cardiomix/signal_core.hpp"

namespace cardiomix {

/// Second-order IIR section, normalized so a0 == 1.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;

  /// Butterworth (Q = 1/sqrt(2)) sections via the bilinear transform.
  static Biquad butter_lowpass(double cutoff_hz, double sample_rate);
  static Biquad butter_highpass(double cutoff_hz, double sample_rate);

  /// Magnitude response at `freq_hz`.
  double gain(double freq_hz, double sample_rate) const;
};

/// Forward-backward application of one section (zero phase, squared
/// magnitude). The signal is odd-extended by `pad` samples at each end and the
/// filter state starts at its step-response steady state, so a constant input
/// passes through a high-pass with no start-up transient.
std::vector<double> filtfilt(const Biquad& section, std::span<const double> x, std::size_t pad);

EcgRecord resample(const EcgRecord& rec, std::uint32_t target_rate);

/// Nearest-input-index resampling of labels from `source_rate` to `target_rate`.
LabelSequence resample_labels(const LabelSequence& labels, std::uint32_t source_rate,
                              std::uint32_t target_rate);

EcgRecord bandpass(const EcgRecord& rec, double lo_hz = 0.67, double hi_hz = 40.0);

EcgRecord zscore(const EcgRecord& rec);

std::pair<EcgRecord, std::optional<LabelSequence>> fix_duration(
    const EcgRecord& rec, const std::optional<LabelSequence>& labels, double seconds = 10.0);

struct PreprocessConfig {
  std::uint32_t target_rate = 250;
  double lo_hz = 0.67;
  double hi_hz = 40.0;
  double seconds = 10.0;
};

/// Labels, when given, come back with the same length as the signal; when
/// absent the output labels are all background.
std::pair<EcgRecord, LabelSequence> preprocess_pipeline(
    const EcgRecord& rec, const std::optional<LabelSequence>& labels,
    const PreprocessConfig& config = {});

}  // namespace cardiomix
