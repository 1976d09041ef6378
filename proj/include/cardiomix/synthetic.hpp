#pragma once

// Desk-scale data sources: a template ECG generator with exact wave labels and
// a label corrupter that stands in for a teacher model's softmax output.

#include <cstdint>
#include <string>
#include <utility>

#include "cardiomix/rng.hpp"
#include "cardiomix/signal_core.hpp"

namespace cardiomix {

struct SynthParams {
  double heart_rate_bpm = 60.0;
  double duration_s = 10.0;
  std::uint32_t sample_rate = 250;
  // Beat layout as fractions of the RR period:
  // lead BG | P | PR gap | QRS | ST gap | T | trailing BG
  double lead_frac = 0.05;
  double p_frac = 0.11;
  double pr_gap_frac = 0.05;
  double qrs_frac = 0.10;
  double st_gap_frac = 0.12;
  double t_frac = 0.20;
  double p_amplitude = 0.15;
  double qrs_amplitude = 1.0;
  double t_amplitude = 0.30;
  double noise_std = 0.0;
  /// Fraction of a beat already elapsed at sample 0, in [0, 1).
  double phase = 0.0;
  std::uint64_t seed = 0;
  std::string record_id = "synth";
};

std::pair<EcgRecord, LabelSequence> synth_ecg(const SynthParams& params);

struct CorruptionParams {
  std::size_t boundary_jitter = 0;  // samples, each boundary moved by U{-j..j}
  double flip_rate = 0.0;
  double sharpness = 1.0;  // probability mass on the (corrupted) class
};

ProbabilityMap corrupt_labels(const LabelSequence& labels, const CorruptionParams& params, Rng& rng);

}  // namespace cardiomix
