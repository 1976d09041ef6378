#include "cardiomix/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace cardiomix {

namespace {

double raised_cosine(double u) { return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * u)); }

double gaussian(double u, double centre, double width) {
  const double z = (u - centre) / width;
  return std::exp(-0.5 * z * z);
}

// Q dip, tall R, deeper S over the unit interval.
double qrs_shape(double u) {
  return -0.15 * gaussian(u, 0.15, 0.07) + gaussian(u, 0.45, 0.10) - 0.30 * gaussian(u, 0.78, 0.08);
}

}  // namespace

std::pair<EcgRecord, LabelSequence> synth_ecg(const SynthParams& p) {
  if (!(p.heart_rate_bpm > 0.0)) throw ArgumentError("heart rate must be positive");
  if (!(p.duration_s > 0.0)) throw ArgumentError("duration must be positive");
  if (p.sample_rate == 0) throw ArgumentError("sample rate must be >= 1");
  if (!(p.phase >= 0.0 && p.phase < 1.0)) throw ArgumentError("phase must be in [0, 1)");
  const double fracs[] = {p.lead_frac, p.p_frac, p.pr_gap_frac, p.qrs_frac, p.st_gap_frac, p.t_frac};
  double total = 0.0;
  for (double f : fracs) {
    if (f < 0.0) throw ArgumentError("wave fractions must be non-negative");
    total += f;
  }
  if (total > 1.0) {
    throw ArgumentError("wave fractions sum to " + std::to_string(total) +
                        ", exceeding the beat period");
  }
  const double period = 60.0 / p.heart_rate_bpm * p.sample_rate;  // samples
  for (double f : {p.p_frac, p.qrs_frac, p.t_frac}) {
    if (f * period < 1.0) throw ArgumentError("a wave is shorter than one sample at this rate");
  }

  const auto length = static_cast<std::size_t>(std::llround(p.duration_s * p.sample_rate));
  if (length == 0) throw ArgumentError("duration shorter than one sample");
  std::vector<double> signal(length, 0.0);
  std::vector<ClassId> labels(length, to_id(WaveClass::Background));

  auto paint = [&](double on, double off, WaveClass cls, double amplitude, double (*shape)(double)) {
    const auto a = static_cast<long long>(std::llround(on));
    const auto b = static_cast<long long>(std::llround(off));
    for (long long t = std::max(0LL, a); t < std::min<long long>(b, static_cast<long long>(length)); ++t) {
      const double u = (static_cast<double>(t - a) + 0.5) / static_cast<double>(b - a);
      signal[static_cast<std::size_t>(t)] += amplitude * shape(u);
      labels[static_cast<std::size_t>(t)] = to_id(cls);
    }
  };

  const double origin = -p.phase * period;
  for (long long k = 0;; ++k) {
    const double beat = origin + static_cast<double>(k) * period;
    if (beat >= static_cast<double>(length)) break;
    double cursor = beat + p.lead_frac * period;
    paint(cursor, cursor + p.p_frac * period, WaveClass::P, p.p_amplitude, raised_cosine);
    cursor += (p.p_frac + p.pr_gap_frac) * period;
    paint(cursor, cursor + p.qrs_frac * period, WaveClass::Qrs, p.qrs_amplitude, qrs_shape);
    cursor += (p.qrs_frac + p.st_gap_frac) * period;
    paint(cursor, cursor + p.t_frac * period, WaveClass::T, p.t_amplitude, raised_cosine);
  }

  if (p.noise_std > 0.0) {
    Rng rng = Rng::derive(p.seed, StreamTag::Synthesis, 0);
    for (double& v : signal) v += p.noise_std * rng.normal();
  }
  EcgRecord rec{p.record_id, "I", p.sample_rate, std::move(signal)};
  return {std::move(rec), LabelSequence(std::move(labels))};
}

ProbabilityMap corrupt_labels(const LabelSequence& labels, const CorruptionParams& params,
                              Rng& rng) {
  if (!(params.flip_rate >= 0.0 && params.flip_rate <= 1.0)) {
    throw ArgumentError("flip rate must be in [0, 1]");
  }
  if (!(params.sharpness > 0.0 && params.sharpness <= 1.0)) {
    throw ArgumentError("sharpness must be in (0, 1]");
  }
  const std::size_t length = labels.size();
  const std::size_t num_classes = labels.num_classes();
  const LabelRuns runs = to_runs(labels);

  // Move every internal run boundary by U{-j..j}, keeping boundaries ordered.
  std::vector<std::size_t> bounds(runs.size() + 1);
  bounds.front() = 0;
  bounds.back() = length;
  const auto jitter = static_cast<long long>(params.boundary_jitter);
  for (std::size_t i = 1; i < runs.size(); ++i) {
    long long b = static_cast<long long>(runs[i].start);
    if (jitter > 0) b += static_cast<long long>(rng.uniform_int(0, 2 * jitter)) - jitter;
    b = std::clamp<long long>(b, static_cast<long long>(bounds[i - 1]), static_cast<long long>(length));
    bounds[i] = static_cast<std::size_t>(b);
  }
  std::vector<ClassId> cls(length);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::fill(cls.begin() + static_cast<std::ptrdiff_t>(bounds[i]),
              cls.begin() + static_cast<std::ptrdiff_t>(bounds[i + 1]), runs[i].cls);
  }

  if (params.flip_rate > 0.0 && num_classes > 1) {
    for (ClassId& c : cls) {
      if (rng.uniform01() < params.flip_rate) {
        auto other = static_cast<ClassId>(rng.uniform_int(0, num_classes - 2));
        if (other >= c) ++other;
        c = other;
      }
    }
  }

  const double rest = num_classes > 1 ? (1.0 - params.sharpness) / static_cast<double>(num_classes - 1) : 0.0;
  std::vector<double> values(length * num_classes, rest);
  for (std::size_t t = 0; t < length; ++t) values[t * num_classes + cls[t]] = params.sharpness;
  return ProbabilityMap(length, num_classes, std::move(values));
}

}  // namespace cardiomix
