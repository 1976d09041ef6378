#include "cardiomix/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace cardiomix {

namespace {

Biquad butter_section(double cutoff_hz, double sample_rate, bool highpass) {
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / sample_rate;
  const double cw = std::cos(w0);
  const double alpha = std::sin(w0) / std::numbers::sqrt2;  // sin(w0) / (2Q), Q = 1/sqrt(2)
  const double a0 = 1.0 + alpha;
  Biquad s;
  if (highpass) {
    s.b0 = (1.0 + cw) / 2.0 / a0;
    s.b1 = -(1.0 + cw) / a0;
  } else {
    s.b0 = (1.0 - cw) / 2.0 / a0;
    s.b1 = (1.0 - cw) / a0;
  }
  s.b2 = s.b0;
  s.a1 = -2.0 * cw / a0;
  s.a2 = (1.0 - alpha) / a0;
  return s;
}

// Transposed direct form II, state initialized to the steady state of a
// constant input equal to x[0].
void lfilter_steady(const Biquad& s, std::vector<double>& x) {
  if (x.empty()) return;
  const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
  double z2 = (s.b2 - s.a2 * dc) * x[0];
  double z1 = (s.b1 - s.a1 * dc) * x[0] + z2;
  for (double& v : x) {
    const double in = v;
    const double out = s.b0 * in + z1;
    z1 = s.b1 * in - s.a1 * out + z2;
    z2 = s.b2 * in - s.a2 * out;
    v = out;
  }
}

}  // namespace

Biquad Biquad::butter_lowpass(double cutoff_hz, double sample_rate) {
  return butter_section(cutoff_hz, sample_rate, false);
}

Biquad Biquad::butter_highpass(double cutoff_hz, double sample_rate) {
  return butter_section(cutoff_hz, sample_rate, true);
}

double Biquad::gain(double freq_hz, double sample_rate) const {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / sample_rate);
  const std::complex<double> z2 = z1 * z1;
  return std::abs((b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2));
}

std::vector<double> filtfilt(const Biquad& section, std::span<const double> x, std::size_t pad) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  pad = std::min(pad, n - 1);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t k = pad; k >= 1; --k) ext.push_back(2.0 * x[0] - x[k]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t k = 1; k <= pad; ++k) ext.push_back(2.0 * x[n - 1] - x[n - 1 - k]);

  lfilter_steady(section, ext);
  std::reverse(ext.begin(), ext.end());
  lfilter_steady(section, ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

EcgRecord resample(const EcgRecord& rec, std::uint32_t target_rate) {
  if (target_rate == 0) throw ArgumentError("target sample rate must be >= 1");
  if (rec.sample_rate == 0) throw ArgumentError("source sample rate must be >= 1");
  if (target_rate == rec.sample_rate || rec.samples.empty()) {
    EcgRecord out = rec;
    out.sample_rate = target_rate;
    return out;
  }
  const double src_rate = rec.sample_rate;
  std::vector<double> input = rec.samples;
  if (target_rate < rec.sample_rate) {
    // Anti-alias below the new Nyquist frequency.
    const Biquad lp = Biquad::butter_lowpass(0.4 * target_rate, src_rate);
    input = filtfilt(lp, input, rec.sample_rate);
  }
  const std::size_t n_in = input.size();
  const auto n_out = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(n_in) * target_rate / src_rate)));
  EcgRecord out{rec.record_id, rec.lead_id, target_rate, std::vector<double>(n_out)};
  for (std::size_t k = 0; k < n_out; ++k) {
    const double pos = static_cast<double>(k) * src_rate / target_rate;
    const auto i0 = static_cast<std::size_t>(std::floor(pos));
    if (i0 + 1 >= n_in) {
      out.samples[k] = input[n_in - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(i0);
    out.samples[k] = input[i0] + frac * (input[i0 + 1] - input[i0]);
  }
  return out;
}

LabelSequence resample_labels(const LabelSequence& labels, std::uint32_t source_rate,
                              std::uint32_t target_rate) {
  if (source_rate == 0 || target_rate == 0) throw ArgumentError("sample rates must be >= 1");
  if (source_rate == target_rate || labels.empty()) return labels;
  const std::size_t n_in = labels.size();
  const auto n_out = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::llround(static_cast<double>(n_in) * target_rate / source_rate)));
  std::vector<ClassId> out(n_out);
  for (std::size_t k = 0; k < n_out; ++k) {
    const auto idx = static_cast<std::size_t>(
        std::llround(static_cast<double>(k) * source_rate / target_rate));
    out[k] = labels[std::min(idx, n_in - 1)];
  }
  return LabelSequence(std::move(out), labels.num_classes());
}

EcgRecord bandpass(const EcgRecord& rec, double lo_hz, double hi_hz) {
  const double nyquist = rec.sample_rate / 2.0;
  if (!(lo_hz > 0.0)) throw ArgumentError("band-pass low cutoff must be > 0 Hz");
  if (!(lo_hz < hi_hz)) throw ArgumentError("band-pass low cutoff must be below high cutoff");
  if (!(hi_hz < nyquist)) {
    throw ArgumentError("band-pass high cutoff " + std::to_string(hi_hz) +
                        " Hz must be below Nyquist " + std::to_string(nyquist) + " Hz");
  }
  const std::size_t pad = rec.sample_rate;  // one second of odd extension
  EcgRecord out = rec;
  out.samples = filtfilt(Biquad::butter_highpass(lo_hz, rec.sample_rate), rec.samples, pad);
  out.samples = filtfilt(Biquad::butter_lowpass(hi_hz, rec.sample_rate), out.samples, pad);
  return out;
}

EcgRecord zscore(const EcgRecord& rec) {
  EcgRecord out = rec;
  const std::size_t n = rec.samples.size();
  if (n == 0) return out;
  double mean = 0.0;
  for (double v : rec.samples) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : rec.samples) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double sd = std::sqrt(var);
  if (!(sd > 0.0)) {
    std::fill(out.samples.begin(), out.samples.end(), 0.0);
    return out;
  }
  for (double& v : out.samples) v = (v - mean) / sd;
  return out;
}

std::pair<EcgRecord, std::optional<LabelSequence>> fix_duration(
    const EcgRecord& rec, const std::optional<LabelSequence>& labels, double seconds) {
  if (!(seconds > 0.0)) throw ArgumentError("duration must be positive");
  if (labels && labels->size() != rec.size()) {
    throw FormatError("record '" + rec.record_id + "': label length " +
                      std::to_string(labels->size()) + " != signal length " +
                      std::to_string(rec.size()));
  }
  const auto target = static_cast<std::size_t>(std::llround(seconds * rec.sample_rate));
  EcgRecord out = rec;
  out.samples.resize(target, 0.0);
  std::optional<LabelSequence> out_labels;
  if (labels) {
    std::vector<ClassId> v = labels->values();
    v.resize(target, to_id(WaveClass::Background));
    out_labels = LabelSequence(std::move(v), labels->num_classes());
  }
  return {std::move(out), std::move(out_labels)};
}

std::pair<EcgRecord, LabelSequence> preprocess_pipeline(const EcgRecord& rec,
                                                        const std::optional<LabelSequence>& labels,
                                                        const PreprocessConfig& config) {
  auto [fixed, fixed_labels] = fix_duration(rec, labels, config.seconds);
  EcgRecord resampled = resample(fixed, config.target_rate);
  LabelSequence out_labels =
      fixed_labels ? resample_labels(*fixed_labels, fixed.sample_rate, config.target_rate)
                   : LabelSequence(resampled.size(), to_id(WaveClass::Background));
  if (out_labels.size() != resampled.size()) {
    std::vector<ClassId> v = out_labels.values();
    v.resize(resampled.size(), to_id(WaveClass::Background));
    out_labels = LabelSequence(std::move(v), out_labels.num_classes());
  }
  EcgRecord filtered = bandpass(resampled, config.lo_hz, config.hi_hz);
  return {zscore(filtered), std::move(out_labels)};
}

}  // namespace cardiomix
