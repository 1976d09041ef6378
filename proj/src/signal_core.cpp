#include "cardiomix/signal_core.hpp"

#include <cmath>
#include <sstream>

namespace cardiomix {

const char* class_name(ClassId c) noexcept {
  switch (c) {
    case 0: return "BG";
    case 1: return "P";
    case 2: return "QRS";
    case 3: return "T";
    default: return "?";
  }
}

void EcgRecord::validate() const {
  if (sample_rate < 1) {
    throw FormatError("record '" + record_id + "': sample rate must be >= 1");
  }
  if (samples.empty()) {
    throw FormatError("record '" + record_id + "': empty signal");
  }
  for (std::size_t t = 0; t < samples.size(); ++t) {
    if (!std::isfinite(samples[t])) {
      throw FormatError("record '" + record_id + "': non-finite sample at index " +
                        std::to_string(t));
    }
  }
}

LabelSequence::LabelSequence(std::vector<ClassId> classes, std::size_t num_classes)
    : classes_(std::move(classes)), num_classes_(num_classes) {
  for (std::size_t t = 0; t < classes_.size(); ++t) {
    if (classes_[t] >= num_classes_) {
      throw FormatError("class id " + std::to_string(classes_[t]) + " at index " +
                        std::to_string(t) + " is out of range");
    }
  }
}

LabelSequence::LabelSequence(std::size_t length, ClassId fill, std::size_t num_classes)
    : LabelSequence(std::vector<ClassId>(length, fill), num_classes) {}

LabelSequence LabelSequence::from_string(std::string_view digits) {
  std::vector<ClassId> out;
  out.reserve(digits.size());
  for (char ch : digits) {
    if (ch < '0' || ch > '9') throw ArgumentError("label string must contain digits only");
    out.push_back(static_cast<ClassId>(ch - '0'));
  }
  return LabelSequence(std::move(out));
}

std::span<const ClassId> LabelSequence::slice(std::size_t start, std::size_t width) const {
  if (!Window{start, width}.fits(size())) {
    throw ArgumentError("label slice [" + std::to_string(start) + ", " +
                        std::to_string(start + width) + ") out of bounds for length " +
                        std::to_string(size()));
  }
  return view().subspan(start, width);
}

std::string LabelSequence::to_string() const {
  std::string s;
  s.reserve(classes_.size());
  for (ClassId c : classes_) s.push_back(static_cast<char>('0' + c));
  return s;
}

LabelSequence to_dense(std::span<const LabelRun> runs, std::size_t length,
                       std::size_t num_classes) {
  std::vector<ClassId> out;
  out.reserve(length);
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const LabelRun& r = runs[i];
    auto fail = [&](const std::string& what) {
      std::ostringstream os;
      os << "run " << i << " (" << r.start << "," << r.end << "," << int(r.cls) << "): " << what;
      throw FormatError(os.str());
    };
    if (r.start < cursor) fail("overlaps previous run");
    if (r.start > cursor) fail("gap at index " + std::to_string(cursor));
    if (r.end <= r.start) fail("empty or reversed run");
    if (r.end > length) fail("extends past length " + std::to_string(length));
    if (r.cls >= num_classes) fail("class id out of range");
    out.insert(out.end(), r.length(), r.cls);
    cursor = r.end;
  }
  if (cursor != length) {
    throw FormatError("runs cover [0, " + std::to_string(cursor) + ") but length is " +
                      std::to_string(length) + "; gap at index " + std::to_string(cursor));
  }
  return LabelSequence(std::move(out), num_classes);
}

LabelRuns to_runs(std::span<const ClassId> dense) {
  LabelRuns runs;
  std::size_t t = 0;
  while (t < dense.size()) {
    std::size_t e = t + 1;
    while (e < dense.size() && dense[e] == dense[t]) ++e;
    runs.push_back({t, e, dense[t]});
    t = e;
  }
  return runs;
}

ProbabilityMap::ProbabilityMap(std::size_t length, std::size_t num_classes,
                               std::vector<double> values)
    : length_(length), num_classes_(num_classes), values_(std::move(values)) {
  if (num_classes_ < 1) throw ArgumentError("probability map needs at least one class");
  if (values_.size() != length_ * num_classes_) {
    throw FormatError("probability map has " + std::to_string(values_.size()) +
                      " values, expected " + std::to_string(length_ * num_classes_));
  }
}

ProbabilityMap ProbabilityMap::one_hot(const LabelSequence& labels) {
  const std::size_t c_count = labels.num_classes();
  std::vector<double> v(labels.size() * c_count, 0.0);
  for (std::size_t t = 0; t < labels.size(); ++t) v[t * c_count + labels[t]] = 1.0;
  return ProbabilityMap(labels.size(), c_count, std::move(v));
}

void ProbabilityMap::validate(double tolerance) const {
  for (std::size_t t = 0; t < length_; ++t) {
    double sum = 0.0;
    for (double p : row(t)) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw FormatError("probability outside [0,1] at timestep " + std::to_string(t));
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      throw FormatError("probabilities at timestep " + std::to_string(t) + " sum to " +
                        std::to_string(sum));
    }
  }
}

LabelSequence argmax_labels(const ProbabilityMap& probs) {
  std::vector<ClassId> out(probs.size());
  for (std::size_t t = 0; t < probs.size(); ++t) {
    auto row = probs.row(t);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] > row[best]) best = c;
    }
    out[t] = static_cast<ClassId>(best);
  }
  return LabelSequence(std::move(out), probs.num_classes());
}

}  // namespace cardiomix
