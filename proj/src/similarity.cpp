#include "cardiomix/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace cardiomix {

namespace {

__extension__ typedef unsigned __int128 u128;

struct Fraction {
  u128 num = 0;
  u128 den = 1;
};

u128 gcd128(u128 a, u128 b) {
  while (b != 0) {
    const u128 r = a % b;
    a = b;
    b = r;
  }
  return a;
}

Fraction add(Fraction x, u128 num, u128 den) {
  const u128 g = gcd128(x.den, den);
  const u128 scale_x = den / g;
  Fraction r{x.num * scale_x + num * (x.den / g), x.den * scale_x};
  const u128 h = gcd128(r.num, r.den);
  if (h > 1) {
    r.num /= h;
    r.den /= h;
  }
  return r;
}

// Exact comparison of n1/d1 and n2/d2 by simultaneous continued-fraction
// expansion; never forms products, so it cannot overflow.
std::strong_ordering compare_fractions(u128 n1, u128 d1, u128 n2, u128 d2) {
  bool flipped = false;
  for (;;) {
    const u128 q1 = n1 / d1;
    const u128 q2 = n2 / d2;
    if (q1 != q2) {
      const auto o = q1 < q2 ? std::strong_ordering::less : std::strong_ordering::greater;
      return flipped ? (o == std::strong_ordering::less ? std::strong_ordering::greater
                                                        : std::strong_ordering::less)
                     : o;
    }
    const u128 r1 = n1 % d1;
    const u128 r2 = n2 % d2;
    if (r1 == 0 && r2 == 0) return std::strong_ordering::equal;
    if (r1 == 0 || r2 == 0) {
      const auto o = r1 == 0 ? std::strong_ordering::less : std::strong_ordering::greater;
      return flipped ? (o == std::strong_ordering::less ? std::strong_ordering::greater
                                                        : std::strong_ordering::less)
                     : o;
    }
    // n/d = q + r/d; comparing r1/d1 with r2/d2 is comparing d2/r2 with d1/r1.
    n1 = d1;
    d1 = r1;
    n2 = d2;
    d2 = r2;
    flipped = !flipped;
  }
}

Fraction exact_value(const SimScore& s) {
  Fraction f;
  std::size_t present = 0;
  for (std::size_t c = 0; c < s.num_classes(); ++c) {
    if (s.union_count(c) == 0) continue;
    ++present;
    f = add(f, s.intersection(c), s.union_count(c));
  }
  const std::size_t divisor =
      s.rule() == AbsentClassRule::Exclude ? present : s.num_classes();
  if (s.rule() == AbsentClassRule::CountAsOne) {
    f = add(f, s.num_classes() - present, 1);
  }
  if (divisor == 0) return {0, 1};
  f.den *= divisor;
  return f;
}

void check_classes(std::size_t num_classes) {
  if (num_classes < 1 || num_classes > kMaxClasses) {
    throw ArgumentError("similarity supports 1.." + std::to_string(kMaxClasses) + " classes");
  }
}

}  // namespace

SimScore::SimScore(std::array<std::uint32_t, kMaxClasses> intersection,
                   std::array<std::uint32_t, kMaxClasses> union_counts, std::size_t num_classes,
                   AbsentClassRule rule)
    : inter_(intersection), union_(union_counts), num_classes_(num_classes), rule_(rule) {
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < num_classes_; ++c) {
    if (union_[c] == 0) continue;
    ++present;
    sum += static_cast<double>(inter_[c]) / static_cast<double>(union_[c]);
  }
  if (rule_ == AbsentClassRule::CountAsOne) {
    sum += static_cast<double>(num_classes_ - present);
    value_ = sum / static_cast<double>(num_classes_);
  } else {
    value_ = present == 0 ? 0.0 : sum / static_cast<double>(present);
  }
}

std::strong_ordering operator<=>(const SimScore& a, const SimScore& b) {
  // Doubles carry a relative error of a few ulps; well-separated values
  // can be ordered directly, near-ties go to exact rationals.
  const double diff = a.value_ - b.value_;
  if (diff > 1e-12) return std::strong_ordering::greater;
  if (diff < -1e-12) return std::strong_ordering::less;
  const Fraction fa = exact_value(a);
  const Fraction fb = exact_value(b);
  return compare_fractions(fa.num, fa.den, fb.num, fb.den);
}

std::optional<double> iou_class(std::span<const ClassId> a, std::span<const ClassId> b,
                                ClassId c) {
  if (a.size() != b.size()) throw ArgumentError("iou_class: segment lengths differ");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const bool in_a = a[t] == c;
    const bool in_b = b[t] == c;
    inter += in_a && in_b;
    uni += in_a || in_b;
  }
  if (uni == 0) return std::nullopt;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

SimScore sim(std::span<const ClassId> a, std::span<const ClassId> b, AbsentClassRule rule,
             std::size_t num_classes) {
  if (a.size() != b.size()) throw ArgumentError("sim: segment lengths differ");
  check_classes(num_classes);
  std::array<std::uint32_t, kMaxClasses> inter{};
  std::array<std::uint32_t, kMaxClasses> count_a{};
  std::array<std::uint32_t, kMaxClasses> count_b{};
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t] >= num_classes || b[t] >= num_classes) throw ArgumentError("sim: class id out of range");
    ++count_a[a[t]];
    ++count_b[b[t]];
    inter[a[t]] += a[t] == b[t];
  }
  std::array<std::uint32_t, kMaxClasses> uni{};
  for (std::size_t c = 0; c < num_classes; ++c) uni[c] = count_a[c] + count_b[c] - inter[c];
  return SimScore(inter, uni, num_classes, rule);
}

WindowScan enumerate_windows(std::size_t length, std::size_t width, std::size_t stride) {
  if (width < 1) throw ArgumentError("window width must be >= 1");
  if (stride < 1) throw ArgumentError("window stride must be >= 1");
  if (width > length) {
    throw ArgumentError("window width " + std::to_string(width) + " exceeds sequence length " +
                        std::to_string(length));
  }
  if (length > std::numeric_limits<std::int32_t>::max()) {
    throw ArgumentError("sequence too long for exact similarity counts");
  }
  WindowScan scan{width, stride, {}};
  const std::size_t last = length - width;
  for (std::size_t s = 0; s <= last; s += stride) scan.starts.push_back(s);
  if (scan.starts.back() != last) scan.starts.push_back(last);
  return scan;
}

RunIndex::RunIndex(const LabelSequence& labels)
    : runs_(to_runs(labels)), length_(labels.size()), num_classes_(labels.num_classes()) {
  check_classes(num_classes_);
  run_starts_.reserve(runs_.size());
  for (const LabelRun& r : runs_) run_starts_.push_back(r.start);
}

std::size_t RunIndex::run_at(std::size_t t) const {
  auto it = std::upper_bound(run_starts_.begin(), run_starts_.end(), t);
  return static_cast<std::size_t>(it - run_starts_.begin()) - 1;
}

QueryPattern::QueryPattern(std::span<const ClassId> query, std::size_t num_classes)
    : runs_(to_runs(query)), width_(query.size()), num_classes_(num_classes) {
  check_classes(num_classes_);
  if (width_ == 0) throw ArgumentError("query segment is empty");
  for (const LabelRun& r : runs_) {
    if (r.cls >= num_classes_) throw ArgumentError("query class id out of range");
    counts_[r.cls] += static_cast<std::uint32_t>(r.length());
  }
}

SimScore QueryPattern::score(const RunIndex& key, std::size_t start, AbsentClassRule rule) const {
  if (key.num_classes() != num_classes_) throw ArgumentError("class count mismatch");
  if (!Window{start, width_}.fits(key.size())) {
    throw ArgumentError("key window out of bounds");
  }
  std::array<std::uint32_t, kMaxClasses> inter{};
  std::array<std::uint32_t, kMaxClasses> key_counts{};
  const LabelRuns& kruns = key.runs();
  std::size_t ki = key.run_at(start);
  std::size_t qi = 0;
  std::size_t pos = 0;  // offset within the window
  while (pos < width_) {
    const LabelRun& q = runs_[qi];
    const LabelRun& k = kruns[ki];
    const std::size_t k_end = k.end - start;
    const std::size_t seg_end = std::min(q.end, k_end);
    const auto len = static_cast<std::uint32_t>(seg_end - pos);
    key_counts[k.cls] += len;
    if (q.cls == k.cls) inter[q.cls] += len;
    pos = seg_end;
    if (q.end == seg_end) ++qi;
    if (k_end == seg_end) ++ki;
  }
  std::array<std::uint32_t, kMaxClasses> uni{};
  for (std::size_t c = 0; c < num_classes_; ++c) uni[c] = counts_[c] + key_counts[c] - inter[c];
  return SimScore(inter, uni, num_classes_, rule);
}

std::vector<SimScore> sliding_sim(std::span<const ClassId> query, const RunIndex& key,
                                  const WindowScan& scan, AbsentClassRule rule) {
  if (query.size() != scan.width) {
    throw ArgumentError("query width " + std::to_string(query.size()) +
                        " does not match scan width " + std::to_string(scan.width));
  }
  const QueryPattern pattern(query, key.num_classes());
  std::vector<SimScore> out;
  out.reserve(scan.starts.size());
  for (std::size_t s : scan.starts) out.push_back(pattern.score(key, s, rule));
  return out;
}

std::vector<SimScore> sliding_sim(std::span<const ClassId> query, const LabelSequence& key,
                                  const WindowScan& scan, AbsentClassRule rule) {
  return sliding_sim(query, RunIndex(key), scan, rule);
}

double cosine_signal_sim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("cosine_signal_sim: segment lengths differ");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    dot += a[t] * b[t];
    na += a[t] * a[t];
    nb += b[t] * b[t];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace cardiomix
