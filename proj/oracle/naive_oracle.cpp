#include "naive_oracle.hpp"

namespace cardiomix::oracle {

namespace {

unsigned __int128 gcd(unsigned __int128 a, unsigned __int128 b) {
  while (b != 0) {
    auto r = a % b;
    a = b;
    b = r;
  }
  return a;
}

}  // namespace

NaiveCounts naive_counts(std::span<const ClassId> a, std::span<const ClassId> b,
                         std::size_t num_classes) {
  NaiveCounts out{std::vector<std::size_t>(num_classes, 0), std::vector<std::size_t>(num_classes, 0)};
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t t = 0; t < a.size(); ++t) {
      const bool in_a = a[t] == c;
      const bool in_b = b[t] == c;
      if (in_a && in_b) ++out.intersection[c];
      if (in_a || in_b) ++out.union_count[c];
    }
  }
  return out;
}

NaiveFraction naive_sim(std::span<const ClassId> a, std::span<const ClassId> b, bool literal_mean,
                        std::size_t num_classes) {
  const NaiveCounts counts = naive_counts(a, b, num_classes);
  // Common denominator: product of all non-zero unions.
  unsigned __int128 prod = 1;
  std::size_t present = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (counts.union_count[c] > 0) {
      prod *= counts.union_count[c];
      ++present;
    }
  }
  unsigned __int128 num = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (counts.union_count[c] == 0) {
      if (literal_mean) num += prod;
      continue;
    }
    num += counts.intersection[c] * (prod / counts.union_count[c]);
  }
  unsigned __int128 den = prod * (literal_mean ? num_classes : present);
  const auto g = gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return {num, den};
}

bool naive_greater(const NaiveFraction& a, const NaiveFraction& b) {
  return a.num * b.den > b.num * a.den;
}

std::vector<std::size_t> naive_windows(std::size_t length, std::size_t width, std::size_t stride) {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s + width <= length; ++s) {
    if (s % stride == 0 || s + width == length) out.push_back(s);
  }
  return out;
}

NaiveMatch naive_search(std::span<const ClassId> query, std::span<const LabelSequence> pool,
                        std::size_t stride) {
  NaiveMatch best;
  bool found = false;
  for (std::size_t j = 0; j < pool.size(); ++j) {
    for (std::size_t s : naive_windows(pool[j].size(), query.size(), stride)) {
      const auto key = pool[j].view().subspan(s, query.size());
      const NaiveFraction score = naive_sim(query, key);
      if (!found || naive_greater(score, best.score)) {
        best = {j, s, score};
        found = true;
      }
    }
  }
  return best;
}

}  // namespace cardiomix::oracle
