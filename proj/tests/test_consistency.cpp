#include "doctest.h"

#include <algorithm>

#include "cardiomix/consistency.hpp"
#include "test_helpers.hpp"

using namespace cardiomix;

namespace {

// Scans runs directly: a T run is invalid when no QRS run lies between it
// and the previous T run (or the sequence start).
std::vector<Violation> naive_violations(const LabelSequence& labels, bool exempt_first) {
  std::vector<Violation> out;
  const auto runs = to_runs(labels);
  bool first_wave = true;
  bool qrs_since_t = false;
  for (const auto& r : runs) {
    if (r.cls == 0) continue;
    if (r.cls == 2) qrs_since_t = true;
    if (r.cls == 3) {
      if (!qrs_since_t && !(exempt_first && first_wave)) out.push_back({r.start, r.end});
      qrs_since_t = false;
    }
    first_wave = false;
  }
  return out;
}

}  // namespace

TEST_CASE("valid and invalid examples") {
  CHECK(find_violations(LabelSequence::from_string("00220330")).empty());
  const auto v = find_violations(LabelSequence::from_string("00110330"));
  REQUIRE(v.size() == 1);
  CHECK(v[0].start == 5);
  CHECK(v[0].end == 7);
  CHECK(find_violations(LabelSequence::from_string("33002233")).empty());
  CHECK(find_violations(LabelSequence::from_string("000000")).empty());
  CHECK(find_violations(LabelSequence::from_string("0220330033")).size() == 1);
}

TEST_CASE("the first-wave exemption can be switched off") {
  ConsistencyOptions strict;
  strict.exempt_first_wave = false;
  const auto v = find_violations(LabelSequence::from_string("33002233"), strict);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == Violation{0, 2});
  // Exemption only covers a T run that is the first wave, not one after P.
  CHECK(find_violations(LabelSequence::from_string("1133")).size() == 1);
}

TEST_CASE("agrees with a run-scan reference") {
  Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const LabelSequence l = testing::random_runs(rng, rng.uniform_int(1, 120), 8);
    CHECK(find_violations(l) == naive_violations(l, true));
    CHECK(find_violations(l, {false}) == naive_violations(l, false));
  }
}

TEST_CASE("consistency_ratio") {
  const std::vector<LabelSequence> batch{LabelSequence::from_string("00220330"),
                                         LabelSequence::from_string("00110330")};
  CHECK(consistency_ratio(batch) == 0.5);
  CHECK(consistency_ratio(std::span(batch).first(1)) == 1.0);
  CHECK_THROWS_AS(consistency_ratio(std::span<const LabelSequence>{}), ArgumentError);
}

TEST_CASE("inserting a QRS run before a violating T run removes that violation") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const LabelSequence l = testing::random_runs(rng, rng.uniform_int(4, 80), 6);
    const auto before = find_violations(l);
    if (before.empty()) continue;
    const Violation target = before.front();
    if (target.end - target.start < 2) continue;
    auto values = l.values();
    values[target.start] = 2;  // the run now starts with a QRS sample
    const auto after = find_violations(LabelSequence(values));
    CHECK(std::none_of(after.begin(), after.end(), [&](const Violation& v) {
      return v.start == target.start + 1 && v.end == target.end;
    }));
  }
}

TEST_CASE("ratio is invariant under batch permutation") {
  Rng rng(5);
  std::vector<LabelSequence> batch;
  for (int i = 0; i < 20; ++i) batch.push_back(testing::random_runs(rng, 60, 10));
  const double r = consistency_ratio(batch);
  for (int k = 0; k < 10; ++k) {
    for (std::size_t i = batch.size() - 1; i > 0; --i) std::swap(batch[i], batch[rng.uniform_int(0, i)]);
    CHECK(consistency_ratio(batch) == r);
  }
}
