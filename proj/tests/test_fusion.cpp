#include "doctest.h"

#include <algorithm>
#include <set>

#include "cardiomix/fusion.hpp"
#include "cardiomix/synthetic.hpp"
#include "naive_oracle.hpp"
#include "test_helpers.hpp"

using namespace cardiomix;

namespace {

KeyPool make_pool(const std::vector<LabelSequence>& labels,
                  const std::vector<std::vector<double>>* signals = nullptr) {
  static thread_local std::vector<const LabelSequence*> ptrs;
  static thread_local std::vector<std::span<const double>> spans;
  ptrs.clear();
  spans.clear();
  for (const auto& l : labels) ptrs.push_back(&l);
  if (signals) {
    for (const auto& s : *signals) spans.emplace_back(s);
  }
  return KeyPool(ptrs, spans);
}

LabelSequence periodic(std::size_t length, std::size_t phase) {
  const char* pattern = "0112200333";  // period 10
  std::vector<ClassId> v(length);
  for (std::size_t t = 0; t < length; ++t) v[t] = static_cast<ClassId>(pattern[(t + phase) % 10] - '0');
  return LabelSequence(std::move(v));
}

std::vector<LabeledSample> synth_labeled(std::size_t n, std::uint64_t seed, std::size_t offset = 0) {
  std::vector<LabeledSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = Rng::derive(seed, StreamTag::Synthesis, i + offset);
    SynthParams p;
    p.heart_rate_bpm = 50.0 + 60.0 * rng.uniform01();
    p.phase = rng.uniform01();
    p.noise_std = 0.02;
    p.seed = rng.next();
    p.record_id = "rec" + std::to_string(i + offset);
    auto [rec, labels] = synth_ecg(p);
    out.push_back({std::move(rec), std::move(labels)});
  }
  return out;
}

std::vector<UnlabeledSample> as_unlabeled(const std::vector<LabeledSample>& src, double sharpness,
                                          double flip, std::uint64_t seed) {
  std::vector<UnlabeledSample> out;
  for (std::size_t i = 0; i < src.size(); ++i) {
    Rng rng = Rng::derive(seed, StreamTag::Corruption, i);
    out.push_back({src[i].record, corrupt_labels(src[i].labels, {2, flip, sharpness}, rng)});
  }
  return out;
}

double naive_confidence(const ProbabilityMap& probs, std::size_t start, std::size_t width) {
  double sum = 0.0;
  for (std::size_t t = start; t < start + width; ++t) {
    double m = 0.0;
    for (std::size_t c = 0; c < probs.num_classes(); ++c) m = std::max(m, probs.at(t, c));
    sum += m;
  }
  return sum / static_cast<double>(width);
}

void check_outcomes_equal(const std::vector<FusionOutcome>& a, const std::vector<FusionOutcome>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].query_start == b[i].query_start);
    CHECK(a[i].source_index == b[i].source_index);
    CHECK(a[i].key_start == b[i].key_start);
    CHECK(a[i].score == b[i].score);
    CHECK(a[i].confidence == b[i].confidence);
    CHECK(a[i].applied == b[i].applied);
    CHECK(a[i].signal.samples == b[i].signal.samples);
    CHECK(a[i].labels == b[i].labels);
  }
}

}  // namespace

TEST_CASE("search finds the unique perfect match") {
  const LabelSequence query = LabelSequence::from_string("11122200333300002222");
  std::vector<ClassId> host(100, 0);
  std::copy(query.values().begin(), query.values().end(), host.begin() + 40);
  const std::vector<LabelSequence> pool{LabelSequence(100, 0), LabelSequence(host)};
  const KeyMatch m = search_best_key(query.view(), {}, make_pool(pool), 10, Criterion::Pattern,
                                     AbsentClassRule::Exclude);
  CHECK(m.source_index == 1);
  CHECK(m.key_start == 40);
  CHECK(m.score == 1.0);
}

TEST_CASE("search breaks ties by lowest (pool index, start)") {
  const LabelSequence query = LabelSequence::from_string("01230123");
  std::vector<ClassId> a(24, 0), b(24, 0);
  std::copy(query.values().begin(), query.values().end(), a.begin() + 8);
  std::copy(query.values().begin(), query.values().end(), b.begin() + 4);
  const std::vector<LabelSequence> pool{LabelSequence(a), LabelSequence(b)};
  const KeyMatch m = search_best_key(query.view(), {}, make_pool(pool), 4, Criterion::Pattern,
                                     AbsentClassRule::Exclude);
  CHECK(m.source_index == 0);
  CHECK(m.key_start == 8);
  CHECK(m.score == 1.0);
}

TEST_CASE("pattern search equals the brute-force argmax") {
  Rng rng(500);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t length = rng.uniform_int(1, 200);
    const std::size_t width = rng.uniform_int(1, std::min<std::size_t>(64, length));
    const std::size_t stride = rng.uniform_int(1, width);
    std::vector<LabelSequence> pool;
    const std::size_t n = rng.uniform_int(1, 4);
    for (std::size_t j = 0; j < n; ++j) pool.push_back(testing::random_runs(rng, length));
    const LabelSequence query = testing::random_runs(rng, width);
    const KeyMatch got = search_best_key(query.view(), {}, make_pool(pool), stride,
                                         Criterion::Pattern, AbsentClassRule::Exclude);
    const auto want = oracle::naive_search(query.view(), pool, stride);
    CHECK(got.source_index == want.source_index);
    CHECK(got.key_start == want.key_start);
  }
}

TEST_CASE("signal search maximizes cosine similarity") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t length = rng.uniform_int(8, 120);
    const std::size_t width = rng.uniform_int(2, length);
    const std::size_t stride = std::max<std::size_t>(1, width / 2);
    std::vector<LabelSequence> labels;
    std::vector<std::vector<double>> signals;
    for (int j = 0; j < 3; ++j) {
      labels.push_back(testing::random_runs(rng, length));
      signals.push_back(testing::random_signal(rng, length));
    }
    const auto query = testing::random_signal(rng, width);
    const LabelSequence query_labels = testing::random_runs(rng, width);
    const KeyMatch got = search_best_key(query_labels.view(), query, make_pool(labels, &signals),
                                         stride, Criterion::Signal, AbsentClassRule::Exclude);
    double best = -2.0;
    std::size_t bj = 0, bs = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      for (std::size_t s : oracle::naive_windows(length, width, stride)) {
        const double c = cosine_signal_sim(query, std::span<const double>(signals[j]).subspan(s, width));
        if (c > best) {
          best = c;
          bj = j;
          bs = s;
        }
      }
    }
    CHECK(got.source_index == bj);
    CHECK(got.key_start == bs);
  }
  const std::vector<LabelSequence> pool{LabelSequence(10, 0)};
  CHECK_THROWS_AS(search_best_key(pool[0].slice(0, 4), {}, make_pool(pool), 2, Criterion::Signal,
                                  AbsentClassRule::Exclude),
                  ArgumentError);
}

TEST_CASE("random search is reproducible and draws from the scan") {
  const std::vector<LabelSequence> pool{LabelSequence(50, 0), LabelSequence(50, 2)};
  const LabelSequence query(10, 2);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng r1(seed), r2(seed);
    const KeyMatch a = search_best_key(query.view(), {}, make_pool(pool), 5, Criterion::Random,
                                       AbsentClassRule::Exclude, &r1);
    const KeyMatch b = search_best_key(query.view(), {}, make_pool(pool), 5, Criterion::Random,
                                       AbsentClassRule::Exclude, &r2);
    CHECK(a.source_index == b.source_index);
    CHECK(a.key_start == b.key_start);
    CHECK(a.key_start % 5 == 0);
    CHECK(a.score == (a.source_index == 1 ? 1.0 : 0.0));
    seen.insert({a.source_index, a.key_start});
  }
  CHECK(seen.size() == 18);  // 2 sequences x 9 starts
}

TEST_CASE("search argument errors") {
  const std::vector<LabelSequence> pool{LabelSequence(10, 0)};
  const LabelSequence query(11, 0);
  CHECK_THROWS_AS(search_best_key(query.view(), {}, make_pool(pool), 2, Criterion::Pattern,
                                  AbsentClassRule::Exclude),
                  ArgumentError);
  const std::vector<const LabelSequence*> none;
  CHECK_THROWS_AS(KeyPool{std::span<const LabelSequence* const>(none)}, ArgumentError);
}

TEST_CASE("splice examples") {
  const EcgRecord tgt{"t", "I", 250, {0, 1, 2, 3, 4, 5, 6, 7}};
  const EcgRecord src{"s", "I", 250, {10, 11, 12, 13, 14, 15, 16, 17}};
  const LabelSequence tl = LabelSequence::from_string("00022000");
  const LabelSequence sl = LabelSequence::from_string("11111111");

  auto [sig, lab] = splice(tgt, tl, src, sl, {2, 3}, 0);
  CHECK(lab.to_string() == "00111000");
  CHECK(sig.samples == std::vector<double>{0, 1, 10, 11, 12, 5, 6, 7});
  CHECK(sig.record_id == "t");

  auto [self_sig, self_lab] = splice(tgt, tl, tgt, tl, {3, 4}, 3);
  CHECK(self_sig.samples == tgt.samples);
  CHECK(self_lab == tl);

  auto [full_sig, full_lab] = splice(tgt, tl, src, sl, {0, 8}, 0);
  CHECK(full_sig.samples == src.samples);
  CHECK(full_lab == sl);

  CHECK_THROWS_AS(splice(tgt, tl, src, sl, {6, 3}, 0), ArgumentError);
  CHECK_THROWS_AS(splice(tgt, tl, src, sl, {0, 3}, 6), ArgumentError);
}

TEST_CASE("splice locality and source fidelity on random windows") {
  Rng rng(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t length = rng.uniform_int(1, 80);
    const std::size_t width = rng.uniform_int(1, length);
    std::size_t q = rng.uniform_int(0, length - width);
    if (trial % 3 == 0) q = 0;
    if (trial % 3 == 1) q = length - width;
    const std::size_t k = rng.uniform_int(0, length - width);
    const EcgRecord t{"t", "I", 250, testing::random_signal(rng, length)};
    const EcgRecord s{"s", "I", 250, testing::random_signal(rng, length)};
    const LabelSequence tl = testing::random_dense(rng, length);
    const LabelSequence sl = testing::random_dense(rng, length);
    auto [sig, lab] = splice(t, tl, s, sl, {q, width}, k);
    CHECK(sig.samples == oracle::naive_splice(t.samples, s.samples, q, k, width));
    CHECK(lab.values() == oracle::naive_splice(tl.values(), sl.values(), q, k, width));
  }
}

TEST_CASE("segment_confidence") {
  const LabelSequence labels = LabelSequence::from_string("0123012301");
  CHECK(segment_confidence(ProbabilityMap::one_hot(labels), 2, 5) == 1.0);
  const ProbabilityMap uniform(10, 4, std::vector<double>(40, 0.25));
  CHECK(segment_confidence(uniform, 0, 10) == 0.25);
  const ProbabilityMap two(2, 4, {0.9, 0.05, 0.05, 0.0, 0.1, 0.7, 0.1, 0.1});
  CHECK(segment_confidence(two, 0, 2) == doctest::Approx(0.8));
  CHECK_THROWS_AS(segment_confidence(two, 1, 2), ArgumentError);
}

TEST_CASE("L2U with a pool holding every query pattern scores 1 everywhere") {
  std::vector<LabeledSample> labeled;
  for (std::size_t phase = 0; phase < 10; ++phase) {
    const LabelSequence l = periodic(200, phase);
    labeled.push_back({{"l" + std::to_string(phase), "I", 250, std::vector<double>(200, double(phase))}, l});
  }
  std::vector<UnlabeledSample> unlabeled;
  for (std::size_t i = 0; i < 6; ++i) {
    const LabelSequence l = periodic(200, 3 * i);
    unlabeled.push_back({{"u" + std::to_string(i), "I", 250, std::vector<double>(200, -1.0)},
                         ProbabilityMap::one_hot(l)});
  }
  FusionParams params;
  params.window_min = params.window_max = 40;
  const auto out = fuse_l2u(unlabeled, labeled, params, draw_plan(params, 5));
  for (const auto& o : out) {
    CHECK(o.score == 1.0);
    const auto key = labeled[o.source_index].labels.slice(o.key_start, o.window);
    const auto fused = o.labels.slice(o.query_start, o.window);
    CHECK(std::equal(key.begin(), key.end(), fused.begin()));
    CHECK(o.signal.samples[o.query_start] == static_cast<double>(o.source_index));
  }
}

TEST_CASE("L2U equals a straight-line composition of its parts") {
  const auto labeled = synth_labeled(4, 1);
  const auto unlabeled = as_unlabeled(synth_labeled(4, 1, 100), 0.9, 0.02, 3);
  FusionParams params;
  const StepPlan plan = draw_plan(params, 42);
  const auto out = fuse_l2u(unlabeled, labeled, params, plan);
  std::vector<LabelSequence> pool;
  for (const auto& l : labeled) pool.push_back(l.labels);
  for (std::size_t i = 0; i < unlabeled.size(); ++i) {
    Rng rng = Rng::derive(plan.seed, StreamTag::LabeledToUnlabeled, i);
    const std::size_t length = unlabeled[i].record.size();
    const std::size_t s_q = rng.uniform_int(0, length - plan.window);
    const LabelSequence pseudo = argmax_labels(unlabeled[i].probs);
    const auto want = oracle::naive_search(pseudo.slice(s_q, plan.window), pool, plan.window / 2);
    CHECK(out[i].query_start == s_q);
    CHECK(out[i].source_index == want.source_index);
    CHECK(out[i].key_start == want.key_start);
    const auto& src = labeled[want.source_index];
    CHECK(out[i].signal.samples ==
          oracle::naive_splice(unlabeled[i].record.samples, src.record.samples, s_q, want.key_start, plan.window));
    CHECK(out[i].labels.values() ==
          oracle::naive_splice(pseudo.values(), src.labels.values(), s_q, want.key_start, plan.window));
  }
}

TEST_CASE("random criterion is reproducible across runs") {
  const auto labeled = synth_labeled(4, 2);
  const auto unlabeled = as_unlabeled(synth_labeled(4, 2, 50), 0.9, 0.0, 1);
  FusionParams params;
  params.criterion = Criterion::Random;
  const auto a = fuse_l2u(unlabeled, labeled, params, draw_plan(params, 9));
  const auto b = fuse_l2u(unlabeled, labeled, params, draw_plan(params, 9));
  check_outcomes_equal(a, b);
}

TEST_CASE("U2L gate: one-hot maps always pass, tau = 1 never does") {
  const auto labeled = synth_labeled(4, 3);
  const auto donors = synth_labeled(4, 3, 10);
  std::vector<UnlabeledSample> onehot;
  for (const auto& d : donors) onehot.push_back({d.record, ProbabilityMap::one_hot(d.labels)});
  FusionParams params;
  for (const auto& o : fuse_u2l(labeled, onehot, params, draw_plan(params, 1))) {
    CHECK(o.applied);
    CHECK(*o.confidence == 1.0);
  }
  params.tau = 1.0;
  const auto soft = as_unlabeled(donors, 0.95, 0.0, 2);
  const auto out = fuse_u2l(labeled, soft, params, draw_plan(params, 1));
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK_FALSE(out[i].applied);
    CHECK(out[i].signal.samples == labeled[i].record.samples);
    CHECK(out[i].labels == labeled[i].labels);
  }
}

TEST_CASE("U2L gate decisions match recomputed confidences at tau = 0.8") {
  const auto labeled = synth_labeled(8, 4);
  const auto donors = synth_labeled(8, 4, 20);
  std::vector<UnlabeledSample> unlabeled;
  for (std::size_t i = 0; i < donors.size(); ++i) {
    Rng rng = Rng::derive(7, StreamTag::Corruption, i);
    const double sharpness = 0.6 + 0.05 * static_cast<double>(i);  // 0.6 .. 0.95
    unlabeled.push_back({donors[i].record, corrupt_labels(donors[i].labels, {3, 0.1, sharpness}, rng)});
  }
  FusionParams params;
  params.tau = 0.8;
  const StepPlan plan = draw_plan(params, 11);
  const auto out = fuse_u2l(labeled, unlabeled, params, plan);
  std::size_t passed = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double conf = naive_confidence(unlabeled[out[i].source_index].probs, out[i].key_start, plan.window);
    CHECK(*out[i].confidence == doctest::Approx(conf).epsilon(1e-12));
    CHECK(out[i].applied == (conf > 0.8));
    passed += out[i].applied;
    if (out[i].applied) {
      const LabelSequence pseudo = argmax_labels(unlabeled[out[i].source_index].probs);
      CHECK(out[i].labels.values() == oracle::naive_splice(labeled[i].labels.values(), pseudo.values(),
                                                           out[i].query_start, out[i].key_start,
                                                           plan.window));
    }
  }
  MESSAGE("gated " << passed << " of " << out.size());
}

TEST_CASE("gate monotonicity in tau") {
  const auto labeled = synth_labeled(8, 5);
  std::vector<UnlabeledSample> unlabeled;
  const auto donors = synth_labeled(8, 5, 30);
  for (std::size_t i = 0; i < donors.size(); ++i) {
    Rng rng = Rng::derive(5, StreamTag::Corruption, i);
    unlabeled.push_back({donors[i].record, corrupt_labels(donors[i].labels, {4, 0.2, 0.5 + 0.06 * i}, rng)});
  }
  FusionParams params;
  std::set<std::size_t> previous;
  bool first = true;
  for (double tau : {0.0, 0.2, 0.4, 0.6, 0.8, 0.9}) {
    params.tau = tau;
    std::set<std::size_t> gated;
    for (const auto& o : fuse_u2l(labeled, unlabeled, params, draw_plan(params, 3))) {
      if (o.applied) gated.insert(o.target_index);
    }
    if (!first) CHECK(std::includes(previous.begin(), previous.end(), gated.begin(), gated.end()));
    previous = gated;
    first = false;
  }
}

TEST_CASE("cardiomix_step with identical 1/1 batches pastes self-patterns") {
  const auto labeled = synth_labeled(1, 6);
  const std::vector<UnlabeledSample> unlabeled{{labeled[0].record, ProbabilityMap::one_hot(labeled[0].labels)}};
  FusionParams params;
  params.window_min = params.window_max = labeled[0].record.size();
  const StepResult r = cardiomix_step(labeled, unlabeled, params, 1);
  REQUIRE(r.l2u.size() == 1);
  REQUIRE(r.u2l.size() == 1);
  CHECK(r.l2u[0].score == 1.0);
  CHECK(r.u2l[0].score == 1.0);
  CHECK(r.u2l[0].applied);
  CHECK(r.l2u[0].labels == labeled[0].labels);
}

TEST_CASE("cardiomix_step is deterministic across thread counts and composes L2U then U2L") {
  const auto labeled = synth_labeled(16, 7);
  const auto unlabeled = as_unlabeled(synth_labeled(16, 7, 40), 0.85, 0.03, 4);
  FusionParams params;
  const StepResult a = cardiomix_step(labeled, unlabeled, params, 2024);
  params.threads = 8;
  const StepResult b = cardiomix_step(labeled, unlabeled, params, 2024);
  CHECK(a.window == b.window);
  check_outcomes_equal(a.l2u, b.l2u);
  check_outcomes_equal(a.u2l, b.u2l);

  params.threads = 1;
  const StepPlan plan = draw_plan(params, 2024);
  CHECK(plan.window == a.window);
  check_outcomes_equal(a.l2u, fuse_l2u(unlabeled, labeled, params, plan));
  check_outcomes_equal(a.u2l, fuse_u2l(labeled, unlabeled, params, plan));
}

TEST_CASE("vanilla CutMix") {
  const auto base = synth_labeled(1, 8);
  const UnlabeledSample u{base[0].record, ProbabilityMap::one_hot(base[0].labels)};
  FusionParams params;
  const std::vector<UnlabeledSample> twins{u, u};
  for (const auto& o : vanilla_cutmix(twins, params, draw_plan(params, 1))) {
    CHECK(o.signal.samples == u.record.samples);
    CHECK(o.labels == base[0].labels);
    CHECK(o.source_index != o.target_index);
  }
  CHECK_THROWS_AS(vanilla_cutmix(std::vector<UnlabeledSample>{u}, params, draw_plan(params, 1)), ArgumentError);

  const auto batch = as_unlabeled(synth_labeled(4, 8, 5), 0.9, 0.05, 6);
  const StepPlan plan = draw_plan(params, 77);
  const auto a = vanilla_cutmix(batch, params, plan);
  check_outcomes_equal(a, vanilla_cutmix(batch, params, plan));
  for (const auto& o : a) {
    CHECK(o.query_start == o.key_start);
    CHECK(o.source_index != o.target_index);
    const LabelSequence tp = argmax_labels(batch[o.target_index].probs);
    const LabelSequence sp = argmax_labels(batch[o.source_index].probs);
    CHECK(o.labels.values() == oracle::naive_splice(tp.values(), sp.values(), o.query_start, o.key_start, o.window));
    CHECK(o.signal.samples == oracle::naive_splice(batch[o.target_index].record.samples,
                                                   batch[o.source_index].record.samples,
                                                   o.query_start, o.key_start, o.window));
  }
}

TEST_CASE("parameter validation") {
  FusionParams p;
  CHECK_NOTHROW(p.validate(2500));
  CHECK_THROWS_AS(p.validate(1000), ArgumentError);
  p.tau = 1.01;
  CHECK_THROWS_AS(p.validate(2500), ArgumentError);
  p.tau = 0.8;
  p.window_min = 300;
  p.window_max = 200;
  CHECK_THROWS_AS(p.validate(2500), ArgumentError);
  CHECK(stride_for(250) == 125);
  CHECK(stride_for(1) == 1);
  CHECK(parse_mode("u2l") == FusionMode::UnlabeledToLabeled);
  CHECK_THROWS_AS(parse_criterion("dtw"), ArgumentError);
}

TEST_CASE("mismatched record lengths are a data error") {
  auto labeled = synth_labeled(2, 9);
  auto unlabeled = as_unlabeled(synth_labeled(2, 9, 3), 0.9, 0.0, 1);
  unlabeled[1].record.samples.pop_back();
  FusionParams params;
  CHECK_THROWS_AS(fuse_l2u(unlabeled, labeled, params, draw_plan(params, 1)), FormatError);
}
