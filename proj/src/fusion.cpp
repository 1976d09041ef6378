#include "cardiomix/fusion.hpp"

#include <algorithm>
#include <string>

#include "parallel.hpp"

namespace cardiomix {

const char* to_string(Criterion c) noexcept {
  switch (c) {
    case Criterion::Pattern: return "pattern";
    case Criterion::Signal: return "signal";
    case Criterion::Random: return "random";
  }
  return "?";
}

const char* to_string(FusionMode m) noexcept {
  switch (m) {
    case FusionMode::CardioMix: return "cardiomix";
    case FusionMode::LabeledToUnlabeled: return "l2u";
    case FusionMode::UnlabeledToLabeled: return "u2l";
    case FusionMode::Vanilla: return "vanilla";
  }
  return "?";
}

const char* to_string(Direction d) noexcept {
  switch (d) {
    case Direction::LabeledToUnlabeled: return "l2u";
    case Direction::UnlabeledToLabeled: return "u2l";
    case Direction::Vanilla: return "vanilla";
  }
  return "?";
}

Criterion parse_criterion(std::string_view s) {
  if (s == "pattern") return Criterion::Pattern;
  if (s == "signal") return Criterion::Signal;
  if (s == "random") return Criterion::Random;
  throw ArgumentError("unknown criterion '" + std::string(s) + "'");
}

FusionMode parse_mode(std::string_view s) {
  if (s == "cardiomix") return FusionMode::CardioMix;
  if (s == "l2u") return FusionMode::LabeledToUnlabeled;
  if (s == "u2l") return FusionMode::UnlabeledToLabeled;
  if (s == "vanilla") return FusionMode::Vanilla;
  throw ArgumentError("unknown fusion mode '" + std::string(s) + "'");
}

void FusionParams::validate(std::size_t length) const {
  if (window_min < 1 || window_min > window_max) {
    throw ArgumentError("window range [" + std::to_string(window_min) + ", " +
                        std::to_string(window_max) + "] is empty or starts below 1");
  }
  if (window_max > length) {
    throw ArgumentError("window max " + std::to_string(window_max) +
                        " exceeds sequence length " + std::to_string(length));
  }
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw ArgumentError("tau must be in [0, 1], got " + std::to_string(tau));
  }
}

StepPlan draw_plan(const FusionParams& params, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, StreamTag::Window, 0);
  return {static_cast<std::size_t>(rng.uniform_int(params.window_min, params.window_max)), seed};
}

KeyPool::KeyPool(std::span<const LabelSequence* const> labels,
                 std::span<const std::span<const double>> signals)
    : labels_(labels.begin(), labels.end()), signals_(signals.begin(), signals.end()) {
  if (labels_.empty()) throw ArgumentError("key pool is empty");
  if (!signals_.empty() && signals_.size() != labels_.size()) {
    throw ArgumentError("key pool signal count does not match label count");
  }
  indexes_.reserve(labels_.size());
  min_length_ = labels_.front()->size();
  for (std::size_t j = 0; j < labels_.size(); ++j) {
    indexes_.emplace_back(*labels_[j]);
    min_length_ = std::min(min_length_, labels_[j]->size());
    if (!signals_.empty() && signals_[j].size() != labels_[j]->size()) {
      throw ArgumentError("key pool entry " + std::to_string(j) +
                          ": signal and label lengths differ");
    }
  }
}

KeyMatch search_best_key(std::span<const ClassId> query_labels,
                         std::span<const double> query_signal, const KeyPool& pool,
                         std::size_t stride, Criterion criterion, AbsentClassRule rule,
                         Rng* rng) {
  const std::size_t width = query_labels.size();
  if (width == 0) throw ArgumentError("empty query segment");
  if (width > pool.min_length()) {
    throw ArgumentError("window width " + std::to_string(width) +
                        " exceeds shortest pool sequence " + std::to_string(pool.min_length()));
  }
  std::vector<WindowScan> scans;
  scans.reserve(pool.size());
  for (std::size_t j = 0; j < pool.size(); ++j) {
    scans.push_back(enumerate_windows(pool.index(j).size(), width, stride));
  }

  switch (criterion) {
    case Criterion::Pattern: {
      const QueryPattern query(query_labels, pool.index(0).num_classes());
      KeyMatch best;
      std::optional<SimScore> best_score;
      for (std::size_t j = 0; j < pool.size(); ++j) {
        for (std::size_t s : scans[j].starts) {
          SimScore score = query.score(pool.index(j), s, rule);
          if (!best_score || score > *best_score) {
            best = {j, s, score.value()};
            best_score = score;
          }
        }
      }
      return best;
    }
    case Criterion::Signal: {
      if (!pool.has_signals()) throw ArgumentError("signal criterion needs pool signals");
      if (query_signal.size() != width) {
        throw ArgumentError("signal criterion needs a query signal of the window width");
      }
      KeyMatch best;
      bool found = false;
      for (std::size_t j = 0; j < pool.size(); ++j) {
        for (std::size_t s : scans[j].starts) {
          const double score = cosine_signal_sim(query_signal, pool.signal(j).subspan(s, width));
          if (!found || score > best.score) {
            best = {j, s, score};
            found = true;
          }
        }
      }
      return best;
    }
    case Criterion::Random: {
      if (rng == nullptr) throw ArgumentError("random criterion needs a generator");
      std::size_t total = 0;
      for (const auto& scan : scans) total += scan.starts.size();
      std::size_t pick = rng->uniform_int(0, total - 1);
      std::size_t j = 0;
      while (pick >= scans[j].starts.size()) {
        pick -= scans[j].starts.size();
        ++j;
      }
      const std::size_t s = scans[j].starts[pick];
      const QueryPattern query(query_labels, pool.index(0).num_classes());
      return {j, s, query.score(pool.index(j), s, rule).value()};
    }
  }
  throw ArgumentError("unknown criterion");
}

std::pair<EcgRecord, LabelSequence> splice(const EcgRecord& target_signal,
                                           const LabelSequence& target_labels,
                                           const EcgRecord& source_signal,
                                           const LabelSequence& source_labels, Window query,
                                           std::size_t key_start) {
  if (target_signal.size() != target_labels.size() ||
      source_signal.size() != source_labels.size()) {
    throw ArgumentError("splice: signal and label lengths differ");
  }
  if (!query.fits(target_signal.size())) {
    throw ArgumentError("splice: query window [" + std::to_string(query.start) + ", " +
                        std::to_string(query.end()) + ") out of bounds");
  }
  if (!Window{key_start, query.width}.fits(source_signal.size())) {
    throw ArgumentError("splice: key window [" + std::to_string(key_start) + ", " +
                        std::to_string(key_start + query.width) + ") out of bounds");
  }
  EcgRecord signal = target_signal;
  std::vector<ClassId> labels = target_labels.values();
  const auto q = static_cast<std::ptrdiff_t>(query.start);
  const auto k = static_cast<std::ptrdiff_t>(key_start);
  const auto w = static_cast<std::ptrdiff_t>(query.width);
  std::copy(source_signal.samples.begin() + k, source_signal.samples.begin() + k + w,
            signal.samples.begin() + q);
  std::copy(source_labels.values().begin() + k, source_labels.values().begin() + k + w,
            labels.begin() + q);
  return {std::move(signal), LabelSequence(std::move(labels), target_labels.num_classes())};
}

double segment_confidence(const ProbabilityMap& probs, std::size_t start, std::size_t width) {
  if (!Window{start, width}.fits(probs.size())) {
    throw ArgumentError("segment_confidence: window out of bounds");
  }
  auto row_max = [&](std::size_t t) {
    auto row = probs.row(t);
    return *std::max_element(row.begin(), row.end());
  };
  // Accumulate deviations from the first value: a constant segment yields
  // that value exactly.
  const double anchor = row_max(start);
  double dev = 0.0;
  for (std::size_t t = start + 1; t < start + width; ++t) dev += row_max(t) - anchor;
  return anchor + dev / static_cast<double>(width);
}

namespace {

std::size_t common_length(std::span<const LabeledSample> labeled,
                          std::span<const UnlabeledSample> unlabeled) {
  std::optional<std::size_t> length;
  auto check = [&](const EcgRecord& rec, std::size_t label_len) {
    if (rec.size() != label_len) {
      throw FormatError("record '" + rec.record_id + "': signal length " +
                        std::to_string(rec.size()) + " != label length " +
                        std::to_string(label_len));
    }
    if (!length) length = rec.size();
    if (rec.size() != *length) {
      throw FormatError("record '" + rec.record_id + "' has length " + std::to_string(rec.size()) +
                        "; batch length is " + std::to_string(*length));
    }
  };
  for (const auto& s : labeled) check(s.record, s.labels.size());
  for (const auto& s : unlabeled) check(s.record, s.probs.size());
  if (!length) throw ArgumentError("empty batch");
  return *length;
}

void check_plan(const FusionParams& params, const StepPlan& plan, std::size_t length) {
  params.validate(length);
  if (plan.window < 1 || plan.window > length) {
    throw ArgumentError("window width " + std::to_string(plan.window) + " out of range");
  }
}

std::vector<LabelSequence> pseudo_labels(std::span<const UnlabeledSample> unlabeled,
                                         unsigned threads) {
  std::vector<LabelSequence> out(unlabeled.size());
  detail::parallel_for(unlabeled.size(), threads,
                       [&](std::size_t i) { out[i] = argmax_labels(unlabeled[i].probs); });
  return out;
}

std::vector<FusionOutcome> run_l2u(std::span<const UnlabeledSample> unlabeled,
                                   std::span<const LabelSequence> pseudo,
                                   std::span<const LabeledSample> labeled,
                                   const FusionParams& params, const StepPlan& plan,
                                   std::size_t length) {
  std::vector<const LabelSequence*> key_labels;
  std::vector<std::span<const double>> key_signals;
  for (const auto& s : labeled) {
    key_labels.push_back(&s.labels);
    key_signals.emplace_back(s.record.samples);
  }
  const KeyPool pool(key_labels, key_signals);
  const std::size_t width = plan.window;
  std::vector<FusionOutcome> out(unlabeled.size());
  detail::parallel_for(unlabeled.size(), params.threads, [&](std::size_t i) {
    Rng rng = Rng::derive(plan.seed, StreamTag::LabeledToUnlabeled, i);
    const std::size_t s_q = rng.uniform_int(0, length - width);
    const auto query_signal = std::span<const double>(unlabeled[i].record.samples).subspan(s_q, width);
    const KeyMatch match = search_best_key(pseudo[i].slice(s_q, width), query_signal, pool,
                                           stride_for(width), params.criterion,
                                           params.absent_rule, &rng);
    const LabeledSample& src = labeled[match.source_index];
    auto [signal, labels] = splice(unlabeled[i].record, pseudo[i], src.record, src.labels,
                                   {s_q, width}, match.key_start);
    out[i] = {Direction::LabeledToUnlabeled, i, std::move(signal), std::move(labels), width, s_q,
              match.source_index, match.key_start, match.score, std::nullopt, true};
  });
  return out;
}

std::vector<FusionOutcome> run_u2l(std::span<const LabeledSample> labeled,
                                   std::span<const UnlabeledSample> unlabeled,
                                   std::span<const LabelSequence> pseudo,
                                   const FusionParams& params, const StepPlan& plan,
                                   std::size_t length) {
  std::vector<const LabelSequence*> key_labels;
  std::vector<std::span<const double>> key_signals;
  for (std::size_t j = 0; j < unlabeled.size(); ++j) {
    key_labels.push_back(&pseudo[j]);
    key_signals.emplace_back(unlabeled[j].record.samples);
  }
  const KeyPool pool(key_labels, key_signals);
  const std::size_t width = plan.window;
  std::vector<FusionOutcome> out(labeled.size());
  detail::parallel_for(labeled.size(), params.threads, [&](std::size_t i) {
    Rng rng = Rng::derive(plan.seed, StreamTag::UnlabeledToLabeled, i);
    const std::size_t s_q = rng.uniform_int(0, length - width);
    const auto query_signal = std::span<const double>(labeled[i].record.samples).subspan(s_q, width);
    const KeyMatch match = search_best_key(labeled[i].labels.slice(s_q, width), query_signal, pool,
                                           stride_for(width), params.criterion,
                                           params.absent_rule, &rng);
    const double conf =
        segment_confidence(unlabeled[match.source_index].probs, match.key_start, width);
    FusionOutcome& o = out[i];
    o = {Direction::UnlabeledToLabeled, i, {}, {}, width, s_q, match.source_index,
         match.key_start, match.score, conf, conf > params.tau};
    if (o.applied) {
      auto [signal, labels] =
          splice(labeled[i].record, labeled[i].labels, unlabeled[match.source_index].record,
                 pseudo[match.source_index], {s_q, width}, match.key_start);
      o.signal = std::move(signal);
      o.labels = std::move(labels);
    } else {
      o.signal = labeled[i].record;
      o.labels = labeled[i].labels;
    }
  });
  return out;
}

}  // namespace

std::vector<FusionOutcome> fuse_l2u(std::span<const UnlabeledSample> unlabeled,
                                    std::span<const LabeledSample> labeled,
                                    const FusionParams& params, const StepPlan& plan) {
  if (unlabeled.empty() || labeled.empty()) throw ArgumentError("fuse_l2u: empty batch");
  const std::size_t length = common_length(labeled, unlabeled);
  check_plan(params, plan, length);
  const auto pseudo = pseudo_labels(unlabeled, params.threads);
  return run_l2u(unlabeled, pseudo, labeled, params, plan, length);
}

std::vector<FusionOutcome> fuse_u2l(std::span<const LabeledSample> labeled,
                                    std::span<const UnlabeledSample> unlabeled,
                                    const FusionParams& params, const StepPlan& plan) {
  if (unlabeled.empty() || labeled.empty()) throw ArgumentError("fuse_u2l: empty batch");
  const std::size_t length = common_length(labeled, unlabeled);
  check_plan(params, plan, length);
  const auto pseudo = pseudo_labels(unlabeled, params.threads);
  return run_u2l(labeled, unlabeled, pseudo, params, plan, length);
}

std::vector<FusionOutcome> vanilla_cutmix(std::span<const UnlabeledSample> unlabeled,
                                          const FusionParams& params, const StepPlan& plan) {
  if (unlabeled.size() < 2) throw ArgumentError("vanilla CutMix needs at least 2 samples");
  const std::size_t length = common_length({}, unlabeled);
  check_plan(params, plan, length);
  const auto pseudo = pseudo_labels(unlabeled, params.threads);
  const std::size_t width = plan.window;
  const std::size_t n = unlabeled.size();
  std::vector<FusionOutcome> out(n);
  detail::parallel_for(n, params.threads, [&](std::size_t i) {
    Rng rng = Rng::derive(plan.seed, StreamTag::Vanilla, i);
    std::size_t partner = rng.uniform_int(0, n - 2);
    if (partner >= i) ++partner;
    const std::size_t s = rng.uniform_int(0, length - width);
    const double score =
        sim(pseudo[i].slice(s, width), pseudo[partner].slice(s, width), params.absent_rule).value();
    auto [signal, labels] = splice(unlabeled[i].record, pseudo[i], unlabeled[partner].record,
                                   pseudo[partner], {s, width}, s);
    out[i] = {Direction::Vanilla, i, std::move(signal), std::move(labels), width, s, partner, s,
              score, std::nullopt, true};
  });
  return out;
}

StepResult cardiomix_step(std::span<const LabeledSample> labeled,
                          std::span<const UnlabeledSample> unlabeled, const FusionParams& params,
                          std::uint64_t seed) {
  if (unlabeled.empty() || labeled.empty()) throw ArgumentError("cardiomix_step: empty batch");
  const std::size_t length = common_length(labeled, unlabeled);
  params.validate(length);
  const StepPlan plan = draw_plan(params, seed);
  const auto pseudo = pseudo_labels(unlabeled, params.threads);
  StepResult result{plan.window, {}, {}};
  result.l2u = run_l2u(unlabeled, pseudo, labeled, params, plan, length);
  result.u2l = run_u2l(labeled, unlabeled, pseudo, params, plan, length);
  return result;
}

StepResult fuse_batch(std::span<const LabeledSample> labeled,
                      std::span<const UnlabeledSample> unlabeled, const FusionParams& params,
                      std::uint64_t seed) {
  switch (params.mode) {
    case FusionMode::CardioMix:
      return cardiomix_step(labeled, unlabeled, params, seed);
    case FusionMode::LabeledToUnlabeled: {
      const StepPlan plan = draw_plan(params, seed);
      return {plan.window, fuse_l2u(unlabeled, labeled, params, plan), {}};
    }
    case FusionMode::UnlabeledToLabeled: {
      const StepPlan plan = draw_plan(params, seed);
      return {plan.window, {}, fuse_u2l(labeled, unlabeled, params, plan)};
    }
    case FusionMode::Vanilla: {
      const StepPlan plan = draw_plan(params, seed);
      return {plan.window, vanilla_cutmix(unlabeled, params, plan), {}};
    }
  }
  throw ArgumentError("unknown fusion mode");
}

}  // namespace cardiomix
