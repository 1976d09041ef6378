// cardiomix: batch front end for preprocessing, fusion, consistency analysis,
// evaluation and synthetic data generation.
//
// Exit codes: 0 success, 2 argument error, 3 data/format error, 4 oracle mismatch.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cardiomix/consistency.hpp"
#include "cardiomix/fusion.hpp"
#include "cardiomix/io_formats.hpp"
#include "cardiomix/metrics.hpp"
#include "cardiomix/preprocess.hpp"
#include "cardiomix/rng.hpp"
#include "cardiomix/similarity.hpp"
#include "cardiomix/synthetic.hpp"
#include "naive_oracle.hpp"

namespace fs = std::filesystem;
using namespace cardiomix;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitArgument = 2;
constexpr int kExitData = 3;
constexpr int kExitOracle = 4;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_optional(const std::optional<double>& v) { return v ? fmt_double(*v) : "NA"; }

std::string safe_name(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << text;
}

// Writes signal (+labels, +probs) under `dir` with base name `stem` and returns
// the manifest entry pointing at them.
ManifestEntry write_record(const fs::path& dir, const std::string& stem, ManifestEntry entry,
                           const EcgRecord& rec, const LabelSequence* labels,
                           const ProbabilityMap* probs) {
  entry.sample_rate = rec.sample_rate;
  entry.signal_path = stem + ".f32";
  save_signal(dir / entry.signal_path, rec);
  entry.labels_path.reset();
  entry.probs_path.reset();
  if (labels) {
    entry.labels_path = stem + ".labels.csv";
    save_labels(dir / *entry.labels_path, *labels);
  }
  if (probs) {
    entry.probs_path = stem + ".probs.f32";
    save_probs(dir / *entry.probs_path, *probs);
  }
  return entry;
}

LabelSequence labels_or_argmax(const LoadedRecord& r) {
  if (r.labels) return *r.labels;
  if (r.probs) return argmax_labels(*r.probs);
  throw FormatError("record '" + r.entry.record_id + "' has neither labels nor probabilities");
}

// Probability rows follow the same duration fix (BG one-hot padding) and
// nearest-index resampling as labels.
ProbabilityMap condition_probs(const ProbabilityMap& probs, std::uint32_t source_rate,
                               const PreprocessConfig& cfg) {
  const std::size_t c_count = probs.num_classes();
  const auto fixed_len = static_cast<std::size_t>(std::llround(cfg.seconds * source_rate));
  std::vector<double> fixed(fixed_len * c_count, 0.0);
  for (std::size_t t = 0; t < fixed_len; ++t) {
    if (t < probs.size()) {
      std::copy_n(probs.row(t).begin(), c_count, fixed.begin() + static_cast<std::ptrdiff_t>(t * c_count));
    } else {
      fixed[t * c_count + to_id(WaveClass::Background)] = 1.0;
    }
  }
  if (source_rate == cfg.target_rate) return ProbabilityMap(fixed_len, c_count, std::move(fixed));
  const auto out_len = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(fixed_len) * cfg.target_rate / source_rate)));
  std::vector<double> out(out_len * c_count);
  for (std::size_t k = 0; k < out_len; ++k) {
    const auto idx = std::min<std::size_t>(
        fixed_len - 1,
        static_cast<std::size_t>(std::llround(static_cast<double>(k) * source_rate / cfg.target_rate)));
    std::copy_n(fixed.begin() + static_cast<std::ptrdiff_t>(idx * c_count), c_count,
                out.begin() + static_cast<std::ptrdiff_t>(k * c_count));
  }
  return ProbabilityMap(out_len, c_count, std::move(out));
}

// ---------------------------------------------------------------------------

struct PreprocessArgs {
  std::string manifest, out;
  PreprocessConfig config;
};

int cmd_preprocess(const PreprocessArgs& a) {
  const Dataset ds = load_dataset(a.manifest);
  const fs::path out_dir = a.out;
  DatasetManifest out_manifest;
  for (const LoadedRecord& r : ds.records) {
    auto [rec, labels] = preprocess_pipeline(r.record, r.labels, a.config);
    std::optional<ProbabilityMap> probs;
    if (r.probs) probs = condition_probs(*r.probs, r.record.sample_rate, a.config);
    const std::string stem = safe_name(r.entry.record_id + "." + r.entry.lead_id);
    out_manifest.records.push_back(write_record(out_dir, stem, r.entry, rec,
                                                r.labels ? &labels : nullptr,
                                                probs ? &*probs : nullptr));
  }
  write_manifest(out_manifest, out_dir / "manifest.json");
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct FuseArgs {
  std::string manifest, out;
  std::string mode = "cardiomix";
  std::string criterion = "pattern";
  double tau = 0.8;
  std::size_t wmin = 250, wmax = 1250;
  std::size_t batch = 16;
  std::size_t steps = 1;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool literal_mean = false;
};

std::vector<std::size_t> sample_batch(std::size_t pool, std::size_t batch, Rng& rng) {
  std::vector<std::size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t take = std::min(batch, pool);
  for (std::size_t i = 0; i < take; ++i) {
    std::swap(idx[i], idx[rng.uniform_int(i, pool - 1)]);
  }
  idx.resize(take);
  return idx;
}

int cmd_fuse(const FuseArgs& a) {
  FusionParams params;
  params.window_min = a.wmin;
  params.window_max = a.wmax;
  params.tau = a.tau;
  params.criterion = parse_criterion(a.criterion);
  params.mode = parse_mode(a.mode);
  params.threads = a.threads;
  params.absent_rule = a.literal_mean ? AbsentClassRule::CountAsOne : AbsentClassRule::Exclude;
  if (a.batch < 1) throw ArgumentError("--batch must be >= 1");

  const Dataset ds = load_dataset(a.manifest);
  std::vector<LabeledSample> labeled;
  std::vector<UnlabeledSample> unlabeled;
  for (const LoadedRecord& r : ds.records) {
    if (r.entry.labeled) {
      labeled.push_back({r.record, *r.labels});
    } else {
      if (!r.probs) throw FormatError("unlabeled record '" + r.entry.record_id + "' has no probs_path");
      unlabeled.push_back({r.record, *r.probs});
    }
  }
  const bool needs_labeled = params.mode != FusionMode::Vanilla;
  if (needs_labeled && labeled.empty()) throw FormatError("manifest has no labeled records");
  if (unlabeled.empty()) throw FormatError("manifest has no unlabeled records");

  const fs::path out_dir = a.out;
  fs::create_directories(out_dir / "records");
  DatasetManifest out_manifest;
  std::ostringstream csv;
  csv << "step,direction,record_id,window,s_q,j_star,source_record_id,s_k_star,score,confidence,gated\n";

  for (std::size_t step = 0; step < a.steps; ++step) {
    Rng sampler = Rng::derive(a.seed, StreamTag::BatchSampling, step);
    std::vector<LabeledSample> lb;
    std::vector<UnlabeledSample> ub;
    if (needs_labeled) {
      for (std::size_t i : sample_batch(labeled.size(), a.batch, sampler)) lb.push_back(labeled[i]);
    }
    for (std::size_t i : sample_batch(unlabeled.size(), a.batch, sampler)) ub.push_back(unlabeled[i]);
    const std::uint64_t step_seed = sampler.next();

    const StepResult result = fuse_batch(lb, ub, params, step_seed);
    auto emit = [&](const FusionOutcome& o) {
      const bool to_labeled = o.direction == Direction::UnlabeledToLabeled;
      const EcgRecord& source = to_labeled ? ub[o.source_index].record
                                           : (o.direction == Direction::Vanilla
                                                  ? ub[o.source_index].record
                                                  : lb[o.source_index].record);
      csv << step << ',' << to_string(o.direction) << ',' << o.signal.record_id << ',' << o.window
          << ',' << o.query_start << ',' << o.source_index << ',' << source.record_id << ','
          << o.key_start << ',' << fmt_double(o.score) << ',' << fmt_optional(o.confidence) << ','
          << (to_labeled ? (o.applied ? "1" : "0") : "NA") << '\n';
      char stem_buf[64];
      std::snprintf(stem_buf, sizeof stem_buf, "step%04zu_%s_%03zu_", step, to_string(o.direction),
                    o.target_index);
      const std::string stem = "records/" + std::string(stem_buf) + safe_name(o.signal.record_id);
      ManifestEntry entry;
      entry.record_id = o.signal.record_id;
      entry.lead_id = o.signal.lead_id;
      entry.labeled = to_labeled;
      out_manifest.records.push_back(write_record(out_dir, stem, entry, o.signal, &o.labels, nullptr));
    };
    for (const auto& o : result.l2u) emit(o);
    for (const auto& o : result.u2l) emit(o);
  }
  write_text(out_dir / "outcomes.csv", csv.str());
  write_manifest(out_manifest, out_dir / "manifest.json");
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_consistency(const std::string& manifest, bool no_exemption) {
  const Dataset ds = load_dataset(manifest);
  if (ds.records.empty()) throw FormatError("manifest has no records");
  ConsistencyOptions opts;
  opts.exempt_first_wave = !no_exemption;
  std::vector<LabelSequence> batch;
  std::ostringstream csv;
  csv << "record_id,lead_id,violation_count,violating_t_runs,valid\n";
  for (const LoadedRecord& r : ds.records) {
    batch.push_back(labels_or_argmax(r));
    const auto violations = find_violations(batch.back(), opts);
    std::string runs;
    for (const auto& v : violations) {
      if (!runs.empty()) runs += ';';
      runs += std::to_string(v.start) + "-" + std::to_string(v.end);
    }
    csv << r.entry.record_id << ',' << r.entry.lead_id << ',' << violations.size() << ',' << runs
        << ',' << (violations.empty() ? 1 : 0) << '\n';
  }
  csv << "consistency_ratio,," << ",," << fmt_double(consistency_ratio(batch, opts)) << '\n';
  std::cout << csv.str();
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_evaluate(const std::string& pred_manifest, const std::string& gt_manifest, double tol_ms) {
  const Dataset preds = load_dataset(pred_manifest);
  const Dataset gts = load_dataset(gt_manifest);
  std::map<std::pair<std::string, std::string>, const LoadedRecord*> by_id;
  for (const auto& r : preds.records) by_id[{r.entry.record_id, r.entry.lead_id}] = &r;
  ConfusionMatrix cm;
  IntervalErrorAccumulator intervals(tol_ms);
  for (const auto& g : gts.records) {
    if (!g.labels) throw FormatError("ground-truth record '" + g.entry.record_id + "' has no labels");
    auto it = by_id.find({g.entry.record_id, g.entry.lead_id});
    if (it == by_id.end()) throw FormatError("no prediction for record '" + g.entry.record_id + "'");
    // A prediction record scores its probabilities when it has them.
    const LoadedRecord& p = *it->second;
    const LabelSequence pred = p.probs ? argmax_labels(*p.probs) : labels_or_argmax(p);
    if (pred.size() != g.labels->size()) {
      throw FormatError("record '" + g.entry.record_id + "': prediction length " +
                        std::to_string(pred.size()) + " != ground-truth length " +
                        std::to_string(g.labels->size()));
    }
    cm.add(pred, *g.labels);
    intervals.add(pred, *g.labels, g.record.sample_rate);
  }
  const IntervalErrors e = intervals.result();
  std::ostringstream csv;
  csv << "metric,value\n";
  const char* names[] = {"iou_bg", "iou_p", "iou_qrs", "iou_t"};
  for (std::size_t c = 0; c < kNumClasses; ++c) csv << names[c] << ',' << fmt_double(cm.iou(c)) << '\n';
  csv << "miou," << fmt_double(cm.miou()) << '\n';
  csv << "pr_mae_ms," << fmt_optional(e.pr_ms) << '\n';
  csv << "qrs_mae_ms," << fmt_optional(e.qrs_ms) << '\n';
  csv << "qt_mae_ms," << fmt_optional(e.qt_ms) << '\n';
  csv << "avg_mae_ms," << fmt_optional(e.average_ms) << '\n';
  csv << "matched_beats," << e.matched_beats << '\n';
  csv << "pred_beats," << e.pred_beats << '\n';
  csv << "gt_beats," << e.gt_beats << '\n';
  std::cout << csv.str();
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::size_t n = 8;
  double bpm = 60.0;
  std::optional<double> bpm_max;
  std::uint64_t seed = 0;
  double seconds = 10.0;
  std::uint32_t rate = 250;
  double noise = 0.02;
  std::optional<std::size_t> labeled;
};

int cmd_synth(const SynthArgs& a) {
  const double hi = a.bpm_max.value_or(a.bpm);
  if (hi < a.bpm) throw ArgumentError("--bpm-max must be >= --bpm");
  const std::size_t n_labeled = a.labeled.value_or(a.n);
  if (n_labeled > a.n) throw ArgumentError("--labeled exceeds --n");
  const fs::path out_dir = a.out;
  DatasetManifest manifest;
  for (std::size_t i = 0; i < a.n; ++i) {
    Rng rng = Rng::derive(a.seed, StreamTag::Synthesis, i + 1);
    SynthParams p;
    p.heart_rate_bpm = a.bpm + (hi - a.bpm) * rng.uniform01();
    p.phase = rng.uniform01();
    p.duration_s = a.seconds;
    p.sample_rate = a.rate;
    p.noise_std = a.noise;
    p.seed = rng.next();
    char id[32];
    std::snprintf(id, sizeof id, "synth_%04zu", i);
    p.record_id = id;
    auto [rec, labels] = synth_ecg(p);
    ManifestEntry entry;
    entry.record_id = id;
    entry.lead_id = "I";
    entry.labeled = i < n_labeled;
    manifest.records.push_back(write_record(out_dir, id, entry, rec, &labels, nullptr));
  }
  write_manifest(manifest, out_dir / "manifest.json");
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct CorruptArgs {
  std::string manifest, out;
  std::size_t jitter = 0;
  double flip = 0.0;
  double sharpness = 1.0;
  std::uint64_t seed = 0;
};

int cmd_corrupt(const CorruptArgs& a) {
  const Dataset ds = load_dataset(a.manifest);
  const fs::path out_dir = a.out;
  DatasetManifest manifest;
  CorruptionParams cp{a.jitter, a.flip, a.sharpness};
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const LoadedRecord& r = ds.records[i];
    if (!r.labels) throw FormatError("record '" + r.entry.record_id + "' has no labels to corrupt");
    Rng rng = Rng::derive(a.seed, StreamTag::Corruption, i);
    const ProbabilityMap probs = corrupt_labels(*r.labels, cp, rng);
    const std::string stem = safe_name(r.entry.record_id + "." + r.entry.lead_id);
    manifest.records.push_back(write_record(out_dir, stem, r.entry, r.record, &*r.labels, &probs));
  }
  write_manifest(manifest, out_dir / "manifest.json");
  return kExitOk;
}

// ---------------------------------------------------------------------------

LabelSequence random_labels(Rng& rng, std::size_t length) {
  // Runs of random class and length so that segments carry structure.
  std::vector<ClassId> v;
  v.reserve(length);
  while (v.size() < length) {
    const auto cls = static_cast<ClassId>(rng.uniform_int(0, kNumClasses - 1));
    const std::size_t run = rng.uniform_int(1, 12);
    for (std::size_t k = 0; k < run && v.size() < length; ++k) v.push_back(cls);
  }
  return LabelSequence(std::move(v));
}

int cmd_oracle_check(std::uint64_t seed, std::size_t trials) {
  std::size_t search_mismatch = 0, sliding_mismatch = 0, iou_mismatch = 0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng(mix64(seed) + trial);
    const std::size_t length = rng.uniform_int(1, 200);
    const std::size_t width = rng.uniform_int(1, std::min<std::size_t>(64, length));
    const std::size_t stride = rng.uniform_int(1, width);
    const std::size_t pool_size = rng.uniform_int(1, 4);
    std::vector<LabelSequence> pool;
    for (std::size_t j = 0; j < pool_size; ++j) pool.push_back(random_labels(rng, length));
    const LabelSequence query_seq = random_labels(rng, width);
    const auto query = query_seq.view();

    std::vector<const LabelSequence*> ptrs;
    for (const auto& p : pool) ptrs.push_back(&p);
    const KeyPool key_pool(ptrs);
    const KeyMatch got = search_best_key(query, {}, key_pool, stride, Criterion::Pattern,
                                         AbsentClassRule::Exclude);
    const oracle::NaiveMatch want = oracle::naive_search(query, pool, stride);
    if (got.source_index != want.source_index || got.key_start != want.key_start) ++search_mismatch;

    const WindowScan scan = enumerate_windows(length, width, stride);
    const auto scores = sliding_sim(query, pool[0], scan);
    const auto starts = oracle::naive_windows(length, width, stride);
    if (scan.starts != starts) {
      ++sliding_mismatch;
    } else {
      for (std::size_t k = 0; k < starts.size(); ++k) {
        const auto counts = oracle::naive_counts(query, pool[0].view().subspan(starts[k], width));
        bool same = true;
        for (std::size_t c = 0; c < kNumClasses; ++c) {
          same = same && scores[k].intersection(c) == counts.intersection[c] &&
                 scores[k].union_count(c) == counts.union_count[c];
          const auto iou = iou_class(query, pool[0].view().subspan(starts[k], width), static_cast<ClassId>(c));
          const bool absent = counts.union_count[c] == 0;
          if (absent != !iou.has_value() ||
              (iou && *iou != static_cast<double>(counts.intersection[c]) /
                                  static_cast<double>(counts.union_count[c]))) {
            ++iou_mismatch;
          }
        }
        if (!same) {
          ++sliding_mismatch;
          break;
        }
      }
    }
  }
  std::cout << "trials," << trials << "\nsearch_mismatches," << search_mismatch
            << "\nsliding_mismatches," << sliding_mismatch << "\niou_mismatches," << iou_mismatch
            << '\n';
  return search_mismatch + sliding_mismatch + iou_mismatch == 0 ? kExitOk : kExitOracle;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cardiomix: pattern-guided bidirectional CutMix for ECG delineation"};
  app.require_subcommand(1);
  unsigned threads = 1;
  app.add_option("--threads", threads, "Worker threads (results do not depend on this)")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();

  PreprocessArgs pre;
  auto* c_pre = app.add_subcommand("preprocess", "Duration fix, resample, band-pass and z-score every record");
  c_pre->add_option("--manifest", pre.manifest, "Input manifest")->required();
  c_pre->add_option("--out", pre.out, "Output directory")->required();
  c_pre->add_option("--rate", pre.config.target_rate, "Target sample rate (Hz)")
      ->check(CLI::Range(1u, 100000u))
      ->capture_default_str();
  c_pre->add_option("--lo", pre.config.lo_hz, "Band-pass low cutoff (Hz)")->capture_default_str();
  c_pre->add_option("--hi", pre.config.hi_hz, "Band-pass high cutoff (Hz)")->capture_default_str();
  c_pre->add_option("--seconds", pre.config.seconds, "Fixed duration (s)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  FuseArgs fuse;
  auto* c_fuse = app.add_subcommand("fuse", "Run CutMix fusion over sampled mini-batches");
  c_fuse->add_option("--manifest", fuse.manifest, "Input manifest (labeled + unlabeled with probs)")->required();
  c_fuse->add_option("--out", fuse.out, "Output directory")->required();
  c_fuse->add_option("--mode", fuse.mode, "Fusion mode")
      ->check(CLI::IsMember({"cardiomix", "l2u", "u2l", "vanilla"}))
      ->capture_default_str();
  c_fuse->add_option("--criterion", fuse.criterion, "Key selection criterion")
      ->check(CLI::IsMember({"pattern", "signal", "random"}))
      ->capture_default_str();
  c_fuse->add_option("--tau", fuse.tau, "U2L confidence threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  c_fuse->add_option("--wmin", fuse.wmin, "Minimum window width (samples)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_fuse->add_option("--wmax", fuse.wmax, "Maximum window width (samples)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_fuse->add_option("--batch", fuse.batch, "Mini-batch size per side")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_fuse->add_option("--steps", fuse.steps, "Number of mini-batch steps")->capture_default_str();
  c_fuse->add_option("--seed", fuse.seed, "Random seed")->capture_default_str();
  c_fuse->add_flag("--literal-mean", fuse.literal_mean,
                   "Average IoU over all classes, scoring classes absent from both segments as 1");

  std::string cons_manifest;
  bool no_exemption = false;
  auto* c_cons = app.add_subcommand("consistency", "Report T-without-QRS violations and the consistency ratio");
  c_cons->add_option("--manifest", cons_manifest, "Input manifest")->required();
  c_cons->add_flag("--no-start-exemption", no_exemption,
                   "Also flag a T wave that is the first wave of the record");

  std::string pred_manifest, gt_manifest;
  double tol_ms = 150.0;
  auto* c_eval = app.add_subcommand("evaluate", "mIoU and PR/QRS/QT interval MAE");
  c_eval->add_option("--pred-manifest", pred_manifest, "Predictions manifest (argmax of probs_path when present, else labels)")->required();
  c_eval->add_option("--gt-manifest", gt_manifest, "Ground-truth manifest")->required();
  c_eval->add_option("--match-tol-ms", tol_ms, "Beat matching tolerance (ms)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate synthetic labeled ECG records");
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_option("--n", synth.n, "Number of records")->check(CLI::PositiveNumber)->capture_default_str();
  c_synth->add_option("--bpm", synth.bpm, "Heart rate, or lower bound with --bpm-max")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_synth->add_option("--bpm-max", synth.bpm_max, "Upper heart-rate bound (uniform draw per record)");
  c_synth->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  c_synth->add_option("--seconds", synth.seconds, "Duration (s)")->check(CLI::PositiveNumber)->capture_default_str();
  c_synth->add_option("--rate", synth.rate, "Sample rate (Hz)")->check(CLI::Range(1u, 100000u))->capture_default_str();
  c_synth->add_option("--noise", synth.noise, "Additive white noise std")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  c_synth->add_option("--labeled", synth.labeled, "Mark only the first K records labeled (default: all)");

  CorruptArgs corrupt;
  auto* c_corrupt = app.add_subcommand("corrupt", "Simulate teacher probabilities from labels");
  c_corrupt->add_option("--manifest", corrupt.manifest, "Input manifest")->required();
  c_corrupt->add_option("--out", corrupt.out, "Output directory")->required();
  c_corrupt->add_option("--jitter", corrupt.jitter, "Boundary jitter (samples)")->capture_default_str();
  c_corrupt->add_option("--flip", corrupt.flip, "Per-timestep class flip rate")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  c_corrupt->add_option("--sharpness", corrupt.sharpness, "Probability on the emitted class")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  c_corrupt->add_option("--seed", corrupt.seed, "Random seed")->capture_default_str();

  std::uint64_t oracle_seed = 0;
  std::size_t trials = 1000;
  auto* c_oracle = app.add_subcommand("oracle-check", "Cross-check search and IoU against brute-force oracles");
  c_oracle->add_option("--seed", oracle_seed, "Random seed")->capture_default_str();
  c_oracle->add_option("--trials", trials, "Random instances")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitArgument;
  }

  try {
    if (*c_pre) return cmd_preprocess(pre);
    if (*c_fuse) {
      fuse.threads = threads;
      return cmd_fuse(fuse);
    }
    if (*c_cons) return cmd_consistency(cons_manifest, no_exemption);
    if (*c_eval) return cmd_evaluate(pred_manifest, gt_manifest, tol_ms);
    if (*c_synth) return cmd_synth(synth);
    if (*c_corrupt) return cmd_corrupt(corrupt);
    if (*c_oracle) return cmd_oracle_check(oracle_seed, trials);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitArgument;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitArgument;
}
