#include "cardiomix/io_formats.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

namespace cardiomix {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("short write to '" + path.string() + "'");
}

void append_f32(std::string& out, double value) {
  auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(value));
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

std::vector<double> decode_f32(const std::string& bytes, const fs::path& path) {
  if (bytes.size() % 4 != 0) {
    throw FormatError("'" + path.string() + "': size " + std::to_string(bytes.size()) +
                      " is not a multiple of 4 bytes");
  }
  std::vector<double> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
    }
    out[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return out;
}

}  // namespace

const char* to_string(Split s) noexcept {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw FormatError("unknown split '" + std::string(s) + "'");
}

DatasetManifest parse_manifest(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
  }
  DatasetManifest m;
  try {
    m.format_version = doc.at("format_version").get<int>();
    if (m.format_version != kManifestVersion) {
      throw FormatError("unsupported manifest format_version " + std::to_string(m.format_version));
    }
    for (const auto& r : doc.at("records")) {
      ManifestEntry e;
      e.record_id = r.at("record_id").get<std::string>();
      try {
        e.lead_id = r.value("lead_id", std::string("I"));
        e.sample_rate = r.at("sample_rate").get<std::uint32_t>();
        e.signal_path = r.at("signal_path").get<std::string>();
        if (r.contains("labels_path")) e.labels_path = r.at("labels_path").get<std::string>();
        if (r.contains("probs_path")) e.probs_path = r.at("probs_path").get<std::string>();
        e.split = parse_split(r.value("split", std::string("train")));
        e.labeled = r.at("labeled").get<bool>();
      } catch (const nlohmann::json::exception& ex) {
        throw FormatError("record '" + e.record_id + "': " + ex.what());
      }
      if (e.sample_rate == 0) throw FormatError("record '" + e.record_id + "': sample_rate is 0");
      if (e.labeled && !e.labels_path) {
        throw FormatError("record '" + e.record_id + "': labeled record has no labels_path");
      }
      m.records.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("malformed manifest: ") + ex.what());
  }
  return m;
}

std::string serialize_manifest(const DatasetManifest& manifest) {
  ordered_json doc;
  doc["format_version"] = manifest.format_version;
  doc["records"] = ordered_json::array();
  for (const auto& e : manifest.records) {
    ordered_json r;
    r["record_id"] = e.record_id;
    r["lead_id"] = e.lead_id;
    r["sample_rate"] = e.sample_rate;
    r["signal_path"] = e.signal_path;
    if (e.labels_path) r["labels_path"] = *e.labels_path;
    if (e.probs_path) r["probs_path"] = *e.probs_path;
    r["split"] = to_string(e.split);
    r["labeled"] = e.labeled;
    doc["records"].push_back(std::move(r));
  }
  return doc.dump(2) + "\n";
}

DatasetManifest read_manifest(const fs::path& path) { return parse_manifest(read_file(path)); }

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  write_file(path, serialize_manifest(manifest));
}

void save_signal(const fs::path& path, const EcgRecord& record) {
  std::string bytes;
  bytes.reserve(record.samples.size() * 4);
  for (double v : record.samples) append_f32(bytes, v);
  write_file(path, bytes);
}

std::vector<double> load_signal(const fs::path& path) { return decode_f32(read_file(path), path); }

std::string format_label_runs(const LabelSequence& labels) {
  std::string out = "start,end_exclusive,class_id\n";
  for (const LabelRun& r : to_runs(labels)) {
    out += std::to_string(r.start) + "," + std::to_string(r.end) + "," +
           std::to_string(int(r.cls)) + "\n";
  }
  return out;
}

LabelSequence parse_label_runs(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(source + ": empty labels file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "start,end_exclusive,class_id") {
    throw FormatError(source + ": expected header 'start,end_exclusive,class_id'");
  }
  LabelRuns runs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    unsigned long long s = 0, e = 0;
    unsigned cls = 0;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%llu,%llu,%u%c", &s, &e, &cls, &tail) != 3) {
      throw FormatError(source + ": run " + std::to_string(runs.size()) + " (line " +
                        std::to_string(line_no) + ") is malformed");
    }
    if (cls > 255) {
      throw FormatError(source + ": run " + std::to_string(runs.size()) + " has class id " +
                        std::to_string(cls));
    }
    runs.push_back({static_cast<std::size_t>(s), static_cast<std::size_t>(e),
                    static_cast<ClassId>(cls)});
  }
  if (runs.empty()) throw FormatError(source + ": empty sequence (no runs)");
  try {
    return to_dense(runs, runs.back().end);
  } catch (const FormatError& e) {
    throw FormatError(source + ": " + e.what());
  }
}

void save_labels(const fs::path& path, const LabelSequence& labels) {
  write_file(path, format_label_runs(labels));
}

LabelSequence load_labels(const fs::path& path) {
  return parse_label_runs(read_file(path), "'" + path.string() + "'");
}

void save_probs(const fs::path& path, const ProbabilityMap& probs) {
  std::string bytes;
  bytes.reserve(probs.values().size() * 4);
  for (double v : probs.values()) append_f32(bytes, v);
  write_file(path, bytes);
}

ProbabilityMap load_probs(const fs::path& path, std::size_t num_classes) {
  const std::string bytes = read_file(path);
  if (bytes.size() % (4 * num_classes) != 0) {
    throw FormatError("'" + path.string() + "': size " + std::to_string(bytes.size()) +
                      " is not a multiple of " + std::to_string(4 * num_classes) +
                      " bytes (float32 x " + std::to_string(num_classes) + " classes)");
  }
  auto values = decode_f32(bytes, path);
  const std::size_t length = values.size() / num_classes;
  return ProbabilityMap(length, num_classes, std::move(values));
}

void save_record(const RecordPaths& paths, const LoadedRecord& record) {
  save_signal(paths.signal, record.record);
  if (paths.labels && record.labels) save_labels(*paths.labels, *record.labels);
  if (paths.probs && record.probs) save_probs(*paths.probs, *record.probs);
}

LoadedRecord load_record(const RecordPaths& paths, const ManifestEntry& entry) {
  LoadedRecord out;
  out.entry = entry;
  try {
    out.record = {entry.record_id, entry.lead_id, entry.sample_rate, load_signal(paths.signal)};
    out.record.validate();
    if (paths.labels) {
      out.labels = load_labels(*paths.labels);
      if (out.labels->size() != out.record.size()) {
        throw FormatError("label length " + std::to_string(out.labels->size()) +
                          " != signal length " + std::to_string(out.record.size()));
      }
    }
    if (paths.probs) {
      out.probs = load_probs(*paths.probs);
      if (out.probs->size() != out.record.size()) {
        throw FormatError("probability length " + std::to_string(out.probs->size()) +
                          " != signal length " + std::to_string(out.record.size()));
      }
      out.probs->validate();
    }
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    if (msg.find("'" + entry.record_id + "'") != std::string::npos) throw;
    throw FormatError("record '" + entry.record_id + "': " + msg);
  }
  return out;
}

Dataset load_dataset(const fs::path& manifest_path) {
  Dataset ds;
  ds.manifest = read_manifest(manifest_path);
  ds.base_dir = manifest_path.parent_path();
  for (const auto& entry : ds.manifest.records) {
    RecordPaths paths{ds.base_dir / entry.signal_path, std::nullopt, std::nullopt};
    if (entry.labels_path) paths.labels = ds.base_dir / *entry.labels_path;
    if (entry.probs_path) paths.probs = ds.base_dir / *entry.probs_path;
    ds.records.push_back(load_record(paths, entry));
  }
  return ds;
}

}  // namespace cardiomix
