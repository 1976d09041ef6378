#pragma once

// On-disk dataset layout. See docs/FORMAT.md for the byte-level description.
//
//   signal       little-endian float32, raw, T values
//   labels       CSV `start,end_exclusive,class_id` with header, runs tiling [0, T)
//   probabilities little-endian float32, row-major T x C
//   manifest     JSON document with `format_version` and a `records` list;
//                paths are relative to the manifest's directory

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cardiomix/signal_core.hpp"

namespace cardiomix {

inline constexpr int kManifestVersion = 1;

enum class Split { Train, Val, Test };

const char* to_string(Split s) noexcept;
Split parse_split(std::string_view s);

struct ManifestEntry {
  std::string record_id;
  std::string lead_id;
  std::uint32_t sample_rate = 250;
  std::string signal_path;
  std::optional<std::string> labels_path;
  std::optional<std::string> probs_path;
  Split split = Split::Train;
  bool labeled = false;
};

struct DatasetManifest {
  int format_version = kManifestVersion;
  std::vector<ManifestEntry> records;
};

DatasetManifest parse_manifest(const std::string& text);
std::string serialize_manifest(const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

void save_signal(const std::filesystem::path& path, const EcgRecord& record);
/// Samples only; identity fields come from the caller (usually the manifest).
std::vector<double> load_signal(const std::filesystem::path& path);

void save_labels(const std::filesystem::path& path, const LabelSequence& labels);
LabelSequence load_labels(const std::filesystem::path& path);
std::string format_label_runs(const LabelSequence& labels);
LabelSequence parse_label_runs(const std::string& text, const std::string& source = "labels");

void save_probs(const std::filesystem::path& path, const ProbabilityMap& probs);
ProbabilityMap load_probs(const std::filesystem::path& path, std::size_t num_classes = kNumClasses);

struct RecordPaths {
  std::filesystem::path signal;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> probs;
};

struct LoadedRecord {
  ManifestEntry entry;
  EcgRecord record;
  std::optional<LabelSequence> labels;
  std::optional<ProbabilityMap> probs;
};

void save_record(const RecordPaths& paths, const LoadedRecord& record);
/// Loads the files named by `paths`; identity fields are taken from `entry`.
LoadedRecord load_record(const RecordPaths& paths, const ManifestEntry& entry);

struct Dataset {
  DatasetManifest manifest;
  std::filesystem::path base_dir;
  std::vector<LoadedRecord> records;
};

/// Loads and validates every record. Errors name the offending record id.
Dataset load_dataset(const std::filesystem::path& manifest_path);

}  // namespace cardiomix
