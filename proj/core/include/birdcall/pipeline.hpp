#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "birdcall/audio_io.hpp"
#include "birdcall/evaluation.hpp"
#include "birdcall/features.hpp"
#include "birdcall/model_io.hpp"
#include "birdcall/network.hpp"
#include "birdcall/optimizer.hpp"
#include "birdcall/training.hpp"
#include "birdcall/vad.hpp"

namespace birdcall {

inline constexpr std::string_view kCacheDirEnv = "BIRDCALL_CACHE_DIR";

struct RunConfig {
  std::filesystem::path dataset_root;
  std::string feature_set = "Set3";
  double split = 0.8;
  std::uint64_t seed = 0;
  std::filesystem::path cache_dir = ".birdcall-cache";
  std::size_t workers = 0;  // 0: hardware concurrency

  FrameConfig frame{};
  VadConfig vad{};
  FeatureConfig features{};
  ArchConfig arch{};  // class_count and feature_count are filled in at train time
  SchedulerConfig schedule{};
  TrainConfig train{};

  // Assigns one `key = value` entry; unknown keys and bad values throw InvalidArgument.
  void set(std::string_view key, std::string_view value);
  // Applies every entry of a flat `key = value` file. `#` starts a comment.
  void load_file(const std::filesystem::path& path);
  // Cache directory from the environment when set.
  void apply_environment();
  void validate() const;
  std::string to_text() const;

  // Canonical text of every setting that changes extracted features.
  std::string feature_key() const;
};

struct ManifestEntry {
  std::string path;
  std::string class_name;
  int label = 0;
  std::string split;  // "train" or "test"
  double duration = 0.0;
  double active_duration = 0.0;
  std::size_t frames = 0;
};

struct FailedEntry {
  std::string path;
  std::string reason;
};

struct Manifest {
  std::string root;
  std::uint64_t seed = 0;
  double split = 0.8;
  std::vector<std::string> class_names;
  std::vector<ManifestEntry> entries;
  std::vector<FailedEntry> failed;

  std::vector<const ManifestEntry*> subset(std::string_view split_name) const;

  nlohmann::json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Manifest load(const std::filesystem::path& path);
};

// Runs fn(i) for i in [0, n) on at most `workers` threads. Results must be
// written to per-index slots so that the outcome does not depend on
// scheduling. The first exception is rethrown after all threads finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

// Per-class train counts: round-half-up of split * n.
std::size_t train_count(std::size_t n, double split);

// root/<class>/*.wav, path-sorted, stratified seeded split.
Manifest ingest(const RunConfig& cfg);

// VAD output for one record, falling back to the raw signal when nothing is active.
struct VadResult {
  MonoSignal raw;
  ActivityMask mask;
  MonoSignal active;
  bool fell_back = false;
};
VadResult run_vad(const std::filesystem::path& path, const RunConfig& cfg);

// Mask file: `frame_index,active` rows under a header.
std::string format_mask(const ActivityMask& mask);

// Feature cache. Files hold all 34 features; sets are selected on load.
class FeatureCache {
 public:
  explicit FeatureCache(const RunConfig& cfg);

  // Reads a valid cache entry or extracts and stores one. Either way the
  // values come from the parsed cache text, so cold and warm runs agree.
  FeatureMatrix load_or_extract(const std::filesystem::path& audio);
  std::filesystem::path entry_path(const std::filesystem::path& audio,
                                   std::uint32_t source_crc) const;

  std::size_t hits() const noexcept { return hits_; }
  std::size_t misses() const noexcept { return misses_; }
  void merge_counts(const FeatureCache& other) noexcept {
    hits_ += other.hits_;
    misses_ += other.misses_;
  }

 private:
  const RunConfig& cfg_;
  std::uint32_t config_crc_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

FeatureMatrix extract_record(const std::filesystem::path& audio, const RunConfig& cfg);
FeatureMatrix select_features(const FeatureMatrix& all, const FeatureSet& set);

struct ExtractSummary {
  std::size_t records = 0;
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::vector<FailedEntry> failed;
};
ExtractSummary extract_all(const RunConfig& cfg, const Manifest& manifest);

// Labeled feature matrices of one split, in manifest order. Records that
// cannot be processed are skipped with a warning.
std::vector<LabeledRecord> load_split(const RunConfig& cfg, const Manifest& manifest,
                                      std::string_view split_name);

struct TrainOutcome {
  TrainedModel model;
  std::vector<EpochLog> log;
};
TrainOutcome train_from_manifest(const RunConfig& cfg, const Manifest& manifest,
                                 const EpochCallback& on_epoch = {});

MetricsReport evaluate_from_manifest(const RunConfig& cfg, const Manifest& manifest,
                                     const TrainedModel& model);

struct PredictOutcome {
  std::string path;
  std::optional<RecordPrediction> prediction;
  std::string error;
};
std::vector<PredictOutcome> predict_files(const RunConfig& cfg, const TrainedModel& model,
                                          const std::vector<std::filesystem::path>& files);

}  // namespace birdcall
