#include "birdcall/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "birdcall/error.hpp"
#include "birdcall/rng.hpp"
#include "birdcall/tensor_archive.hpp"
#include "birdcall/windowing.hpp"

namespace fs = std::filesystem;

namespace birdcall {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw InvalidArgument("config key '" + std::string(key) + "': not a number: '" + std::string(v) + "'");
  }
  return out;
}

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw InvalidArgument("config key '" + std::string(key) + "': not a non-negative integer: '" +
                          std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidArgument("config key '" + std::string(key) + "': not a boolean: '" + std::string(v) + "'");
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Key {
  std::string_view name;
  bool affects_features;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define BC_DOUBLE(NAME, FIELD, FEAT)                                                            \
  Key {                                                                                         \
    NAME, FEAT, [](RunConfig& c, std::string_view v) { c.FIELD = parse_double(NAME, v); },      \
        [](const RunConfig& c) { return fmt_double(c.FIELD); }                                  \
  }
#define BC_SIZE(NAME, FIELD, FEAT)                                                              \
  Key {                                                                                         \
    NAME, FEAT,                                                                                 \
        [](RunConfig& c, std::string_view v) {                                                  \
          c.FIELD = static_cast<decltype(c.FIELD)>(parse_uint(NAME, v));                        \
        },                                                                                      \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }                              \
  }
#define BC_BOOL(NAME, FIELD, FEAT)                                                              \
  Key {                                                                                         \
    NAME, FEAT, [](RunConfig& c, std::string_view v) { c.FIELD = parse_bool(NAME, v); },        \
        [](const RunConfig& c) { return std::string(c.FIELD ? "true" : "false"); }              \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      Key{"dataset_root", false, [](RunConfig& c, std::string_view v) { c.dataset_root = std::string(v); },
          [](const RunConfig& c) { return c.dataset_root.string(); }},
      Key{"feature_set", false, [](RunConfig& c, std::string_view v) { c.feature_set = std::string(v); },
          [](const RunConfig& c) { return c.feature_set; }},
      BC_DOUBLE("split", split, false),
      BC_SIZE("seed", seed, false),
      Key{"cache_dir", false, [](RunConfig& c, std::string_view v) { c.cache_dir = std::string(v); },
          [](const RunConfig& c) { return c.cache_dir.string(); }},
      BC_SIZE("workers", workers, false),
      BC_DOUBLE("window_ms", frame.window_ms, true),
      BC_DOUBLE("hop_ms", frame.hop_ms, true),
      BC_DOUBLE("vad_threshold", vad.global_threshold, true),
      BC_DOUBLE("vad_window_ms", vad.window_ms, true),
      BC_DOUBLE("vad_hop_ms", vad.hop_ms, true),
      BC_DOUBLE("vad_silence_floor", vad.silence_floor, true),
      BC_DOUBLE("vad_initial_threshold", vad.initial_adaptive_threshold, true),
      BC_DOUBLE("rolloff_threshold", features.rolloff_threshold, true),
      BC_DOUBLE("flux_norm", features.flux_norm, true),
      BC_SIZE("energy_entropy_subframes", features.energy_entropy_subframes, true),
      BC_SIZE("mfcc_kept", features.mfcc_kept, true),
      BC_DOUBLE("log_floor", features.log_floor, true),
      BC_SIZE("conv_kernels", arch.conv_kernels, false),
      BC_BOOL("use_projection", arch.use_projection, false),
      BC_SIZE("projection_dim", arch.projection_dim, false),
      BC_SIZE("lstm_units", arch.lstm_units, false),
      BC_SIZE("dense1_units", arch.dense1_units, false),
      BC_BOOL("share_cnn_weights", arch.share_cnn_weights, false),
      BC_DOUBLE("lr_max", schedule.lr_max, false),
      BC_DOUBLE("lr_min", schedule.lr_min, false),
      BC_SIZE("cycle_length", schedule.cycle_length, false),
      BC_SIZE("epochs", schedule.total_epochs, false),
      BC_SIZE("batch_size", train.batch_size, false),
      BC_SIZE("chunk_size", train.chunk_size, false),
      BC_DOUBLE("rmsprop_rho", train.rmsprop.rho, false),
      BC_DOUBLE("rmsprop_epsilon", train.rmsprop.epsilon, false),
  };
  return table;
}

#undef BC_DOUBLE
#undef BC_SIZE
#undef BC_BOOL

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::size_t worker_count(const RunConfig& cfg, std::size_t jobs) {
  std::size_t n = cfg.workers != 0 ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, jobs));
}


MonoSignal apply_vad(const MonoSignal& raw, const RunConfig& cfg, ActivityMask* mask_out, bool* fell_back,
                     const std::string& label) {
  ActivityMask mask = detect_active_frames(raw, cfg.vad);
  MonoSignal active = extract_active_signal(raw, mask);
  bool fallback = false;
  if (active.empty()) {
    spdlog::warn("{}: no active frames detected, using the raw signal", label);
    active = raw;
    fallback = true;
  }
  if (mask_out) *mask_out = std::move(mask);
  if (fell_back) *fell_back = fallback;
  return active;
}

FeatureMatrix extract_from_signal(const MonoSignal& raw, const RunConfig& cfg, const std::string& label) {
  const MonoSignal active = apply_vad(raw, cfg, nullptr, nullptr, label);
  return extract_features(active, cfg.frame, cfg.features, FeatureSet::named("Set5"));
}

constexpr std::string_view kCacheTag = "# birdcall-features";

std::string cache_tag_line(std::uint32_t source_crc, std::uint32_t config_crc) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s source=%08x config=%08x", kCacheTag.data(), source_crc, config_crc);
  return buf;
}

}  // namespace

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------- RunConfig

void RunConfig::set(std::string_view key, std::string_view value) {
  for (const auto& k : keys()) {
    if (k.name == key) {
      k.set(*this, trim(value));
      return;
    }
  }
  throw InvalidArgument("unknown config key '" + std::string(key) + "'");
}

void RunConfig::load_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
}

void RunConfig::apply_environment() {
  if (const char* dir = std::getenv(kCacheDirEnv.data()); dir != nullptr && *dir != '\0') cache_dir = dir;
}

void RunConfig::validate() const {
  if (!(split > 0.0 && split < 1.0)) throw InvalidArgument("split must lie strictly between 0 and 1");
  (void)FeatureSet::named(feature_set);
  if (frame.window_ms <= 0.0 || frame.hop_ms <= 0.0) throw InvalidArgument("window and hop must be positive");
  if (vad.window_ms <= 0.0 || vad.hop_ms <= 0.0) throw InvalidArgument("VAD window and hop must be positive");
  if (vad.global_threshold < 0.0 || vad.global_threshold > 1.0) {
    throw InvalidArgument("vad_threshold must lie in [0, 1]");
  }
  if (train.batch_size == 0) throw InvalidArgument("batch_size must be positive");
  if (train.chunk_size == 0) throw InvalidArgument("chunk_size must be positive");
  schedule.validate();
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(*this) + "\n";
  return out;
}

std::string RunConfig::feature_key() const {
  std::string out;
  for (const auto& k : keys()) {
    if (k.affects_features) out += std::string(k.name) + "=" + k.get(*this) + ";";
  }
  return out;
}

// ----------------------------------------------------------------- Manifest

std::vector<const ManifestEntry*> Manifest::subset(std::string_view split_name) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (e.split == split_name) out.push_back(&e);
  }
  return out;
}

nlohmann::json Manifest::to_json() const {
  nlohmann::json j;
  j["root"] = root;
  j["seed"] = seed;
  j["split"] = split;
  j["classes"] = class_names;
  j["records"] = nlohmann::json::array();
  for (const auto& e : entries) {
    j["records"].push_back({{"path", e.path},
                            {"class", e.class_name},
                            {"label", e.label},
                            {"split", e.split},
                            {"duration_s", e.duration},
                            {"active_duration_s", e.active_duration},
                            {"frames", e.frames}});
  }
  j["failed"] = nlohmann::json::array();
  for (const auto& f : failed) j["failed"].push_back({{"path", f.path}, {"reason", f.reason}});
  return j;
}

Manifest Manifest::from_json(const nlohmann::json& j) {
  try {
    Manifest m;
    m.root = j.at("root").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.split = j.at("split").get<double>();
    m.class_names = j.at("classes").get<std::vector<std::string>>();
    for (const auto& r : j.at("records")) {
      ManifestEntry e;
      e.path = r.at("path").get<std::string>();
      e.class_name = r.at("class").get<std::string>();
      e.label = r.at("label").get<int>();
      e.split = r.at("split").get<std::string>();
      e.duration = r.at("duration_s").get<double>();
      e.active_duration = r.at("active_duration_s").get<double>();
      e.frames = r.at("frames").get<std::size_t>();
      if (e.label < 0 || static_cast<std::size_t>(e.label) >= m.class_names.size()) {
        throw FormatError("manifest label out of range for " + e.path);
      }
      m.entries.push_back(std::move(e));
    }
    for (const auto& f : j.at("failed")) {
      m.failed.push_back({f.at("path").get<std::string>(), f.at("reason").get<std::string>()});
    }
    return m;
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("malformed manifest: ") + ex.what());
  }
}

void Manifest::save(const fs::path& path) const { atomic_write(path, to_json().dump(2) + "\n"); }

Manifest Manifest::load(const fs::path& path) {
  if (!fs::exists(path)) throw InvalidArgument("manifest not found: " + path.string() + " (run ingest first)");
  const auto bytes = read_bytes(path);
  const auto j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded()) throw FormatError("manifest is not valid JSON: " + path.string());
  return from_json(j);
}

std::size_t train_count(std::size_t n, double split) {
  return static_cast<std::size_t>(std::floor(split * static_cast<double>(n) + 0.5));
}

Manifest ingest(const RunConfig& cfg) {
  cfg.validate();
  const fs::path root = cfg.dataset_root.empty() ? fs::path{} : fs::absolute(cfg.dataset_root).lexically_normal();
  if (root.empty() || !fs::is_directory(root)) {
    throw InvalidArgument("dataset root is not a directory: '" + root.string() + "'");
  }
  std::vector<fs::path> class_dirs;
  for (const auto& d : fs::directory_iterator(root)) {
    if (d.is_directory()) class_dirs.push_back(d.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());

  Manifest m;
  m.root = root.string();
  m.seed = cfg.seed;
  m.split = cfg.split;

  struct Pending {
    fs::path path;
    std::string class_name;
  };
  std::vector<Pending> pending;
  for (const auto& dir : class_dirs) {
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(dir)) {
      if (f.is_regular_file() && lower(f.path().extension().string()) == ".wav") files.push_back(f.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      spdlog::warn("class directory {} holds no WAV files; excluded", dir.string());
      continue;
    }
    for (auto& f : files) pending.push_back({std::move(f), dir.filename().string()});
  }

  std::vector<std::optional<ManifestEntry>> results(pending.size());
  std::vector<std::string> reasons(pending.size());
  parallel_for(pending.size(), worker_count(cfg, pending.size()), [&](std::size_t i) {
    const auto& p = pending[i];
    try {
      const VadResult v = run_vad(p.path, cfg);
      ManifestEntry e;
      e.path = p.path.string();
      e.class_name = p.class_name;
      e.duration = v.raw.duration_seconds();
      e.active_duration = v.active.duration_seconds();
      e.frames = frame_signal(v.active, cfg.frame).size();
      results[i] = std::move(e);
    } catch (const std::exception& ex) {
      reasons[i] = ex.what();
    }
  });

  std::map<std::string, std::vector<ManifestEntry>> by_class;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    if (results[i]) {
      by_class[pending[i].class_name].push_back(std::move(*results[i]));
    } else {
      spdlog::warn("skipping {}: {}", pending[i].path.string(), reasons[i]);
      m.failed.push_back({pending[i].path.string(), reasons[i]});
    }
  }
  for (const auto& dir : class_dirs) {
    const auto name = dir.filename().string();
    const auto it = by_class.find(name);
    if (it == by_class.end()) {
      if (std::any_of(pending.begin(), pending.end(), [&](const Pending& p) { return p.class_name == name; })) {
        spdlog::warn("class {} has no readable records; excluded", name);
      }
      continue;
    }
    m.class_names.push_back(name);
  }

  Rng rng(cfg.seed);
  for (std::size_t label = 0; label < m.class_names.size(); ++label) {
    auto& records = by_class[m.class_names[label]];
    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order.begin(), order.end());
    const std::size_t n_train = train_count(records.size(), cfg.split);
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      records[order[rank]].split = rank < n_train ? "train" : "test";
    }
    for (auto& r : records) {
      r.label = static_cast<int>(label);
      m.entries.push_back(std::move(r));
    }
  }
  spdlog::info("ingested {} records in {} classes ({} failed)", m.entries.size(), m.class_names.size(),
               m.failed.size());
  return m;
}

// ---------------------------------------------------------------------- VAD

VadResult run_vad(const fs::path& path, const RunConfig& cfg) {
  VadResult r;
  r.raw = load_mono(path);
  r.active = apply_vad(r.raw, cfg, &r.mask, &r.fell_back, path.string());
  return r;
}

std::string format_mask(const ActivityMask& mask) {
  std::string out = "frame_index,active\n";
  for (std::size_t i = 0; i < mask.size(); ++i) {
    out += std::to_string(i) + (mask.active[i] ? ",1\n" : ",0\n");
  }
  return out;
}

// -------------------------------------------------------------------- Cache

FeatureCache::FeatureCache(const RunConfig& cfg) : cfg_(cfg) {
  const auto key = cfg.feature_key();
  config_crc_ = crc32_of(std::span(reinterpret_cast<const std::uint8_t*>(key.data()), key.size()));
}

fs::path FeatureCache::entry_path(const fs::path& audio, std::uint32_t source_crc) const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "-%08x-%08x.csv", source_crc, config_crc_);
  return cfg_.cache_dir / (audio.stem().string() + buf);
}

FeatureMatrix FeatureCache::load_or_extract(const fs::path& audio) {
  const auto bytes = read_bytes(audio);
  const std::uint32_t source_crc = crc32_of(bytes);
  const fs::path entry = entry_path(audio, source_crc);
  const std::string tag = cache_tag_line(source_crc, config_crc_);

  if (fs::exists(entry)) {
    std::ifstream in(entry);
    std::string first;
    std::getline(in, first);
    if (first == tag) {
      try {
        FeatureMatrix m = read_feature_csv(in);
        ++hits_;
        spdlog::info("feature cache hit: {}", audio.string());
        return m;
      } catch (const Error& ex) {
        spdlog::warn("feature cache entry {} unreadable ({}); recomputing", entry.string(), ex.what());
      }
    } else {
      spdlog::warn("feature cache entry {} is stale; recomputing", entry.string());
    }
  }

  ++misses_;
  spdlog::info("feature cache miss: {}", audio.string());
  const MonoSignal raw = to_mono_normalized(decode_wav(bytes));
  const FeatureMatrix fresh = extract_from_signal(raw, cfg_, audio.string());
  std::ostringstream os;
  os << tag << '\n';
  write_feature_csv(os, fresh);
  const std::string text = os.str();
  atomic_write(entry, text);

  // Hand back what a later cache hit would see.
  std::istringstream is(text);
  std::string skip;
  std::getline(is, skip);
  return read_feature_csv(is);
}

FeatureMatrix extract_record(const fs::path& audio, const RunConfig& cfg) {
  return extract_from_signal(load_mono(audio), cfg, audio.string());
}

FeatureMatrix select_features(const FeatureMatrix& all, const FeatureSet& set) {
  const auto names = set.member_names();
  std::vector<std::size_t> cols;
  for (const auto& n : names) {
    const auto it = std::find(all.feature_names.begin(), all.feature_names.end(), n);
    if (it == all.feature_names.end()) throw FeatureSetMismatch("feature '" + n + "' missing from matrix");
    cols.push_back(static_cast<std::size_t>(it - all.feature_names.begin()));
  }
  FeatureMatrix out;
  out.feature_names = names;
  out.frames = all.frames;
  out.window_len = all.window_len;
  out.hop_len = all.hop_len;
  out.sample_rate = all.sample_rate;
  out.values.reserve(all.frames * cols.size());
  for (std::size_t t = 0; t < all.frames; ++t) {
    for (auto c : cols) out.values.push_back(all.at(t, c));
  }
  return out;
}

namespace {

struct LoadedRecord {
  std::optional<FeatureMatrix> features;
  std::string error;
};

std::vector<LoadedRecord> load_many(const RunConfig& cfg, const std::vector<std::string>& paths,
                                    FeatureCache& cache) {
  std::vector<LoadedRecord> out(paths.size());
  std::mutex cache_mutex;
  parallel_for(paths.size(), worker_count(cfg, paths.size()), [&](std::size_t i) {
    try {
      // The cache object only counts; extraction itself runs unlocked.
      FeatureCache local(cfg);
      out[i].features = local.load_or_extract(paths[i]);
      std::lock_guard lock(cache_mutex);
      cache.merge_counts(local);
    } catch (const std::exception& ex) {
      out[i].error = ex.what();
    }
  });
  return out;
}

}  // namespace

ExtractSummary extract_all(const RunConfig& cfg, const Manifest& manifest) {
  cfg.validate();
  FeatureCache cache(cfg);
  std::vector<std::string> paths;
  for (const auto& e : manifest.entries) paths.push_back(e.path);
  const auto loaded = load_many(cfg, paths, cache);
  ExtractSummary s;
  s.records = paths.size();
  s.hits = cache.hits();
  s.misses = cache.misses();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!loaded[i].features) s.failed.push_back({paths[i], loaded[i].error});
  }
  return s;
}

std::vector<LabeledRecord> load_split(const RunConfig& cfg, const Manifest& manifest, std::string_view split_name) {
  const FeatureSet set = FeatureSet::named(cfg.feature_set);
  FeatureCache cache(cfg);
  const auto entries = manifest.subset(split_name);
  std::vector<std::string> paths;
  for (const auto* e : entries) paths.push_back(e->path);
  auto loaded = load_many(cfg, paths, cache);
  std::vector<LabeledRecord> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!loaded[i].features) {
      spdlog::warn("skipping {}: {}", paths[i], loaded[i].error);
      continue;
    }
    out.push_back({paths[i], entries[i]->label, select_features(*loaded[i].features, set)});
  }
  spdlog::info("{} split: {} records ({} cached, {} extracted)", split_name, out.size(), cache.hits(),
               cache.misses());
  return out;
}

TrainOutcome train_from_manifest(const RunConfig& cfg, const Manifest& manifest, const EpochCallback& on_epoch) {
  cfg.validate();
  if (manifest.class_names.size() < 2) throw InvalidArgument("training needs at least two classes");
  const FeatureSet set = FeatureSet::named(cfg.feature_set);
  const auto records = load_split(cfg, manifest, "train");
  if (records.empty()) throw InvalidArgument("no usable training records");
  const auto dataset = build_dataset(records);

  ArchConfig arch = cfg.arch;
  arch.class_count = manifest.class_names.size();
  arch.feature_count = set.size();
  arch.validate();

  TrainOutcome out;
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  TrainResult r = train(dataset, arch, cfg.schedule, tc, on_epoch);
  out.model.arch = arch;
  out.model.params = std::move(r.params);
  out.model.feature_set = set.name();
  out.model.class_names = manifest.class_names;
  out.log = std::move(r.log);
  return out;
}

MetricsReport evaluate_from_manifest(const RunConfig& cfg, const Manifest& manifest, const TrainedModel& model) {
  if (model.class_names != manifest.class_names) {
    throw InvalidArgument("model classes do not match the manifest classes");
  }
  RunConfig local = cfg;
  local.feature_set = model.feature_set;
  const auto records = load_split(local, manifest, "test");
  return evaluate(model, records);
}

std::vector<PredictOutcome> predict_files(const RunConfig& cfg, const TrainedModel& model,
                                          const std::vector<fs::path>& files) {
  const FeatureSet set = FeatureSet::named(model.feature_set);
  std::vector<PredictOutcome> out(files.size());
  parallel_for(files.size(), worker_count(cfg, files.size()), [&](std::size_t i) {
    out[i].path = files[i].string();
    try {
      out[i].prediction = model.predict(select_features(extract_record(files[i], cfg), set));
    } catch (const std::exception& ex) {
      out[i].error = ex.what();
    }
  });
  return out;
}

}  // namespace birdcall
