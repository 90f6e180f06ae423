// birdcall: command-line front end for the bird-call classification pipeline.
//
//   birdcall ingest   --root DIR [--seed N] [--split F]
//   birdcall vad-preview [FILES...]
//   birdcall extract  [--set SetK]
//   birdcall train    [--set SetK] [--epochs N] [--batch-size N] [--seed N]
//   birdcall evaluate [--model FILE]
//   birdcall predict  [--model FILE] FILES...
//
// Exit codes: 0 success, 1 user error, 2 data error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "birdcall/error.hpp"
#include "birdcall/pipeline.hpp"
#include "birdcall/tensor_archive.hpp"

namespace fs = std::filesystem;
using namespace birdcall;

namespace {

constexpr int kExitUser = 1;
constexpr int kExitData = 2;

struct Options {
  fs::path config_file;
  fs::path work_dir = ".";
  std::string log_level = "info";
  std::optional<std::size_t> workers;

  std::optional<std::string> root;
  std::optional<std::uint64_t> seed;
  std::optional<double> split;
  std::optional<std::string> set;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<double> lr_max;
  std::optional<fs::path> model;
  std::vector<fs::path> files;
};

RunConfig build_config(const Options& o) {
  RunConfig cfg;
  if (!o.config_file.empty()) cfg.load_file(o.config_file);
  cfg.apply_environment();
  if (o.workers) cfg.workers = *o.workers;
  if (o.root) cfg.dataset_root = *o.root;
  if (o.seed) cfg.seed = *o.seed;
  if (o.split) cfg.split = *o.split;
  if (o.set) cfg.feature_set = *o.set;
  if (o.epochs) cfg.schedule.total_epochs = *o.epochs;
  if (o.batch_size) cfg.train.batch_size = *o.batch_size;
  if (o.lr_max) cfg.schedule.lr_max = *o.lr_max;
  cfg.validate();
  return cfg;
}

fs::path manifest_path(const Options& o) { return o.work_dir / "manifest.json"; }
fs::path model_path(const Options& o) { return o.model ? *o.model : o.work_dir / "model.bcm"; }

int cmd_ingest(const Options& o) {
  const RunConfig cfg = build_config(o);
  const Manifest m = ingest(cfg);
  if (m.entries.empty()) throw InvalidArgument("no usable records under " + cfg.dataset_root.string());
  m.save(manifest_path(o));
  std::printf("%zu records, %zu classes, %zu train, %zu test, %zu failed -> %s\n", m.entries.size(),
              m.class_names.size(), m.subset("train").size(), m.subset("test").size(), m.failed.size(),
              manifest_path(o).string().c_str());
  return 0;
}

int cmd_vad_preview(const Options& o) {
  const RunConfig cfg = build_config(o);
  std::vector<std::pair<fs::path, fs::path>> jobs;  // audio, mask file
  if (!o.files.empty()) {
    for (const auto& f : o.files) jobs.emplace_back(f, o.work_dir / "masks" / (f.stem().string() + ".csv"));
  } else {
    const Manifest m = Manifest::load(manifest_path(o));
    for (const auto& e : m.entries) {
      const fs::path p = e.path;
      jobs.emplace_back(p, o.work_dir / "masks" / e.class_name / (p.stem().string() + ".csv"));
    }
  }
  std::size_t failures = 0;
  for (const auto& [audio, mask_file] : jobs) {
    try {
      const VadResult v = run_vad(audio, cfg);
      atomic_write(mask_file, format_mask(v.mask));
      std::printf("%s: %zu/%zu frames active, %.3f s of %.3f s%s\n", audio.string().c_str(), v.mask.active_count(),
                  v.mask.size(), v.active.duration_seconds(), v.raw.duration_seconds(),
                  v.fell_back ? " (raw fallback)" : "");
    } catch (const Error& ex) {
      ++failures;
      std::printf("%s: error: %s\n", audio.string().c_str(), ex.what());
    }
  }
  return failures == jobs.size() && !jobs.empty() ? kExitData : 0;
}

int cmd_extract(const Options& o) {
  const RunConfig cfg = build_config(o);
  const Manifest m = Manifest::load(manifest_path(o));
  const ExtractSummary s = extract_all(cfg, m);
  for (const auto& f : s.failed) std::printf("%s: error: %s\n", f.path.c_str(), f.reason.c_str());
  std::printf("%zu records: %zu cached, %zu extracted, %zu failed (cache: %s)\n", s.records, s.hits, s.misses,
              s.failed.size(), cfg.cache_dir.string().c_str());
  return s.failed.size() == s.records && s.records > 0 ? kExitData : 0;
}

int cmd_train(const Options& o) {
  const RunConfig cfg = build_config(o);
  const Manifest m = Manifest::load(manifest_path(o));
  const auto outcome = train_from_manifest(cfg, m, [](const EpochLog& e) {
    spdlog::info("epoch {:4d}  lr {:.4e}  loss {:.6f}  acc {:.4f}", e.epoch, e.learning_rate, e.loss,
                 e.train_accuracy);
  });
  save_model(model_path(o), outcome.model);
  atomic_write(o.work_dir / "epoch_log.csv", format_epoch_log(outcome.log));
  std::printf("model -> %s, epoch log -> %s\n", model_path(o).string().c_str(),
              (o.work_dir / "epoch_log.csv").string().c_str());
  return 0;
}

TrainedModel require_model(const Options& o) {
  const fs::path p = model_path(o);
  if (!fs::exists(p)) throw InvalidArgument("model file not found: " + p.string() + " (run train first)");
  return load_model(p);
}

int cmd_evaluate(const Options& o) {
  const RunConfig cfg = build_config(o);
  const TrainedModel model = require_model(o);
  const Manifest m = Manifest::load(manifest_path(o));
  const MetricsReport report = evaluate_from_manifest(cfg, m, model);
  atomic_write(o.work_dir / "report.txt", report.to_table());
  atomic_write(o.work_dir / "report.csv", report.to_csv());
  std::fputs(report.to_table().c_str(), stdout);
  return 0;
}

int cmd_predict(const Options& o) {
  const RunConfig cfg = build_config(o);
  const TrainedModel model = require_model(o);
  const auto results = predict_files(cfg, model, o.files);
  std::size_t failures = 0;
  for (const auto& r : results) {
    if (!r.prediction) {
      ++failures;
      std::printf("%s\terror\t%s\n", r.path.c_str(), r.error.c_str());
      continue;
    }
    std::printf("%s\t%s", r.path.c_str(), model.class_names[r.prediction->predicted_class].c_str());
    for (std::size_t c = 0; c < model.class_names.size(); ++c) {
      std::printf("\t%s=%.6f", model.class_names[c].c_str(), r.prediction->probabilities[c]);
    }
    std::printf("\n");
  }
  return failures == results.size() ? kExitData : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bird-call classification: VAD, short-term features, CNN-LSTM training and evaluation"};
  app.require_subcommand(1);
  Options o;
  app.add_option("-c,--config", o.config_file, "Flat 'key = value' config file")->check(CLI::ExistingFile);
  app.add_option("-w,--work-dir", o.work_dir, "Directory for manifest, model, logs and reports");
  app.add_option("--log-level", o.log_level, "trace, debug, info, warn, error or off");
  app.add_option("-j,--workers", o.workers, "Worker threads for per-record work (0: all cores)");

  auto* ingest_cmd = app.add_subcommand("ingest", "Scan root/<class>/*.wav and write a split manifest");
  ingest_cmd->add_option("--root", o.root, "Dataset root directory");
  ingest_cmd->add_option("--seed", o.seed, "Split seed");
  ingest_cmd->add_option("--split", o.split, "Training fraction per class");

  auto* vad_cmd = app.add_subcommand("vad-preview", "Write frame_index,active masks");
  vad_cmd->add_option("files", o.files, "WAV files (default: every manifest record)");

  auto* extract_cmd = app.add_subcommand("extract", "Extract and cache features for every manifest record");
  extract_cmd->add_option("--set", o.set, "Feature set Set1..Set5");

  auto* train_cmd = app.add_subcommand("train", "Train on the manifest's training split");
  train_cmd->add_option("--set", o.set, "Feature set Set1..Set5");
  train_cmd->add_option("--epochs", o.epochs, "Total epochs (a multiple of the cycle length)");
  train_cmd->add_option("--batch-size", o.batch_size, "Mini-batch size");
  train_cmd->add_option("--seed", o.seed, "Initialisation and shuffling seed");
  train_cmd->add_option("--lr-max", o.lr_max, "Peak learning rate of each cosine cycle");
  train_cmd->add_option("--model", o.model, "Output model file (default: <work-dir>/model.bcm)");

  auto* eval_cmd = app.add_subcommand("evaluate", "Score the model on the manifest's test split");
  eval_cmd->add_option("--model", o.model, "Model file (default: <work-dir>/model.bcm)");

  auto* predict_cmd = app.add_subcommand("predict", "Classify WAV files");
  predict_cmd->add_option("--model", o.model, "Model file (default: <work-dir>/model.bcm)");
  predict_cmd->add_option("files", o.files, "WAV files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUser;
  }

  const auto level = spdlog::level::from_str(o.log_level);
  spdlog::set_level(level);
  spdlog::set_default_logger(spdlog::stderr_logger_mt("birdcall"));
  spdlog::set_level(level);

  try {
    if (*ingest_cmd) return cmd_ingest(o);
    if (*vad_cmd) return cmd_vad_preview(o);
    if (*extract_cmd) return cmd_extract(o);
    if (*train_cmd) return cmd_train(o);
    if (*eval_cmd) return cmd_evaluate(o);
    if (*predict_cmd) return cmd_predict(o);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return e.kind() == Error::Kind::user ? kExitUser : kExitData;
  } catch (const fs::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return kExitUser;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitData;
  }
  return kExitUser;
}
