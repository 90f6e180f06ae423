#include "birdcall/model_io.hpp"

#include "birdcall/error.hpp"

namespace birdcall {
namespace {
constexpr const char* kModelKind = "birdcall.model";
constexpr const char* kSegmentKind = "birdcall.segments";
}  // namespace

void TrainedModel::check_features(const FeatureMatrix& features) const {
  const auto expected = FeatureSet::named(feature_set).member_names();
  if (features.feature_names != expected) {
    throw FeatureSetMismatch("model was trained on " + feature_set + " (" + std::to_string(expected.size()) +
                             " features) but received " + std::to_string(features.features()) +
                             " feature columns");
  }
}

RecordPrediction TrainedModel::predict(const FeatureMatrix& features) const {
  check_features(features);
  const auto segments = record_samples(features, "", 0);
  return predict_record(params, arch, segments);
}

Archive to_archive(const TrainedModel& model) {
  Archive a;
  a.kind = kModelKind;
  a.metadata["arch"] = model.arch.to_json();
  a.metadata["feature_set"] = model.feature_set;
  a.metadata["class_names"] = model.class_names;
  a.arrays = model.params.tensors;
  return a;
}

TrainedModel from_archive(const Archive& archive) {
  if (archive.kind != kModelKind) throw FormatError("archive is a '" + archive.kind + "', not a model");
  TrainedModel m;
  try {
    m.arch = ArchConfig::from_json(archive.metadata.at("arch"));
    m.feature_set = archive.metadata.at("feature_set").get<std::string>();
    m.class_names = archive.metadata.at("class_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model metadata is incomplete: ") + e.what());
  }
  const auto set = FeatureSet::named(m.feature_set);
  if (set.size() != m.arch.feature_count) throw ShapeError("model feature count disagrees with its feature set");
  if (m.class_names.size() != m.arch.class_count) throw ShapeError("model class names disagree with its class count");

  const auto shapes = ModelParams::shapes(m.arch);
  const auto& names = ModelParams::names();
  for (std::size_t i = 0; i < kParamCount; ++i) {
    const auto* t = archive.find(names[i]);
    if (!t) throw FormatError("model is missing tensor " + names[i]);
    if (t->shape != shapes[i]) throw ShapeError("tensor " + names[i] + " does not match the stored architecture");
    m.params.tensors.push_back(*t);
  }
  return m;
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  write_archive(path, to_archive(model));
}

TrainedModel load_model(const std::filesystem::path& path) { return from_archive(read_archive(path)); }

TrainedModel load_model(const std::filesystem::path& path, const ArchConfig& expected) {
  auto m = load_model(path);
  if (!(m.arch == expected)) throw ShapeError("stored architecture differs from the requested one");
  return m;
}

Archive segments_to_archive(const std::vector<Sample>& segments, const std::vector<std::string>& feature_names) {
  Archive a;
  a.kind = kSegmentKind;
  a.metadata["feature_names"] = feature_names;
  if (segments.empty()) return a;
  const auto& first = segments.front();
  a.metadata["record_id"] = first.record_id;
  a.metadata["label"] = first.label;
  NamedArray images{"images", {segments.size(), first.image_count, first.rows, first.cols}, {}};
  images.data.reserve(images.element_count());
  for (const auto& s : segments) {
    if (s.image_count != first.image_count || s.rows != first.rows || s.cols != first.cols) {
      throw ShapeError("segments of one record differ in shape");
    }
    images.data.insert(images.data.end(), s.pixels.begin(), s.pixels.end());
  }
  a.arrays.push_back(std::move(images));
  return a;
}

std::vector<Sample> segments_from_archive(const Archive& archive) {
  if (archive.kind != kSegmentKind) throw FormatError("archive is a '" + archive.kind + "', not a segment cache");
  std::vector<Sample> out;
  const auto* images = archive.find("images");
  if (!images) return out;
  if (images->shape.size() != 4) throw ShapeError("segment array must be 4-dimensional");
  const std::size_t per = images->shape[1] * images->shape[2] * images->shape[3];
  for (std::size_t s = 0; s < images->shape[0]; ++s) {
    Sample sample;
    sample.record_id = archive.metadata.at("record_id").get<std::string>();
    sample.label = archive.metadata.at("label").get<int>();
    sample.image_count = images->shape[1];
    sample.rows = images->shape[2];
    sample.cols = images->shape[3];
    sample.pixels.assign(images->data.begin() + static_cast<std::ptrdiff_t>(s * per),
                         images->data.begin() + static_cast<std::ptrdiff_t>((s + 1) * per));
    out.push_back(std::move(sample));
  }
  return out;
}

}  // namespace birdcall
