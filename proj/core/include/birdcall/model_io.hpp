#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "birdcall/features.hpp"
#include "birdcall/network.hpp"
#include "birdcall/training.hpp"

namespace birdcall {

// A trained classifier together with everything needed to use it.
struct TrainedModel {
  ArchConfig arch;
  ModelParams params;
  std::string feature_set = "Set3";
  std::vector<std::string> class_names;

  // Rejects feature matrices whose columns are not this model's feature set.
  void check_features(const FeatureMatrix& features) const;
  RecordPrediction predict(const FeatureMatrix& features) const;
};

Archive to_archive(const TrainedModel& model);
TrainedModel from_archive(const Archive& archive);

void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);
// Also rejects a stored architecture that differs from `expected`.
TrainedModel load_model(const std::filesystem::path& path, const ArchConfig& expected);

// Optional on-disk form of one record's network inputs.
Archive segments_to_archive(const std::vector<Sample>& segments, const std::vector<std::string>& feature_names);
std::vector<Sample> segments_from_archive(const Archive& archive);

}  // namespace birdcall
