#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "birdcall/network.hpp"
#include "birdcall/optimizer.hpp"

namespace birdcall {

struct TrainConfig {
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  // Samples pushed through forward/backward at once inside a batch. Gradients
  // of the chunks are summed in order, so the result does not depend on it
  // beyond floating-point association.
  std::size_t chunk_size = 16;
  RmsPropConfig rmsprop{};
};

struct EpochLog {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double loss = 0.0;
  double train_accuracy = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Seeded shuffle each epoch, mean-loss gradients per batch, RMSProp with the
// cosine-annealed learning rate of the epoch. Parameters are initialised from
// the same seeded stream before the first shuffle.
TrainResult train(const std::vector<Sample>& dataset, const ArchConfig& arch,
                  const SchedulerConfig& sched, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// `epoch,lr,loss,train_accuracy` rows with a header line.
std::string format_epoch_log(std::span<const EpochLog> log);

std::size_t argmax(std::span<const double> values);

struct RecordPrediction {
  std::size_t predicted_class = 0;
  std::vector<double> probabilities;
};

// Mean of the per-segment softmax vectors; ties go to the lowest class index.
RecordPrediction predict_record(const ModelParams& params, const ArchConfig& arch,
                                std::span<const Sample> segments);
RecordPrediction aggregate_segment_probabilities(std::span<const std::vector<double>> per_segment);

}  // namespace birdcall
