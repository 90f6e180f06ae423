#include "birdcall/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "birdcall/error.hpp"

namespace birdcall {

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

TrainResult train(const std::vector<Sample>& dataset, const ArchConfig& arch,
                  const SchedulerConfig& sched, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  arch.validate();
  sched.validate();
  if (dataset.empty()) throw InvalidArgument("cannot train on an empty dataset");
  if (cfg.batch_size == 0 || cfg.chunk_size == 0) throw InvalidArgument("batch size must be positive");
  for (const auto& s : dataset) {
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= arch.class_count) {
      throw InvalidArgument("sample '" + s.record_id + "' has a label outside the class range");
    }
  }

  Rng rng(cfg.seed);
  TrainResult result;
  result.params = init_params(arch, rng);
  OptimizerState state = OptimizerState::for_params(result.params);

  ModelParams grads = ModelParams::zeros(arch);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < sched.total_epochs; ++epoch) {
    const double lr = cosine_annealing_lr(epoch, sched);
    rng.shuffle(order.begin(), order.end());

    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (auto& g : grads.tensors) std::fill(g.data.begin(), g.data.end(), 0.0);
      double batch_loss = 0.0;

      for (std::size_t chunk = start; chunk < end; chunk += cfg.chunk_size) {
        const std::size_t chunk_end = std::min(end, chunk + cfg.chunk_size);
        std::vector<const Sample*> members;
        std::vector<int> labels;
        for (std::size_t i = chunk; i < chunk_end; ++i) {
          members.push_back(&dataset[order[i]]);
          labels.push_back(dataset[order[i]].label);
        }
        const ForwardCache cache = forward(result.params, arch, members);
        for (std::size_t b = 0; b < members.size(); ++b) {
          const auto row = cache.logits.row(static_cast<Eigen::Index>(b));
          const std::span<const double> logits(row.data(), static_cast<std::size_t>(row.size()));
          batch_loss += cross_entropy(logits, static_cast<std::size_t>(labels[b]));
          if (argmax(logits) == static_cast<std::size_t>(labels[b])) ++correct;
        }
        backward(result.params, arch, cache, labels, scale, grads);
      }

      if (!std::isfinite(batch_loss)) {
        throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(batch_index));
      }
      try {
        rmsprop_step(result.params, grads, state, lr, cfg.rmsprop);
      } catch (const TrainingDiverged& e) {
        throw TrainingDiverged(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(batch_index));
      }
      loss_sum += batch_loss;
    }

    EpochLog entry{epoch, lr, loss_sum / static_cast<double>(dataset.size()),
                   static_cast<double>(correct) / static_cast<double>(dataset.size())};
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  return result;
}

std::string format_epoch_log(std::span<const EpochLog> log) {
  std::string out = "epoch,lr,loss,train_accuracy\n";
  char buf[128];
  for (const auto& e : log) {
    const int n = std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", e.epoch, e.learning_rate,
                                e.loss, e.train_accuracy);
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

RecordPrediction aggregate_segment_probabilities(std::span<const std::vector<double>> per_segment) {
  if (per_segment.empty()) throw InvalidArgument("record has no segments");
  RecordPrediction out;
  out.probabilities.assign(per_segment.front().size(), 0.0);
  for (const auto& p : per_segment) {
    if (p.size() != out.probabilities.size()) throw ShapeError("segment probability vectors differ in length");
    for (std::size_t c = 0; c < p.size(); ++c) out.probabilities[c] += p[c];
  }
  for (auto& v : out.probabilities) v /= static_cast<double>(per_segment.size());
  out.predicted_class = argmax(out.probabilities);
  return out;
}

RecordPrediction predict_record(const ModelParams& params, const ArchConfig& arch,
                                std::span<const Sample> segments) {
  std::vector<std::vector<double>> per_segment;
  per_segment.reserve(segments.size());
  for (const auto& s : segments) per_segment.push_back(forward_probabilities(params, arch, s));
  return aggregate_segment_probabilities(per_segment);
}

}  // namespace birdcall
