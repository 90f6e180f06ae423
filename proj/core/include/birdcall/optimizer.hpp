#pragma once

#include <cstddef>
#include <vector>

#include "birdcall/network.hpp"

namespace birdcall {

// Cosine annealing with warm restarts every `cycle_length` epochs.
struct SchedulerConfig {
  double lr_max = 1e-5;
  double lr_min = 0.0;
  std::size_t cycle_length = 20;
  std::size_t total_epochs = 200;

  std::size_t cycles() const noexcept { return cycle_length ? total_epochs / cycle_length : 0; }
  void validate() const;
};

double cosine_annealing_lr(std::size_t epoch, const SchedulerConfig& cfg);

struct RmsPropConfig {
  double rho = 0.9;
  double epsilon = 1e-7;
};

// Un-centred mean-square accumulators, one per parameter.
struct OptimizerState {
  std::vector<std::vector<double>> accumulators;

  static OptimizerState for_params(const ModelParams& params);
};

// acc <- rho * acc + (1 - rho) * g^2;  theta <- theta - lr * g / (sqrt(acc) + eps).
// Accumulators decay even where the gradient is zero. Throws TrainingDiverged
// naming the tensor if any gradient is non-finite; nothing is updated then.
void rmsprop_step(ModelParams& params, const ModelParams& grads, OptimizerState& state, double lr,
                  const RmsPropConfig& cfg = {});

}  // namespace birdcall
