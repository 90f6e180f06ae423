#include "birdcall/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "birdcall/error.hpp"

namespace birdcall {

void SchedulerConfig::validate() const {
  if (cycle_length == 0) throw InvalidArgument("scheduler cycle length must be positive");
  if (total_epochs == 0 || total_epochs % cycle_length != 0) {
    throw InvalidArgument("total epochs must be a positive multiple of the cycle length");
  }
  if (lr_min > lr_max) throw InvalidArgument("minimum learning rate exceeds the maximum");
}

double cosine_annealing_lr(std::size_t epoch, const SchedulerConfig& cfg) {
  cfg.validate();
  if (epoch >= cfg.total_epochs) {
    throw InvalidArgument("epoch " + std::to_string(epoch) + " outside [0, " +
                          std::to_string(cfg.total_epochs) + ")");
  }
  const double t_cur = static_cast<double>(epoch % cfg.cycle_length);
  const double t_i = static_cast<double>(cfg.cycle_length);
  return cfg.lr_min + 0.5 * (cfg.lr_max - cfg.lr_min) * (1.0 + std::cos(std::numbers::pi * t_cur / t_i));
}

OptimizerState OptimizerState::for_params(const ModelParams& params) {
  OptimizerState s;
  for (const auto& t : params.tensors) s.accumulators.emplace_back(t.data.size(), 0.0);
  return s;
}

void rmsprop_step(ModelParams& params, const ModelParams& grads, OptimizerState& state, double lr,
                  const RmsPropConfig& cfg) {
  if (grads.tensors.size() != params.tensors.size() || state.accumulators.size() != params.tensors.size()) {
    throw ShapeError("optimizer state does not mirror the parameters");
  }
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    if (grads.tensors[i].data.size() != params.tensors[i].data.size() ||
        state.accumulators[i].size() != params.tensors[i].data.size()) {
      throw ShapeError("gradient shape mismatch for " + params.tensors[i].name);
    }
    for (double g : grads.tensors[i].data) {
      if (!std::isfinite(g)) throw TrainingDiverged("non-finite gradient in " + params.tensors[i].name);
    }
  }
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    auto& theta = params.tensors[i].data;
    const auto& g = grads.tensors[i].data;
    auto& acc = state.accumulators[i];
    for (std::size_t j = 0; j < theta.size(); ++j) {
      acc[j] = cfg.rho * acc[j] + (1.0 - cfg.rho) * g[j] * g[j];
      theta[j] -= lr * g[j] / (std::sqrt(acc[j]) + cfg.epsilon);
    }
  }
}

}  // namespace birdcall
