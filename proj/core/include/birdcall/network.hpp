#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "birdcall/rng.hpp"
#include "birdcall/tensor_archive.hpp"
#include "birdcall/windowing.hpp"

namespace birdcall {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Distributed CNN -> LSTM -> dense -> dense classifier. Every feature image
// goes through 2x2 valid convolution, ReLU and 2x2/2 max pooling; the flattened
// maps are projected and fed to the LSTM as one timestep per feature.
struct ArchConfig {
  static constexpr std::size_t kKernel = 2;
  static constexpr std::size_t kPool = 2;

  std::size_t image_rows = kImageRows;
  std::size_t image_cols = kImageCols;
  std::size_t conv_kernels = 50;
  bool use_projection = true;
  std::size_t projection_dim = 1000;
  std::size_t lstm_units = 10;
  std::size_t dense1_units = 10;
  std::size_t class_count = 2;
  std::size_t feature_count = 1;
  bool share_cnn_weights = true;

  std::size_t conv_rows() const noexcept { return image_rows - kKernel + 1; }
  std::size_t conv_cols() const noexcept { return image_cols - kKernel + 1; }
  std::size_t pool_rows() const noexcept { return conv_rows() / kPool; }
  std::size_t pool_cols() const noexcept { return conv_cols() / kPool; }
  std::size_t flat_size() const noexcept { return pool_rows() * pool_cols() * conv_kernels; }
  std::size_t lstm_input() const noexcept { return use_projection ? projection_dim : flat_size(); }
  std::size_t gate_width() const noexcept { return 4 * lstm_units; }

  void validate() const;
  nlohmann::json to_json() const;
  static ArchConfig from_json(const nlohmann::json& j);

  friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

enum class Param : std::size_t {
  conv_kernel = 0,
  conv_bias,
  proj_kernel,
  proj_bias,
  lstm_kernel,
  lstm_recurrent,
  lstm_bias,
  dense1_kernel,
  dense1_bias,
  dense2_kernel,
  dense2_bias,
};
inline constexpr std::size_t kParamCount = 11;

// Named parameter tensors in the fixed order of `Param`. Kernels are stored
// row-major as [inputs, outputs]; LSTM gate blocks are ordered input, forget,
// cell, output.
struct ModelParams {
  std::vector<NamedArray> tensors;

  NamedArray& operator[](Param p) { return tensors[static_cast<std::size_t>(p)]; }
  const NamedArray& operator[](Param p) const { return tensors[static_cast<std::size_t>(p)]; }
  std::size_t parameter_count() const;

  // Same names and shapes, all zeros.
  static ModelParams zeros(const ArchConfig& cfg);
  static std::vector<std::vector<std::size_t>> shapes(const ArchConfig& cfg);
  static const std::vector<std::string>& names();
};

// Xavier-uniform kernels, orthogonal recurrent kernel, zero biases except the
// forget gate (1). Draw order: conv, projection, LSTM kernel, LSTM recurrent,
// dense1, dense2.
ModelParams init_params(const ArchConfig& cfg, Rng& rng);
ModelParams init_params(const ArchConfig& cfg, std::uint64_t seed);

// Valid 2x2 stride-1 convolution of one image; output is [rows-1][cols-1][K]
// (channel fastest).
struct ConvOutput {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t channels = 0;
  std::vector<double> values;
};
ConvOutput conv2d_valid(std::span<const double> image, std::size_t rows, std::size_t cols,
                        std::span<const double> kernel, std::span<const double> bias,
                        std::size_t channels);

// ReLU followed by 2x2 stride-2 max pooling with floor division. `winner`
// receives, per pooled element, the window offset (0..3, row-major) of the max.
struct PoolOutput {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t channels = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> winner;
};
PoolOutput relu_maxpool(const ConvOutput& conv);

// Activations of a batch forward pass, kept for the backward pass.
struct ForwardCache {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::vector<const Sample*> samples;
  RowMatrix pooled;     // [batch * steps, flat]
  std::vector<std::vector<std::uint8_t>> winners;  // per pooled row
  RowMatrix projected;  // [batch * steps, lstm_input]; empty when the projection is off
  RowMatrix gates;      // [batch * steps, 4H] post-activation i, f, g, o
  RowMatrix cells;      // [batch * steps, H]
  RowMatrix hiddens;    // [batch * steps, H]
  RowMatrix dense1;     // [batch, dense1]
  RowMatrix logits;     // [batch, C]
  RowMatrix probabilities;  // [batch, C]

  const RowMatrix& lstm_inputs() const { return projected.size() ? projected : pooled; }
};

ForwardCache forward(const ModelParams& params, const ArchConfig& cfg,
                     std::span<const Sample* const> batch);
std::vector<double> forward_probabilities(const ModelParams& params, const ArchConfig& cfg,
                                          const Sample& sample);

// Numerically stable softmax and categorical cross-entropy from logits.
std::vector<double> softmax(std::span<const double> logits);
double cross_entropy(std::span<const double> logits, std::size_t true_class);
double cross_entropy_from_probabilities(std::span<const double> probabilities, std::size_t true_class);

// Gradients of sum_b scale * loss_b with respect to every parameter, added
// into `grads` (which must have the shapes of `params`).
void backward(const ModelParams& params, const ArchConfig& cfg, const ForwardCache& cache,
              std::span<const int> labels, double scale, ModelParams& grads);
ModelParams backward(const ModelParams& params, const ArchConfig& cfg, const ForwardCache& cache,
                     std::span<const int> labels, double scale = 1.0);

}  // namespace birdcall
