#include "birdcall/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/QR>

#include "birdcall/error.hpp"

namespace birdcall {
namespace {

using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;
using ConstRowMap = Eigen::Map<const Eigen::RowVectorXd>;
using MutRowMap = Eigen::Map<Eigen::RowVectorXd>;

ConstMap as_matrix(const NamedArray& a) {
  return ConstMap(a.data.data(), static_cast<Eigen::Index>(a.shape.at(0)),
                  static_cast<Eigen::Index>(a.shape.at(1)));
}
MutMap as_matrix(NamedArray& a) {
  return MutMap(a.data.data(), static_cast<Eigen::Index>(a.shape.at(0)),
                static_cast<Eigen::Index>(a.shape.at(1)));
}
ConstRowMap as_row(const NamedArray& a) {
  return ConstRowMap(a.data.data(), static_cast<Eigen::Index>(a.data.size()));
}
MutRowMap as_row(NamedArray& a) { return MutRowMap(a.data.data(), static_cast<Eigen::Index>(a.data.size())); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void fill_xavier(NamedArray& a, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& w : a.data) w = rng.uniform(-bound, bound);
}

// Rows of the returned [rows, cols] matrix (rows <= cols) are orthonormal:
// thin QR of a normal [cols, rows] draw, columns sign-corrected so that R has
// a positive diagonal, then transposed.
void fill_orthogonal(NamedArray& a, Rng& rng) {
  const auto rows = static_cast<Eigen::Index>(a.shape[0]);
  const auto cols = static_cast<Eigen::Index>(a.shape[1]);
  RowMatrix draw(cols, rows);
  for (Eigen::Index i = 0; i < cols; ++i) {
    for (Eigen::Index j = 0; j < rows; ++j) draw(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(draw);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(cols, rows);
  const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(rows, rows);
  for (Eigen::Index j = 0; j < rows; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  as_matrix(a) = q.transpose();
}

std::size_t conv_params_per_feature(const ArchConfig& cfg) {
  return cfg.conv_kernels * ArchConfig::kKernel * ArchConfig::kKernel;
}

}  // namespace

void ArchConfig::validate() const {
  if (class_count < 2) throw InvalidArgument("architecture needs at least two classes");
  if (feature_count < 1) throw InvalidArgument("architecture needs at least one feature");
  if (image_rows < kKernel + 1 || image_cols < kKernel + 1) {
    throw InvalidArgument("image too small for convolution and pooling");
  }
  if (conv_kernels < 1 || lstm_units < 1 || dense1_units < 1) {
    throw InvalidArgument("layer widths must be positive");
  }
  if (use_projection && projection_dim < 1) throw InvalidArgument("projection width must be positive");
}

nlohmann::json ArchConfig::to_json() const {
  return {{"image_rows", image_rows},         {"image_cols", image_cols},
          {"conv_kernels", conv_kernels},     {"use_projection", use_projection},
          {"projection_dim", projection_dim}, {"lstm_units", lstm_units},
          {"dense1_units", dense1_units},     {"class_count", class_count},
          {"feature_count", feature_count},   {"share_cnn_weights", share_cnn_weights}};
}

ArchConfig ArchConfig::from_json(const nlohmann::json& j) {
  ArchConfig c;
  c.image_rows = j.at("image_rows").get<std::size_t>();
  c.image_cols = j.at("image_cols").get<std::size_t>();
  c.conv_kernels = j.at("conv_kernels").get<std::size_t>();
  c.use_projection = j.at("use_projection").get<bool>();
  c.projection_dim = j.at("projection_dim").get<std::size_t>();
  c.lstm_units = j.at("lstm_units").get<std::size_t>();
  c.dense1_units = j.at("dense1_units").get<std::size_t>();
  c.class_count = j.at("class_count").get<std::size_t>();
  c.feature_count = j.at("feature_count").get<std::size_t>();
  c.share_cnn_weights = j.at("share_cnn_weights").get<bool>();
  c.validate();
  return c;
}

const std::vector<std::string>& ModelParams::names() {
  static const std::vector<std::string> n = {
      "conv.kernel",  "conv.bias",         "projection.kernel", "projection.bias",
      "lstm.kernel",  "lstm.recurrent",    "lstm.bias",         "dense1.kernel",
      "dense1.bias",  "dense2.kernel",     "dense2.bias"};
  return n;
}

std::vector<std::vector<std::size_t>> ModelParams::shapes(const ArchConfig& cfg) {
  const std::size_t k = ArchConfig::kKernel;
  const std::size_t in = cfg.lstm_input();
  const std::size_t h = cfg.lstm_units;
  std::vector<std::vector<std::size_t>> s;
  if (cfg.share_cnn_weights) {
    s.push_back({cfg.conv_kernels, 1, k, k});
    s.push_back({cfg.conv_kernels});
  } else {
    s.push_back({cfg.feature_count, cfg.conv_kernels, 1, k, k});
    s.push_back({cfg.feature_count, cfg.conv_kernels});
  }
  if (cfg.use_projection) {
    s.push_back({cfg.flat_size(), cfg.projection_dim});
    s.push_back({cfg.projection_dim});
  } else {
    s.push_back({cfg.flat_size(), 0});
    s.push_back({0});
  }
  s.push_back({in, 4 * h});
  s.push_back({h, 4 * h});
  s.push_back({4 * h});
  s.push_back({h, cfg.dense1_units});
  s.push_back({cfg.dense1_units});
  s.push_back({cfg.dense1_units, cfg.class_count});
  s.push_back({cfg.class_count});
  return s;
}

ModelParams ModelParams::zeros(const ArchConfig& cfg) {
  cfg.validate();
  ModelParams p;
  const auto shape_list = shapes(cfg);
  for (std::size_t i = 0; i < kParamCount; ++i) {
    NamedArray a{names()[i], shape_list[i], {}};
    a.data.assign(a.element_count(), 0.0);
    p.tensors.push_back(std::move(a));
  }
  return p;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.data.size();
  return n;
}

ModelParams init_params(const ArchConfig& cfg, Rng& rng) {
  ModelParams p = ModelParams::zeros(cfg);
  const std::size_t k2 = ArchConfig::kKernel * ArchConfig::kKernel;
  fill_xavier(p[Param::conv_kernel], k2, cfg.conv_kernels * k2, rng);
  if (cfg.use_projection) fill_xavier(p[Param::proj_kernel], cfg.flat_size(), cfg.projection_dim, rng);
  fill_xavier(p[Param::lstm_kernel], cfg.lstm_input(), cfg.gate_width(), rng);
  fill_orthogonal(p[Param::lstm_recurrent], rng);
  auto& lstm_bias = p[Param::lstm_bias].data;
  std::fill(lstm_bias.begin() + static_cast<std::ptrdiff_t>(cfg.lstm_units),
            lstm_bias.begin() + static_cast<std::ptrdiff_t>(2 * cfg.lstm_units), 1.0);
  fill_xavier(p[Param::dense1_kernel], cfg.lstm_units, cfg.dense1_units, rng);
  fill_xavier(p[Param::dense2_kernel], cfg.dense1_units, cfg.class_count, rng);
  return p;
}

ModelParams init_params(const ArchConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  return init_params(cfg, rng);
}

ConvOutput conv2d_valid(std::span<const double> image, std::size_t rows, std::size_t cols,
                        std::span<const double> kernel, std::span<const double> bias,
                        std::size_t channels) {
  constexpr std::size_t k = ArchConfig::kKernel;
  if (image.size() != rows * cols) throw ShapeError("image size does not match its shape");
  if (kernel.size() != channels * k * k || bias.size() != channels) {
    throw ShapeError("convolution kernel does not match the channel count");
  }
  ConvOutput out{rows - k + 1, cols - k + 1, channels, {}};
  out.values.resize(out.rows * out.cols * channels);
  for (std::size_t i = 0; i < out.rows; ++i) {
    for (std::size_t j = 0; j < out.cols; ++j) {
      const double x00 = image[i * cols + j];
      const double x01 = image[i * cols + j + 1];
      const double x10 = image[(i + 1) * cols + j];
      const double x11 = image[(i + 1) * cols + j + 1];
      double* z = out.values.data() + (i * out.cols + j) * channels;
      for (std::size_t c = 0; c < channels; ++c) {
        const double* w = kernel.data() + c * 4;
        z[c] = bias[c] + w[0] * x00 + w[1] * x01 + w[2] * x10 + w[3] * x11;
      }
    }
  }
  return out;
}

PoolOutput relu_maxpool(const ConvOutput& conv) {
  constexpr std::size_t p = ArchConfig::kPool;
  PoolOutput out{conv.rows / p, conv.cols / p, conv.channels, {}, {}};
  const std::size_t n = out.rows * out.cols * out.channels;
  out.values.resize(n);
  out.winner.resize(n);
  const std::size_t ch = conv.channels;
  for (std::size_t pi = 0; pi < out.rows; ++pi) {
    for (std::size_t pj = 0; pj < out.cols; ++pj) {
      for (std::size_t c = 0; c < ch; ++c) {
        double best = 0.0;
        std::uint8_t arg = 0;
        for (std::uint8_t w = 0; w < p * p; ++w) {
          const std::size_t ci = p * pi + w / p;
          const std::size_t cj = p * pj + w % p;
          const double v = std::max(0.0, conv.values[(ci * conv.cols + cj) * ch + c]);
          if (w == 0 || v > best) {
            best = v;
            arg = w;
          }
        }
        const std::size_t at = (pi * out.cols + pj) * ch + c;
        out.values[at] = best;
        out.winner[at] = arg;
      }
    }
  }
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) total += (p[i] = std::exp(logits[i] - m));
  for (auto& v : p) v /= total;
  return p;
}

double cross_entropy(std::span<const double> logits, std::size_t true_class) {
  if (true_class >= logits.size()) throw InvalidArgument("class index out of range");
  const double m = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double l : logits) total += std::exp(l - m);
  return m + std::log(total) - logits[true_class];
}

double cross_entropy_from_probabilities(std::span<const double> probabilities, std::size_t true_class) {
  if (true_class >= probabilities.size()) throw InvalidArgument("class index out of range");
  return -std::log(probabilities[true_class]);
}

ForwardCache forward(const ModelParams& params, const ArchConfig& cfg,
                     std::span<const Sample* const> batch) {
  const std::size_t n_steps = cfg.feature_count;
  const std::size_t h = cfg.lstm_units;
  const std::size_t rows = batch.size() * n_steps;
  for (const Sample* s : batch) {
    if (s->image_count != n_steps || s->rows != cfg.image_rows || s->cols != cfg.image_cols ||
        s->pixels.size() != n_steps * cfg.image_rows * cfg.image_cols) {
      throw ShapeError("sample '" + s->record_id + "' has " + std::to_string(s->image_count) + " images of " +
                       std::to_string(s->rows) + "x" + std::to_string(s->cols) + ", network expects " +
                       std::to_string(n_steps) + " of " + std::to_string(cfg.image_rows) + "x" +
                       std::to_string(cfg.image_cols));
    }
  }

  ForwardCache cache;
  cache.batch = batch.size();
  cache.steps = n_steps;
  cache.samples.assign(batch.begin(), batch.end());
  cache.pooled.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cfg.flat_size()));
  cache.winners.resize(rows);

  const auto& conv_k = params[Param::conv_kernel].data;
  const auto& conv_b = params[Param::conv_bias].data;
  const std::size_t per_feature = conv_params_per_feature(cfg);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (std::size_t t = 0; t < n_steps; ++t) {
      const std::size_t kernel_slot = cfg.share_cnn_weights ? 0 : t;
      const auto conv = conv2d_valid(
          batch[b]->image(t), cfg.image_rows, cfg.image_cols,
          std::span<const double>(conv_k).subspan(kernel_slot * per_feature, per_feature),
          std::span<const double>(conv_b).subspan(kernel_slot * cfg.conv_kernels, cfg.conv_kernels),
          cfg.conv_kernels);
      auto pooled = relu_maxpool(conv);
      const std::size_t r = b * n_steps + t;
      std::copy(pooled.values.begin(), pooled.values.end(), cache.pooled.row(static_cast<Eigen::Index>(r)).data());
      cache.winners[r] = std::move(pooled.winner);
    }
  }

  if (cfg.use_projection) {
    cache.projected.noalias() = cache.pooled * as_matrix(params[Param::proj_kernel]);
    cache.projected.rowwise() += as_row(params[Param::proj_bias]);
  }

  const RowMatrix input_gates = cache.lstm_inputs() * as_matrix(params[Param::lstm_kernel]);
  const auto recurrent = as_matrix(params[Param::lstm_recurrent]);
  const auto lstm_bias = as_row(params[Param::lstm_bias]);
  const auto hi = static_cast<Eigen::Index>(h);
  cache.gates.resize(static_cast<Eigen::Index>(rows), 4 * hi);
  cache.cells.resize(static_cast<Eigen::Index>(rows), hi);
  cache.hiddens.resize(static_cast<Eigen::Index>(rows), hi);

  RowMatrix final_hidden(static_cast<Eigen::Index>(batch.size()), hi);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    Eigen::RowVectorXd hidden = Eigen::RowVectorXd::Zero(hi);
    Eigen::RowVectorXd cell = Eigen::RowVectorXd::Zero(hi);
    for (std::size_t t = 0; t < n_steps; ++t) {
      const auto r = static_cast<Eigen::Index>(b * n_steps + t);
      Eigen::RowVectorXd z = input_gates.row(r) + hidden * recurrent + lstm_bias;
      for (Eigen::Index u = 0; u < hi; ++u) {
        z(u) = sigmoid(z(u));
        z(hi + u) = sigmoid(z(hi + u));
        z(2 * hi + u) = std::tanh(z(2 * hi + u));
        z(3 * hi + u) = sigmoid(z(3 * hi + u));
        cell(u) = z(hi + u) * cell(u) + z(u) * z(2 * hi + u);
        hidden(u) = z(3 * hi + u) * std::tanh(cell(u));
      }
      cache.gates.row(r) = z;
      cache.cells.row(r) = cell;
      cache.hiddens.row(r) = hidden;
    }
    final_hidden.row(static_cast<Eigen::Index>(b)) = hidden;
  }

  cache.dense1.noalias() = final_hidden * as_matrix(params[Param::dense1_kernel]);
  cache.dense1.rowwise() += as_row(params[Param::dense1_bias]);
  cache.logits.noalias() = cache.dense1 * as_matrix(params[Param::dense2_kernel]);
  cache.logits.rowwise() += as_row(params[Param::dense2_bias]);

  cache.probabilities.resizeLike(cache.logits);
  for (Eigen::Index b = 0; b < cache.logits.rows(); ++b) {
    const auto p = softmax(std::span<const double>(cache.logits.row(b).data(),
                                                   static_cast<std::size_t>(cache.logits.cols())));
    std::copy(p.begin(), p.end(), cache.probabilities.row(b).data());
  }
  return cache;
}

std::vector<double> forward_probabilities(const ModelParams& params, const ArchConfig& cfg,
                                          const Sample& sample) {
  const Sample* one[] = {&sample};
  const auto cache = forward(params, cfg, one);
  return {cache.probabilities.data(), cache.probabilities.data() + cache.probabilities.cols()};
}

void backward(const ModelParams& params, const ArchConfig& cfg, const ForwardCache& cache,
              std::span<const int> labels, double scale, ModelParams& grads) {
  if (labels.size() != cache.batch) throw ShapeError("label count does not match the batch");
  const std::size_t n_steps = cache.steps;
  const auto hi = static_cast<Eigen::Index>(cfg.lstm_units);
  const auto batch = static_cast<Eigen::Index>(cache.batch);
  const auto classes = static_cast<Eigen::Index>(cfg.class_count);

  RowMatrix d_logits = cache.probabilities;
  for (Eigen::Index b = 0; b < batch; ++b) {
    const int y = labels[static_cast<std::size_t>(b)];
    if (y < 0 || y >= classes) throw InvalidArgument("label out of range");
    d_logits(b, y) -= 1.0;
  }
  d_logits *= scale;

  RowMatrix final_hidden(batch, hi);
  for (Eigen::Index b = 0; b < batch; ++b) {
    final_hidden.row(b) = cache.hiddens.row(b * static_cast<Eigen::Index>(n_steps) + static_cast<Eigen::Index>(n_steps) - 1);
  }

  as_matrix(grads[Param::dense2_kernel]).noalias() += cache.dense1.transpose() * d_logits;
  as_row(grads[Param::dense2_bias]) += d_logits.colwise().sum();
  const RowMatrix d_dense1 = d_logits * as_matrix(params[Param::dense2_kernel]).transpose();
  as_matrix(grads[Param::dense1_kernel]).noalias() += final_hidden.transpose() * d_dense1;
  as_row(grads[Param::dense1_bias]) += d_dense1.colwise().sum();
  const RowMatrix d_final_hidden = d_dense1 * as_matrix(params[Param::dense1_kernel]).transpose();

  // Backpropagation through time over the feature sequence.
  const auto recurrent = as_matrix(params[Param::lstm_recurrent]);
  auto d_recurrent = as_matrix(grads[Param::lstm_recurrent]);
  RowMatrix d_gates(cache.gates.rows(), cache.gates.cols());
  for (Eigen::Index b = 0; b < batch; ++b) {
    Eigen::RowVectorXd dh = d_final_hidden.row(b);
    Eigen::RowVectorXd dc = Eigen::RowVectorXd::Zero(hi);
    for (std::size_t step = n_steps; step-- > 0;) {
      const auto r = b * static_cast<Eigen::Index>(n_steps) + static_cast<Eigen::Index>(step);
      const auto g = cache.gates.row(r);
      const auto c = cache.cells.row(r);
      Eigen::RowVectorXd dz(4 * hi);
      for (Eigen::Index u = 0; u < hi; ++u) {
        const double gi = g(u), gf = g(hi + u), gg = g(2 * hi + u), go = g(3 * hi + u);
        const double c_prev = step > 0 ? cache.cells(r - 1, u) : 0.0;
        const double tc = std::tanh(c(u));
        const double d_o = dh(u) * tc;
        dc(u) += dh(u) * go * (1.0 - tc * tc);
        dz(u) = dc(u) * gg * gi * (1.0 - gi);
        dz(hi + u) = dc(u) * c_prev * gf * (1.0 - gf);
        dz(2 * hi + u) = dc(u) * gi * (1.0 - gg * gg);
        dz(3 * hi + u) = d_o * go * (1.0 - go);
        dc(u) *= gf;
      }
      d_gates.row(r) = dz;
      if (step > 0) d_recurrent.noalias() += cache.hiddens.row(r - 1).transpose() * dz;
      dh = dz * recurrent.transpose();
    }
  }
  as_row(grads[Param::lstm_bias]) += d_gates.colwise().sum();
  const RowMatrix& lstm_in = cache.lstm_inputs();
  as_matrix(grads[Param::lstm_kernel]).noalias() += lstm_in.transpose() * d_gates;
  RowMatrix d_lstm_in = d_gates * as_matrix(params[Param::lstm_kernel]).transpose();

  RowMatrix d_pooled;
  if (cfg.use_projection) {
    as_matrix(grads[Param::proj_kernel]).noalias() += cache.pooled.transpose() * d_lstm_in;
    as_row(grads[Param::proj_bias]) += d_lstm_in.colwise().sum();
    d_pooled.noalias() = d_lstm_in * as_matrix(params[Param::proj_kernel]).transpose();
  } else {
    d_pooled = std::move(d_lstm_in);
  }

  // Route pooled gradients to the winning conv outputs; ReLU passes them only
  // where the pooled value is positive.
  constexpr std::size_t p = ArchConfig::kPool;
  const std::size_t ch = cfg.conv_kernels;
  const std::size_t pool_cols = cfg.pool_cols();
  const std::size_t img_cols = cfg.image_cols;
  const std::size_t per_feature = conv_params_per_feature(cfg);
  auto& dk_all = grads[Param::conv_kernel].data;
  auto& db_all = grads[Param::conv_bias].data;
  for (std::size_t r = 0; r < cache.samples.size() * n_steps; ++r) {
    const std::size_t b = r / n_steps;
    const std::size_t t = r % n_steps;
    const std::size_t slot = cfg.share_cnn_weights ? 0 : t;
    double* dk = dk_all.data() + slot * per_feature;
    double* db = db_all.data() + slot * ch;
    const auto image = cache.samples[b]->image(t);
    const auto ri = static_cast<Eigen::Index>(r);
    const auto& winner = cache.winners[r];
    for (std::size_t idx = 0; idx < cfg.flat_size(); ++idx) {
      const double grad = d_pooled(ri, static_cast<Eigen::Index>(idx));
      if (grad == 0.0 || !(cache.pooled(ri, static_cast<Eigen::Index>(idx)) > 0.0)) continue;
      const std::size_t c = idx % ch;
      const std::size_t cell = idx / ch;
      const std::size_t ci = p * (cell / pool_cols) + winner[idx] / p;
      const std::size_t cj = p * (cell % pool_cols) + winner[idx] % p;
      const double* x = image.data() + ci * img_cols + cj;
      double* w = dk + c * 4;
      w[0] += grad * x[0];
      w[1] += grad * x[1];
      w[2] += grad * x[img_cols];
      w[3] += grad * x[img_cols + 1];
      db[c] += grad;
    }
  }
}

ModelParams backward(const ModelParams& params, const ArchConfig& cfg, const ForwardCache& cache,
                     std::span<const int> labels, double scale) {
  ModelParams grads = ModelParams::zeros(cfg);
  backward(params, cfg, cache, labels, scale, grads);
  return grads;
}

}  // namespace birdcall
