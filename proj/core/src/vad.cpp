#include "birdcall/vad.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "birdcall/error.hpp"

namespace birdcall {

std::size_t ActivityMask::active_count() const noexcept {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
}

std::vector<double> square_frame(std::span<const double> frame) {
  std::vector<double> out(frame.size());
  std::transform(frame.begin(), frame.end(), out.begin(), [](double x) { return x * x; });
  return out;
}

double primary_threshold(std::span<const double> squared_frame, double global_threshold) {
  if (squared_frame.empty()) throw InvalidArgument("primary threshold of an empty frame");
  const auto [lo, hi] = std::minmax_element(squared_frame.begin(), squared_frame.end());
  return *lo + (*hi - *lo) * global_threshold;
}

double adaptive_threshold_step(std::size_t i, double prev, double primary) {
  if (i < 1) throw InvalidArgument("adaptive threshold frame index starts at 1");
  // Incremental form of ((i - 1) * prev + primary) / i; exact when primary == prev.
  return prev + (primary - prev) / static_cast<double>(i);
}

ActivityMask detect_active_frames(const MonoSignal& signal, const VadConfig& cfg) {
  if (cfg.global_threshold < 0.0 || cfg.global_threshold > 1.0) {
    throw InvalidArgument("VAD global threshold must lie in [0, 1]");
  }
  if (cfg.silence_floor < 0.0) throw InvalidArgument("VAD silence floor must be >= 0");

  const FrameSeries frames = frame_signal(signal, FrameConfig{cfg.window_ms, cfg.hop_ms});
  ActivityMask mask;
  mask.window_len = frames.window_len();
  mask.hop_len = frames.hop_len();
  mask.source_len = signal.size();
  mask.active.resize(frames.size());

  double adaptive = cfg.initial_adaptive_threshold;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto frame = frames[f];
    const std::vector<double> sq = square_frame(frame);
    adaptive = adaptive_threshold_step(f + 1, adaptive, primary_threshold(sq, cfg.global_threshold));
    // Offset by the minimum so a constant frame's mean is exactly its value and
    // equals its threshold.
    const double lo = *std::min_element(sq.begin(), sq.end());
    double excess = 0.0;
    for (double v : sq) excess += v - lo;
    const double mean = lo + excess / static_cast<double>(sq.size());
    double peak = 0.0;
    for (double x : frame) peak = std::max(peak, std::abs(x));
    mask.active[f] = !(mean < adaptive) && !(peak < cfg.silence_floor);
  }
  return mask;
}

MonoSignal extract_active_signal(const MonoSignal& signal, const ActivityMask& mask) {
  if (mask.source_len != signal.size() || mask.hop_len == 0 || mask.window_len == 0) {
    throw ShapeError("activity mask geometry does not match the signal");
  }
  const std::size_t expected =
      signal.size() >= mask.window_len ? (signal.size() - mask.window_len) / mask.hop_len + 1 : 0;
  if (mask.size() != expected) {
    throw ShapeError("activity mask has " + std::to_string(mask.size()) + " frames, expected " +
                     std::to_string(expected));
  }

  MonoSignal out;
  out.sample_rate = signal.sample_rate;
  // Frames are emitted in order, so the union is tracked by a single cursor.
  std::size_t emitted_until = 0;
  for (std::size_t f = 0; f < mask.size(); ++f) {
    if (!mask.active[f]) continue;
    const std::size_t begin = std::max(f * mask.hop_len, emitted_until);
    const std::size_t end = f * mask.hop_len + mask.window_len;
    out.samples.insert(out.samples.end(), signal.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                       signal.samples.begin() + static_cast<std::ptrdiff_t>(end));
    emitted_until = end;
  }
  return out;
}

}  // namespace birdcall
