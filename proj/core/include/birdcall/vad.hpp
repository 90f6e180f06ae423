#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "birdcall/audio_io.hpp"

namespace birdcall {

struct VadConfig {
  double global_threshold = 0.6;
  double window_ms = 50.0;
  double hop_ms = 25.0;
  // Frames whose peak amplitude is below this floor are silent regardless of
  // the adaptive threshold. Without it an all-zero frame would count as
  // active (mean 0 is not below threshold 0).
  double silence_floor = 1e-4;
  double initial_adaptive_threshold = 0.0;
};

struct ActivityMask {
  std::vector<bool> active;
  std::size_t window_len = 0;
  std::size_t hop_len = 0;
  std::size_t source_len = 0;

  std::size_t size() const noexcept { return active.size(); }
  std::size_t active_count() const noexcept;
};

std::vector<double> square_frame(std::span<const double> frame);

// min + (max - min) * T over an already squared frame.
double primary_threshold(std::span<const double> squared_frame, double global_threshold);

// Running mean of primary thresholds: ((i - 1) * prev + primary) / i, i >= 1.
double adaptive_threshold_step(std::size_t i, double prev, double primary);

// A frame is silent when the mean of its squared samples is strictly below
// the adaptive threshold, or when its peak magnitude is below the floor.
ActivityMask detect_active_frames(const MonoSignal& signal, const VadConfig& cfg);

// Union of the sample ranges covered by active frames, in time order. An
// all-silent mask yields an empty signal.
MonoSignal extract_active_signal(const MonoSignal& signal, const ActivityMask& mask);

}  // namespace birdcall
