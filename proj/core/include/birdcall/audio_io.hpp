#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace birdcall {

// Single-channel samples in [-1, 1] at the recording's native rate.
struct MonoSignal {
  std::vector<double> samples;
  int sample_rate = 0;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  double duration_seconds() const noexcept {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

enum class SampleFormat { pcm_int, ieee_float };

// Raw decoded channels. Integer PCM keeps its integer values (8-bit data is
// re-centred to signed); float data keeps the stored float values.
struct DecodedWav {
  std::vector<std::vector<double>> channels;
  int sample_rate = 0;
  int bit_depth = 0;
  SampleFormat format = SampleFormat::pcm_int;
};

struct FrameConfig {
  double window_ms = 50.0;
  double hop_ms = 25.0;
};

// Converts a duration in milliseconds to samples, rounding half up.
std::size_t ms_to_samples(double ms, int sample_rate);

// Fixed-length windows over a copy of the source samples. Frame i starts at
// sample i * hop_len; trailing samples that cannot fill a window are dropped.
class FrameSeries {
 public:
  FrameSeries(std::vector<double> source, std::size_t window_len, std::size_t hop_len,
              int sample_rate);

  std::size_t size() const noexcept { return count_; }
  std::size_t window_len() const noexcept { return window_len_; }
  std::size_t hop_len() const noexcept { return hop_len_; }
  int sample_rate() const noexcept { return sample_rate_; }
  std::span<const double> source() const noexcept { return source_; }

  std::span<const double> operator[](std::size_t i) const {
    return std::span<const double>(source_).subspan(i * hop_len_, window_len_);
  }
  std::size_t start(std::size_t i) const noexcept { return i * hop_len_; }

 private:
  std::vector<double> source_;
  std::size_t window_len_;
  std::size_t hop_len_;
  int sample_rate_;
  std::size_t count_;
};

DecodedWav decode_wav(std::span<const std::uint8_t> bytes);
DecodedWav read_wav_file(const std::filesystem::path& path);

MonoSignal to_mono_normalized(const std::vector<std::vector<double>>& channels, int bit_depth,
                              SampleFormat format, int sample_rate);
MonoSignal to_mono_normalized(const DecodedWav& wav);

MonoSignal load_mono(const std::filesystem::path& path);

FrameSeries frame_signal(const MonoSignal& signal, const FrameConfig& cfg);

}  // namespace birdcall
