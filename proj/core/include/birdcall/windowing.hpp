#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "birdcall/features.hpp"

namespace birdcall {

inline constexpr std::size_t kSegmentLength = 1000;
inline constexpr std::size_t kImageRows = 25;
inline constexpr std::size_t kImageCols = 40;

// Row-major single-channel image.
struct Image {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> pixels;

  double operator()(std::size_t r, std::size_t c) const { return pixels[r * cols + c]; }
};

// One network input: `image_count` images of identical shape stored back to
// back in canonical feature order.
struct Sample {
  std::string record_id;
  int label = 0;
  std::size_t image_count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> pixels;

  std::size_t image_size() const noexcept { return rows * cols; }
  std::span<const double> image(std::size_t i) const {
    return std::span<const double>(pixels).subspan(i * image_size(), image_size());
  }
};

// Non-overlapping chunks of `seg_len` values; the last chunk is zero-padded.
std::vector<std::vector<double>> segment_feature(std::span<const double> column,
                                                 std::size_t seg_len = kSegmentLength);

// Element t lands at (t / cols, t % cols).
Image reshape_segment(std::span<const double> segment, std::size_t rows = kImageRows,
                      std::size_t cols = kImageCols);

std::size_t segment_count(std::size_t frames, std::size_t seg_len = kSegmentLength);

struct LabeledRecord {
  std::string record_id;
  int label = 0;
  FeatureMatrix features;
};

// All samples of one record, one per segment index.
std::vector<Sample> record_samples(const FeatureMatrix& features, const std::string& record_id,
                                   int label);

// One sample per (record, segment index). All records must share the same
// feature columns.
std::vector<Sample> build_dataset(const std::vector<LabeledRecord>& records);

}  // namespace birdcall
