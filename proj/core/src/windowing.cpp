#include "birdcall/windowing.hpp"

#include <algorithm>
#include <iterator>
#include <string>

#include "birdcall/error.hpp"

namespace birdcall {

std::size_t segment_count(std::size_t frames, std::size_t seg_len) {
  return (frames + seg_len - 1) / seg_len;
}

std::vector<std::vector<double>> segment_feature(std::span<const double> column, std::size_t seg_len) {
  if (column.empty()) throw InvalidArgument("cannot segment an empty feature column");
  if (seg_len == 0) throw InvalidArgument("segment length must be positive");
  std::vector<std::vector<double>> segments(segment_count(column.size(), seg_len),
                                            std::vector<double>(seg_len, 0.0));
  for (std::size_t t = 0; t < column.size(); ++t) segments[t / seg_len][t % seg_len] = column[t];
  return segments;
}

Image reshape_segment(std::span<const double> segment, std::size_t rows, std::size_t cols) {
  if (segment.size() != rows * cols) {
    throw ShapeError("segment of " + std::to_string(segment.size()) + " values cannot fill a " +
                     std::to_string(rows) + "x" + std::to_string(cols) + " image");
  }
  return Image{rows, cols, std::vector<double>(segment.begin(), segment.end())};
}

std::vector<Sample> record_samples(const FeatureMatrix& features, const std::string& record_id,
                                   int label) {
  if (features.frames == 0) throw InvalidArgument("record '" + record_id + "' has no frames");
  const std::size_t n_feat = features.features();
  const std::size_t segments = segment_count(features.frames);

  std::vector<Sample> out(segments);
  for (auto& s : out) {
    s.record_id = record_id;
    s.label = label;
    s.image_count = n_feat;
    s.rows = kImageRows;
    s.cols = kImageCols;
    s.pixels.assign(n_feat * kSegmentLength, 0.0);
  }
  for (std::size_t j = 0; j < n_feat; ++j) {
    const auto column = features.column(j);
    const auto chunks = segment_feature(column);
    for (std::size_t s = 0; s < segments; ++s) {
      const Image img = reshape_segment(chunks[s]);
      std::copy(img.pixels.begin(), img.pixels.end(),
                out[s].pixels.begin() + static_cast<std::ptrdiff_t>(j * kSegmentLength));
    }
  }
  return out;
}

std::vector<Sample> build_dataset(const std::vector<LabeledRecord>& records) {
  std::vector<Sample> out;
  if (records.empty()) return out;
  const auto& names = records.front().features.feature_names;
  for (const auto& r : records) {
    if (r.features.feature_names != names) {
      throw FeatureSetMismatch("record '" + r.record_id + "' uses a different feature set");
    }
    auto samples = record_samples(r.features, r.record_id, r.label);
    std::move(samples.begin(), samples.end(), std::back_inserter(out));
  }
  return out;
}

}  // namespace birdcall
