#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "birdcall/audio_io.hpp"
#include "birdcall/dsp.hpp"

namespace birdcall {

struct FeatureConfig {
  double rolloff_threshold = 0.90;
  double flux_norm = 2.0;
  std::size_t energy_entropy_subframes = 10;
  std::size_t mfcc_kept = 13;
  double log_floor = 1e-10;
};

// Canonical column order of the 34 short-term features.
enum class Feature : std::size_t {
  zcr = 0,
  energy,
  energy_entropy,
  spectral_centroid,
  spectral_spread,
  spectral_entropy,
  spectral_flux,
  spectral_rolloff,
  mfcc_first,                         // mfcc_1 .. mfcc_13 occupy 8..20
  chroma_first = mfcc_first + 13,     // chroma_A .. chroma_G# occupy 21..32
  chroma_deviation = chroma_first + 12,
};

inline constexpr std::size_t kFeatureCount = 34;
inline constexpr std::array<std::string_view, 12> kChromaNames = {
    "A", "A#", "B", "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#"};

const std::vector<std::string>& canonical_feature_names();

class FeatureSet {
 public:
  // "Set1" .. "Set5"; throws InvalidArgument for anything else.
  static FeatureSet named(std::string_view name);
  static const std::vector<std::string>& all_names();

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::size_t>& columns() const noexcept { return columns_; }
  std::vector<std::string> member_names() const;
  std::size_t size() const noexcept { return columns_.size(); }

  friend bool operator==(const FeatureSet& a, const FeatureSet& b) { return a.name_ == b.name_; }

 private:
  FeatureSet(std::string name, std::vector<std::size_t> columns)
      : name_(std::move(name)), columns_(std::move(columns)) {}
  std::string name_;
  std::vector<std::size_t> columns_;
};

// T frames x F features, row major.
struct FeatureMatrix {
  std::vector<std::string> feature_names;
  std::vector<double> values;
  std::size_t frames = 0;
  std::size_t window_len = 0;
  std::size_t hop_len = 0;
  int sample_rate = 0;

  std::size_t features() const noexcept { return feature_names.size(); }
  double at(std::size_t frame, std::size_t feature) const { return values[frame * features() + feature]; }
  std::vector<double> column(std::size_t feature) const;
};

double zcr(std::span<const double> frame);
double energy(std::span<const double> frame);
double entropy_of_energy(std::span<const double> frame, std::size_t subframes);

double spectral_centroid(const Spectrum& spec);
double spectral_spread(const Spectrum& spec, double centroid);
double spectral_entropy(const Spectrum& spec);
double spectral_flux(const Spectrum& current, const Spectrum& previous, double norm = 2.0);
double spectral_rolloff(const Spectrum& spec, double threshold);

MelFilterbank build_mel_filterbank(int sample_rate, std::size_t n_fft);
std::vector<double> mfcc(const Spectrum& spec, const MelFilterbank& bank, std::size_t kept = 13,
                         double log_floor = 1e-10);

std::array<double, 12> chroma_vector(const Spectrum& spec);
double chroma_deviation(std::span<const double> chroma);

// All 34 features of one frame given its spectrum and the previous frame's
// spectrum (nullptr for the first frame of a record).
std::array<double, kFeatureCount> frame_features(std::span<const double> frame,
                                                 const Spectrum& spec, const Spectrum* previous,
                                                 const MelFilterbank& bank,
                                                 const FeatureConfig& cfg);

FeatureMatrix extract_features(const MonoSignal& signal, const FrameConfig& frame_cfg,
                               const FeatureConfig& feat_cfg, const FeatureSet& set);

// Comma-separated cache format: a header of feature names, one row per frame,
// values printed with 9 significant digits.
void write_feature_csv(std::ostream& os, const FeatureMatrix& m);
FeatureMatrix read_feature_csv(std::istream& is);

}  // namespace birdcall
