#include "birdcall/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "birdcall/error.hpp"

namespace birdcall {
namespace {

double normalized_entropy(std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || weights.size() < 2) return 0.0;
  double h = 0.0;
  for (double w : weights) {
    const double p = w / total;
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h / std::log2(static_cast<double>(weights.size()));
}

std::vector<std::size_t> range_columns(std::size_t first, std::size_t count) {
  std::vector<std::size_t> c(count);
  std::iota(c.begin(), c.end(), first);
  return c;
}

constexpr std::size_t col(Feature f) { return static_cast<std::size_t>(f); }

}  // namespace

const std::vector<std::string>& canonical_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = {"zcr",
                                  "energy",
                                  "energy_entropy",
                                  "spectral_centroid",
                                  "spectral_spread",
                                  "spectral_entropy",
                                  "spectral_flux",
                                  "spectral_rolloff"};
    for (int i = 1; i <= 13; ++i) n.push_back("mfcc_" + std::to_string(i));
    for (auto c : kChromaNames) n.push_back("chroma_" + std::string(c));
    n.push_back("chroma_deviation");
    return n;
  }();
  return names;
}

const std::vector<std::string>& FeatureSet::all_names() {
  static const std::vector<std::string> names = {"Set1", "Set2", "Set3", "Set4", "Set5"};
  return names;
}

FeatureSet FeatureSet::named(std::string_view name) {
  const auto mfcc = range_columns(col(Feature::mfcc_first), 13);
  const auto chroma = range_columns(col(Feature::chroma_first), 12);
  if (name == "Set1") return {"Set1", mfcc};
  if (name == "Set2") return {"Set2", chroma};
  if (name == "Set3") {
    auto c = mfcc;
    c.insert(c.end(), chroma.begin(), chroma.end());
    return {"Set3", c};
  }
  if (name == "Set4") {
    return {"Set4",
            {col(Feature::spectral_centroid), col(Feature::spectral_spread),
             col(Feature::spectral_entropy), col(Feature::spectral_flux),
             col(Feature::spectral_rolloff)}};
  }
  if (name == "Set5") return {"Set5", range_columns(0, kFeatureCount)};
  throw InvalidArgument("unknown feature set '" + std::string(name) + "' (expected Set1..Set5)");
}

std::vector<std::string> FeatureSet::member_names() const {
  std::vector<std::string> out;
  out.reserve(columns_.size());
  for (auto c : columns_) out.push_back(canonical_feature_names()[c]);
  return out;
}

std::vector<double> FeatureMatrix::column(std::size_t feature) const {
  std::vector<double> out(frames);
  for (std::size_t t = 0; t < frames; ++t) out[t] = at(t, feature);
  return out;
}

double zcr(std::span<const double> frame) {
  if (frame.size() < 2) throw InvalidArgument("zero-crossing rate needs at least two samples");
  std::size_t crossings = 0;
  for (std::size_t x = 1; x < frame.size(); ++x) {
    if (frame[x] * frame[x - 1] < 0.0) ++crossings;
  }
  return static_cast<double>(crossings) / static_cast<double>(frame.size() - 1);
}

double energy(std::span<const double> frame) {
  if (frame.empty()) throw InvalidArgument("energy of an empty frame");
  double acc = 0.0;
  for (double x : frame) acc += x * x;
  return acc / static_cast<double>(frame.size());
}

double entropy_of_energy(std::span<const double> frame, std::size_t subframes) {
  if (subframes < 2) throw InvalidArgument("energy entropy needs at least two sub-frames");
  const std::size_t sub_len = frame.size() / subframes;
  if (sub_len == 0) throw InvalidArgument("frame shorter than the sub-frame count");
  std::vector<double> e(subframes, 0.0);
  for (std::size_t j = 0; j < subframes; ++j) {
    for (std::size_t n = 0; n < sub_len; ++n) {
      const double x = frame[j * sub_len + n];
      e[j] += x * x;
    }
  }
  return normalized_entropy(e);
}

double spectral_centroid(const Spectrum& spec) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < spec.bins(); ++k) {
    num += spec.frequencies[k] * spec.magnitudes[k];
    den += spec.magnitudes[k];
  }
  if (!(den > 0.0)) {
    spdlog::debug("spectral centroid of an all-zero spectrum set to 0");
    return 0.0;
  }
  return num / den;
}

double spectral_spread(const Spectrum& spec, double centroid) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < spec.bins(); ++k) {
    const double d = spec.frequencies[k] - centroid;
    num += d * d * spec.magnitudes[k];
    den += spec.magnitudes[k];
  }
  if (!(den > 0.0)) return 0.0;
  return std::sqrt(num / den);
}

double spectral_entropy(const Spectrum& spec) {
  std::vector<double> power(spec.bins());
  for (std::size_t k = 0; k < spec.bins(); ++k) power[k] = spec.magnitudes[k] * spec.magnitudes[k];
  return normalized_entropy(power);
}

double spectral_flux(const Spectrum& current, const Spectrum& previous, double norm) {
  if (current.bins() != previous.bins()) throw ShapeError("spectral flux of spectra with different bin counts");
  const double sc = std::accumulate(current.magnitudes.begin(), current.magnitudes.end(), 0.0);
  const double sp = std::accumulate(previous.magnitudes.begin(), previous.magnitudes.end(), 0.0);
  double acc = 0.0;
  for (std::size_t k = 0; k < current.bins(); ++k) {
    const double a = sc > 0.0 ? current.magnitudes[k] / sc : 0.0;
    const double b = sp > 0.0 ? previous.magnitudes[k] / sp : 0.0;
    acc += std::pow(std::abs(a - b), norm);
  }
  return std::pow(acc, 1.0 / norm);
}

double spectral_rolloff(const Spectrum& spec, double threshold) {
  const std::size_t n = spec.bins();
  if (n == 0) return 0.0;
  std::vector<double> cumulative(n);
  std::partial_sum(spec.magnitudes.begin(), spec.magnitudes.end(), cumulative.begin());
  const double total = cumulative.back();
  if (!(total > 0.0)) return 0.0;
  const double target = threshold * total;
  const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), target);
  const auto index = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative.begin(), n - 1));
  return static_cast<double>(index + 1) / static_cast<double>(n);
}

MelFilterbank build_mel_filterbank(int sample_rate, std::size_t n_fft) {
  return MelFilterbank(sample_rate, n_fft);
}

std::vector<double> mfcc(const Spectrum& spec, const MelFilterbank& bank, std::size_t kept,
                         double log_floor) {
  if (spec.bins() != bank.bins() || spec.sample_rate != bank.sample_rate()) {
    throw ShapeError("filterbank geometry does not match the spectrum");
  }
  if (kept > bank.size()) throw InvalidArgument("cannot keep more coefficients than filters");
  const double m = static_cast<double>(spec.frame_length);
  std::vector<double> power(spec.bins());
  for (std::size_t k = 0; k < spec.bins(); ++k) power[k] = spec.magnitudes[k] * spec.magnitudes[k] / m;
  auto energies = bank.apply(power);
  for (auto& e : energies) e = std::log(std::max(e, log_floor));
  auto coeffs = dct2_orthonormal(energies);
  coeffs.resize(kept);
  return coeffs;
}

std::array<double, 12> chroma_vector(const Spectrum& spec) {
  std::array<double, 12> acc{};
  std::array<std::size_t, 12> count{};
  for (std::size_t k = 0; k < spec.bins(); ++k) {
    const double f = spec.frequencies[k];
    if (f < 27.5) continue;
    const auto p = static_cast<long>(std::lround(12.0 * std::log2(f / 440.0)));
    const auto cls = static_cast<std::size_t>(((p % 12) + 12) % 12);
    acc[cls] += spec.magnitudes[k] * spec.magnitudes[k];
    ++count[cls];
  }
  double total = 0.0;
  for (std::size_t c = 0; c < 12; ++c) {
    if (count[c] > 0) acc[c] /= static_cast<double>(count[c]);
    total += acc[c];
  }
  if (!(total > 0.0)) return {};
  for (auto& v : acc) v /= total;
  return acc;
}

double chroma_deviation(std::span<const double> chroma) {
  if (chroma.size() != 12) throw InvalidArgument("chroma deviation needs exactly 12 values");
  const double mean = std::accumulate(chroma.begin(), chroma.end(), 0.0) / 12.0;
  double acc = 0.0;
  for (double c : chroma) acc += (c - mean) * (c - mean);
  return std::sqrt(acc / 12.0);
}

std::array<double, kFeatureCount> frame_features(std::span<const double> frame,
                                                 const Spectrum& spec, const Spectrum* previous,
                                                 const MelFilterbank& bank,
                                                 const FeatureConfig& cfg) {
  std::array<double, kFeatureCount> f{};
  f[col(Feature::zcr)] = zcr(frame);
  f[col(Feature::energy)] = energy(frame);
  f[col(Feature::energy_entropy)] = entropy_of_energy(frame, cfg.energy_entropy_subframes);
  const double centroid = spectral_centroid(spec);
  f[col(Feature::spectral_centroid)] = centroid;
  f[col(Feature::spectral_spread)] = spectral_spread(spec, centroid);
  f[col(Feature::spectral_entropy)] = spectral_entropy(spec);
  f[col(Feature::spectral_flux)] = previous ? spectral_flux(spec, *previous, cfg.flux_norm) : 0.0;
  f[col(Feature::spectral_rolloff)] = spectral_rolloff(spec, cfg.rolloff_threshold);
  const auto cepstrum = mfcc(spec, bank, 13, cfg.log_floor);
  std::copy(cepstrum.begin(), cepstrum.end(), f.begin() + col(Feature::mfcc_first));
  const auto chroma = chroma_vector(spec);
  std::copy(chroma.begin(), chroma.end(), f.begin() + col(Feature::chroma_first));
  f[col(Feature::chroma_deviation)] = chroma_deviation(chroma);
  return f;
}

FeatureMatrix extract_features(const MonoSignal& signal, const FrameConfig& frame_cfg,
                               const FeatureConfig& feat_cfg, const FeatureSet& set) {
  if (!(feat_cfg.rolloff_threshold > 0.0 && feat_cfg.rolloff_threshold < 1.0)) {
    throw InvalidArgument("roll-off threshold must lie in (0, 1)");
  }
  if (feat_cfg.flux_norm < 1.0) throw InvalidArgument("flux norm must be >= 1");
  if (feat_cfg.mfcc_kept != 13) throw InvalidArgument("the feature layout carries exactly 13 MFCCs");

  const FrameSeries frames = frame_signal(signal, frame_cfg);
  const std::size_t n_fft = std::max<std::size_t>(2, next_power_of_two(frames.window_len()));
  const MelFilterbank bank(signal.sample_rate, n_fft);

  FeatureMatrix m;
  m.feature_names = set.member_names();
  m.frames = frames.size();
  m.window_len = frames.window_len();
  m.hop_len = frames.hop_len();
  m.sample_rate = signal.sample_rate;
  m.values.resize(m.frames * set.size());

  Spectrum previous;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto frame = frames[t];
    Spectrum spec = fft_magnitude(frame, true, signal.sample_rate);
    const auto all = frame_features(frame, spec, t == 0 ? nullptr : &previous, bank, feat_cfg);
    for (std::size_t j = 0; j < set.size(); ++j) m.values[t * set.size() + j] = all[set.columns()[j]];
    previous = std::move(spec);
  }
  for (double v : m.values) {
    if (!std::isfinite(v)) throw Error("non-finite feature value");
  }
  return m;
}

void write_feature_csv(std::ostream& os, const FeatureMatrix& m) {
  for (std::size_t j = 0; j < m.features(); ++j) os << (j ? "," : "") << m.feature_names[j];
  os << '\n';
  char buf[32];
  for (std::size_t t = 0; t < m.frames; ++t) {
    for (std::size_t j = 0; j < m.features(); ++j) {
      const int n = std::snprintf(buf, sizeof buf, "%.9g", m.at(t, j));
      if (j) os << ',';
      os.write(buf, n);
    }
    os << '\n';
  }
}

FeatureMatrix read_feature_csv(std::istream& is) {
  FeatureMatrix m;
  std::string line;
  if (!std::getline(is, line)) throw FormatError("feature cache is empty");
  {
    std::stringstream header(line);
    std::string name;
    while (std::getline(header, name, ',')) m.feature_names.push_back(name);
  }
  if (m.feature_names.empty()) throw FormatError("feature cache header is empty");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::size_t fields = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      const char* comma = std::find(p, end, ',');
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(p, comma, v);
      if (ec != std::errc() || ptr != comma) throw FormatError("malformed value in feature cache");
      m.values.push_back(v);
      ++fields;
      p = comma + 1;
    }
    if (fields != m.features()) throw FormatError("feature cache row has the wrong field count");
    ++m.frames;
  }
  return m;
}

}  // namespace birdcall
