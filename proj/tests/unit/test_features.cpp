#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <vector>

#include "birdcall/dsp.hpp"
#include "birdcall/error.hpp"
#include "birdcall/features.hpp"
#include "test_support.hpp"

using namespace birdcall;

namespace {

// Spectrum over `bins` bins with f_k = k * step.
Spectrum make_spectrum(std::vector<double> mags, double step = 10.0) {
  Spectrum s;
  s.frequencies.resize(mags.size());
  for (std::size_t k = 0; k < mags.size(); ++k) s.frequencies[k] = static_cast<double>(k) * step;
  s.magnitudes = std::move(mags);
  s.n_fft = 2 * s.magnitudes.size();
  s.frame_length = s.n_fft;
  s.sample_rate = static_cast<int>(step * static_cast<double>(s.n_fft));
  return s;
}

std::vector<double> random_frame(birdcall::Rng& rng, std::size_t n) {
  auto f = bctest::noise(n, 0.3, rng);
  for (std::size_t i = 0; i < n; ++i) f[i] += 0.2 * std::sin(0.05 * static_cast<double>(i) * (1 + rng.uniform()));
  return f;
}

}  // namespace

// ---------------------------------------------------------------------- FFT

TEST(FftMagnitude, ImpulseIsFlat) {
  std::vector<double> x(64, 0.0);
  x[0] = 1.0;
  const auto s = fft_magnitude(x, false, 64);
  ASSERT_EQ(s.bins(), 32u);
  for (double m : s.magnitudes) EXPECT_NEAR(m, 1.0, 1e-15);
}

TEST(FftMagnitude, CosineAtBinFrequencyHasSinglePeak) {
  std::vector<double> x(128);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = std::cos(2.0 * std::numbers::pi * 5.0 * n / 128.0);
  const auto s = fft_magnitude(x, false, 128);
  for (std::size_t k = 0; k < s.bins(); ++k) {
    if (k == 5) EXPECT_NEAR(s.magnitudes[k], 64.0, 1e-9);
    else EXPECT_LT(s.magnitudes[k], 1e-9) << k;
  }
}

TEST(FftMagnitude, MatchesNaiveDft) {
  birdcall::Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = bctest::noise(64, 1.0, rng);
    const auto s = fft_magnitude(x, false, 64);
    EXPECT_LE(bctest::norm_rel_err(s.magnitudes, bctest::naive_dft_magnitude(x, 64)), 1e-9);
  }
}

TEST(FftMagnitude, ZeroPadsToPowerOfTwo) {
  const auto s = fft_magnitude(std::vector<double>(800, 0.1), true, 16000);
  EXPECT_EQ(s.n_fft, 1024u);
  EXPECT_EQ(s.bins(), 512u);
  EXPECT_EQ(s.frame_length, 800u);
  EXPECT_DOUBLE_EQ(s.frequencies[1], 16000.0 / 1024.0);
}

TEST(HammingWindow, Endpoints) {
  const auto w = hamming_window(11);
  EXPECT_NEAR(w.front(), 0.08, 1e-15);
  EXPECT_NEAR(w.back(), 0.08, 1e-15);
  EXPECT_NEAR(w[5], 1.0, 1e-15);
}

// --------------------------------------------------------- time-domain

TEST(Zcr, Examples) {
  EXPECT_EQ(zcr(std::vector<double>{1, -1, 1, -1}), 1.0);
  EXPECT_EQ(zcr(std::vector<double>{0.1, 0.2, 0.3}), 0.0);
  EXPECT_THROW(zcr(std::vector<double>{1.0}), InvalidArgument);
}

TEST(Energy, Examples) {
  EXPECT_EQ(energy(std::vector<double>{3, 4}), 12.5);
  EXPECT_EQ(energy(std::vector<double>(8, 0.0)), 0.0);
}

TEST(EnergyEntropy, Extremes) {
  EXPECT_NEAR(entropy_of_energy(std::vector<double>(100, 0.5), 10), 1.0, 1e-12);
  std::vector<double> point(100, 0.0);
  point[3] = 1.0;
  EXPECT_EQ(entropy_of_energy(point, 10), 0.0);
  EXPECT_EQ(entropy_of_energy(std::vector<double>(100, 0.0), 10), 0.0);
}

TEST(EnergyEntropy, TruncatesRemainder) {
  std::vector<double> x(105, 0.5);
  for (std::size_t i = 100; i < 105; ++i) x[i] = 100.0;  // ignored tail
  EXPECT_NEAR(entropy_of_energy(x, 10), 1.0, 1e-12);
}

// ------------------------------------------------------------- spectral

TEST(SpectralCentroid, Examples) {
  std::vector<double> m(200, 0.0);
  m[100] = 3.0;
  EXPECT_DOUBLE_EQ(spectral_centroid(make_spectrum(m)), 1000.0);
  std::fill(m.begin(), m.end(), 0.0);
  m[50] = 1.0;
  m[150] = 1.0;
  EXPECT_DOUBLE_EQ(spectral_centroid(make_spectrum(m)), 1000.0);
  EXPECT_EQ(spectral_centroid(make_spectrum(std::vector<double>(10, 0.0))), 0.0);
}

TEST(SpectralSpread, Examples) {
  std::vector<double> m(200, 0.0);
  m[100] = 1.0;
  auto s = make_spectrum(m);
  EXPECT_EQ(spectral_spread(s, spectral_centroid(s)), 0.0);
  m[100] = 0.0;
  m[70] = 2.0;
  m[130] = 2.0;
  s = make_spectrum(m);
  EXPECT_NEAR(spectral_spread(s, spectral_centroid(s)), 300.0, 1e-9);
  EXPECT_EQ(spectral_spread(make_spectrum(std::vector<double>(10, 0.0)), 0.0), 0.0);
}

TEST(SpectralEntropy, Examples) {
  EXPECT_NEAR(spectral_entropy(make_spectrum(std::vector<double>(64, 2.0))), 1.0, 1e-12);
  std::vector<double> m(64, 0.0);
  m[9] = 1.0;
  EXPECT_EQ(spectral_entropy(make_spectrum(m)), 0.0);
  EXPECT_EQ(spectral_entropy(make_spectrum(std::vector<double>(64, 0.0))), 0.0);
}

TEST(SpectralFlux, Examples) {
  birdcall::Rng rng(4);
  std::vector<double> a(50), b(50);
  for (auto& v : a) v = rng.uniform();
  for (auto& v : b) v = rng.uniform();
  const auto sa = make_spectrum(a);
  EXPECT_EQ(spectral_flux(sa, sa), 0.0);
  auto scaled = a;
  for (auto& v : scaled) v *= 10.0;
  EXPECT_NEAR(spectral_flux(make_spectrum(scaled), sa), 0.0, 1e-15);

  const double sum_a = std::accumulate(a.begin(), a.end(), 0.0);
  const double sum_b = std::accumulate(b.begin(), b.end(), 0.0);
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += std::pow(a[k] / sum_a - b[k] / sum_b, 2);
  EXPECT_NEAR(spectral_flux(sa, make_spectrum(b)), std::sqrt(acc), 1e-15);
  EXPECT_THROW(spectral_flux(sa, make_spectrum(std::vector<double>(49, 1.0))), ShapeError);
}

TEST(SpectralRolloff, Examples) {
  EXPECT_DOUBLE_EQ(spectral_rolloff(make_spectrum(std::vector<double>(100, 1.0)), 0.9), 0.90);
  std::vector<double> m(40, 0.0);
  m[0] = 5.0;
  EXPECT_DOUBLE_EQ(spectral_rolloff(make_spectrum(m), 0.9), 1.0 / 40.0);
  birdcall::Rng rng(8);
  std::vector<double> pos(77);
  for (auto& v : pos) v = 0.1 + rng.uniform();
  EXPECT_DOUBLE_EQ(spectral_rolloff(make_spectrum(pos), 1.0 - 1e-15), 1.0);
  EXPECT_EQ(spectral_rolloff(make_spectrum(std::vector<double>(10, 0.0)), 0.9), 0.0);
}

// ---------------------------------------------------------- mel / MFCC

TEST(MelFilterbank, FortyFiltersAtCdRate) {
  const auto bank = build_mel_filterbank(44100, 4096);
  EXPECT_EQ(bank.size(), 40u);
  EXPECT_EQ(bank.bins(), 2048u);
}

TEST(MelFilterbank, CenterLadder) {
  const auto c = MelFilterbank::center_ladder();
  ASSERT_EQ(c.size(), 42u);
  for (std::size_t i = 0; i < 14; ++i) EXPECT_NEAR(c[i], 133.33 + 66.67 * static_cast<double>(i), 1e-9);
  EXPECT_NEAR(c[13], 133.33 + 13 * 66.67, 1e-9);
  EXPECT_NEAR(c[14], (133.33 + 13 * 66.67) * 1.0711703, 1e-9);
  for (std::size_t i = 15; i < 42; ++i) EXPECT_NEAR(c[i] / c[i - 1], 1.0711703, 1e-12);
}

TEST(MelFilterbank, TriangleShape) {
  const auto bank = build_mel_filterbank(44100, 4096);
  const auto& c = bank.centers();
  for (std::size_t i = 0; i < bank.size(); ++i) {
    EXPECT_EQ(bank.response(i, c[i]), 0.0);
    EXPECT_EQ(bank.response(i, c[i + 2]), 0.0);
    EXPECT_NEAR(bank.response(i, c[i + 1]), 2.0 / (c[i + 2] - c[i]), 1e-15);
    EXPECT_LT(bank.response(i, 0.5 * (c[i] + c[i + 1])), bank.response(i, c[i + 1]));
  }
}

TEST(MelFilterbank, RejectsLowNyquist) { EXPECT_THROW(build_mel_filterbank(200, 64), InvalidArgument); }

TEST(Dct, ConstantInputOnlyDc) {
  const auto out = dct2_orthonormal(std::vector<double>(40, 2.5));
  EXPECT_NEAR(out[0], 2.5 * std::sqrt(40.0), 1e-12);
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_NEAR(out[i], 0.0, 1e-12);
}

TEST(Dct, InverseRecoversInput) {
  birdcall::Rng rng(12);
  const auto x = bctest::noise(40, 3.0, rng);
  const auto back = idct2_orthonormal(dct2_orthonormal(x));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back[i], x[i], 1e-9);
}

// Silence floors every filter energy, so all log energies are equal.
TEST(Mfcc, EqualFilterEnergiesLeaveOnlyFirstCoefficient) {
  const auto bank = build_mel_filterbank(16000, 1024);
  Spectrum s = fft_magnitude(std::vector<double>(800, 0.0), true, 16000);
  const auto c = mfcc(s, bank);
  ASSERT_EQ(c.size(), 13u);
  EXPECT_NEAR(c[0], std::log(1e-10) * std::sqrt(40.0), 1e-9);
  for (std::size_t i = 1; i < 13; ++i) EXPECT_NEAR(c[i], 0.0, 1e-9);
}

TEST(Mfcc, GeometryMismatchThrows) {
  const auto bank = build_mel_filterbank(16000, 1024);
  const auto s = fft_magnitude(std::vector<double>(400, 0.1), true, 16000);
  EXPECT_THROW(mfcc(s, bank), ShapeError);
}

// ---------------------------------------------------------------- chroma

TEST(Chroma, PureA440) {
  const auto x = bctest::tone(440.0, 0.05, 16000, 0.5);
  const auto chroma = chroma_vector(fft_magnitude(x, true, 16000));
  const auto best = std::max_element(chroma.begin(), chroma.end()) - chroma.begin();
  EXPECT_EQ(best, 0);
  EXPECT_NEAR(std::accumulate(chroma.begin(), chroma.end(), 0.0), 1.0, 1e-12);
}

TEST(Chroma, ZeroSpectrumIsZero) {
  const auto chroma = chroma_vector(make_spectrum(std::vector<double>(64, 0.0)));
  for (double v : chroma) EXPECT_EQ(v, 0.0);
}

TEST(Chroma, SumsToOne) {
  birdcall::Rng rng(13);
  for (int t = 0; t < 10; ++t) {
    const auto chroma = chroma_vector(fft_magnitude(bctest::noise(800, 0.3, rng), true, 16000));
    EXPECT_NEAR(std::accumulate(chroma.begin(), chroma.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(ChromaDeviation, Examples) {
  EXPECT_EQ(chroma_deviation(std::vector<double>(12, 1.0 / 12.0)), 0.0);
  std::vector<double> one(12, 0.0);
  one[0] = 1.0;
  const double m = 1.0 / 12.0;
  EXPECT_NEAR(chroma_deviation(one), std::sqrt((11 * m * m + (1 - m) * (1 - m)) / 12.0), 1e-15);
  EXPECT_THROW(chroma_deviation(std::vector<double>(11, 0.0)), InvalidArgument);
}

// --------------------------------------------------------- whole frames

TEST(FrameFeatures, MatchOracleOnRandomFrames) {
  birdcall::Rng rng(2024);
  const int fs = 16000;
  const auto bank = build_mel_filterbank(fs, 1024);
  const FeatureConfig cfg;
  double worst = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const auto prev = random_frame(rng, 800);
    const auto cur = random_frame(rng, 800);
    const auto sp = fft_magnitude(prev, true, fs);
    const auto sc = fft_magnitude(cur, true, fs);
    const auto got = frame_features(cur, sc, &sp, bank, cfg);
    const auto want = bctest::oracle_features({cur, prev}, fs);
    for (std::size_t j = 0; j < kFeatureCount; ++j) worst = std::max(worst, bctest::rel_err(got[j], want[j]));
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(FrameFeatures, GainInvariance) {
  birdcall::Rng rng(77);
  const int fs = 16000;
  const auto bank = build_mel_filterbank(fs, 1024);
  const auto x = random_frame(rng, 800);
  const auto p = random_frame(rng, 800);
  const double k = 3.0;
  auto kx = x, kp = p;
  for (auto& v : kx) v *= k;
  for (auto& v : kp) v *= k;
  const auto sp = fft_magnitude(p, true, fs), skp = fft_magnitude(kp, true, fs);
  const auto a = frame_features(x, fft_magnitude(x, true, fs), &sp, bank, {});
  const auto b = frame_features(kx, fft_magnitude(kx, true, fs), &skp, bank, {});
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    if (j == static_cast<std::size_t>(Feature::energy)) {
      EXPECT_NEAR(b[j], k * k * a[j], 1e-12 * b[j]);
    } else if (j == static_cast<std::size_t>(Feature::mfcc_first)) {
      EXPECT_NEAR(b[j] - a[j], std::log(k * k) * std::sqrt(40.0), 1e-9);
    } else {
      EXPECT_NEAR(b[j], a[j], 1e-9 * std::max(1.0, std::abs(a[j]))) << canonical_feature_names()[j];
    }
  }
}

TEST(FeatureSet, Sizes) {
  EXPECT_EQ(FeatureSet::named("Set1").size(), 13u);
  EXPECT_EQ(FeatureSet::named("Set2").size(), 12u);
  EXPECT_EQ(FeatureSet::named("Set3").size(), 25u);
  EXPECT_EQ(FeatureSet::named("Set4").size(), 5u);
  EXPECT_EQ(FeatureSet::named("Set5").size(), 34u);
  EXPECT_THROW(FeatureSet::named("Set6"), InvalidArgument);
  const auto set4 = FeatureSet::named("Set4").member_names();
  EXPECT_EQ(set4, (std::vector<std::string>{"spectral_centroid", "spectral_spread", "spectral_entropy",
                                            "spectral_flux", "spectral_rolloff"}));
}

TEST(FeatureSet, CanonicalOrder) {
  const auto& n = canonical_feature_names();
  ASSERT_EQ(n.size(), 34u);
  EXPECT_EQ(n[0], "zcr");
  EXPECT_EQ(n[7], "spectral_rolloff");
  EXPECT_EQ(n[8], "mfcc_1");
  EXPECT_EQ(n[20], "mfcc_13");
  EXPECT_EQ(n[21], "chroma_A");
  EXPECT_EQ(n[32], "chroma_G#");
  EXPECT_EQ(n[33], "chroma_deviation");
}

TEST(ExtractFeatures, ShapesAndRanges) {
  birdcall::Rng rng(99);
  const MonoSignal sig{bctest::tone_burst(2000.0, 16000, rng), 16000};
  const auto m = extract_features(sig, {}, {}, FeatureSet::named("Set5"));
  EXPECT_EQ(m.features(), 34u);
  EXPECT_EQ(m.frames, (sig.size() - 800) / 400 + 1);
  for (std::size_t t = 0; t < m.frames; ++t) {
    for (auto j : {0, 2, 5, 7}) {
      EXPECT_GE(m.at(t, j), 0.0);
      EXPECT_LE(m.at(t, j), 1.0);
    }
    EXPECT_GE(m.at(t, 3), 0.0);
    EXPECT_LE(m.at(t, 3), 8000.0);
    EXPECT_LE(m.at(t, 4), 8000.0);
  }
  EXPECT_EQ(m.at(0, static_cast<std::size_t>(Feature::spectral_flux)), 0.0);

  const auto set3 = extract_features(sig, {}, {}, FeatureSet::named("Set3"));
  EXPECT_EQ(set3.features(), 25u);
  for (std::size_t t = 0; t < m.frames; ++t) {
    for (std::size_t j = 0; j < 25; ++j) EXPECT_EQ(set3.at(t, j), m.at(t, 8 + j));
  }
  EXPECT_EQ(extract_features(sig, {}, {}, FeatureSet::named("Set4")).features(), 5u);
}

TEST(ExtractFeatures, TooShortSignal) {
  const MonoSignal sig{std::vector<double>(100, 0.1), 16000};
  EXPECT_THROW(extract_features(sig, {}, {}, FeatureSet::named("Set3")), TooShortError);
}

TEST(FeatureCsv, RoundTripsToNineDigits) {
  birdcall::Rng rng(5);
  const MonoSignal sig{bctest::noise(4000, 0.2, rng), 16000};
  const auto m = extract_features(sig, {}, {}, FeatureSet::named("Set5"));
  std::stringstream ss;
  write_feature_csv(ss, m);
  const auto back = read_feature_csv(ss);
  EXPECT_EQ(back.feature_names, m.feature_names);
  ASSERT_EQ(back.frames, m.frames);
  for (std::size_t i = 0; i < m.values.size(); ++i) EXPECT_LE(bctest::rel_err(back.values[i], m.values[i]), 1e-8);
  // Writing the parsed values again is byte-stable.
  std::stringstream a, b;
  write_feature_csv(a, back);
  std::stringstream again(a.str());
  write_feature_csv(b, read_feature_csv(again));
  EXPECT_EQ(a.str(), b.str());
}

TEST(FeatureCsv, RejectsGarbage) {
  std::stringstream bad("zcr,energy\n0.1,abc\n");
  EXPECT_THROW(read_feature_csv(bad), FormatError);
  std::stringstream ragged("zcr,energy\n0.1\n");
  EXPECT_THROW(read_feature_csv(ragged), FormatError);
}
