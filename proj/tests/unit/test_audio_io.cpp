#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "birdcall/audio_io.hpp"
#include "birdcall/error.hpp"
#include "test_support.hpp"

using namespace birdcall;

namespace {

std::vector<double> ramp(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = (static_cast<double>(i) - n / 2.0) / static_cast<double>(n);
  return v;
}

}  // namespace

TEST(DecodeWav, MonoSixteenBitKeepsLength) {
  const auto bytes = bctest::make_wav(ramp(100), {});
  const auto wav = decode_wav(bytes);
  ASSERT_EQ(wav.channels.size(), 1u);
  EXPECT_EQ(wav.channels[0].size(), 100u);
  EXPECT_EQ(wav.sample_rate, 16000);
  EXPECT_EQ(wav.bit_depth, 16);
}

TEST(DecodeWav, StereoYieldsTwoEqualChannels) {
  bctest::WavSpec spec;
  spec.channels = 2;
  const auto bytes = bctest::make_wav(ramp(200), spec);
  const auto wav = decode_wav(bytes);
  ASSERT_EQ(wav.channels.size(), 2u);
  EXPECT_EQ(wav.channels[0].size(), 100u);
  EXPECT_EQ(wav.channels[1].size(), 100u);
}

TEST(DecodeWav, HandBuiltHeaderRecoversExactIntegers) {
  // 44-byte canonical header, 16-bit mono at 8000 Hz, four samples.
  const std::vector<std::uint8_t> bytes = {
      'R', 'I', 'F', 'F', 44, 0, 0, 0, 'W', 'A', 'V', 'E',           //
      'f', 'm', 't', ' ', 16, 0, 0, 0, 1, 0, 1, 0,                    //
      0x40, 0x1F, 0, 0, 0x80, 0x3E, 0, 0, 2, 0, 16, 0,                //
      'd', 'a', 't', 'a', 8, 0, 0, 0,                                 //
      0xFF, 0x7F, 0x00, 0x80, 0x00, 0x00, 0x00, 0x40};
  ASSERT_EQ(bytes.size(), 52u);
  const auto wav = decode_wav(bytes);
  EXPECT_EQ(wav.sample_rate, 8000);
  ASSERT_EQ(wav.channels.size(), 1u);
  EXPECT_EQ(wav.channels[0], (std::vector<double>{32767, -32768, 0, 16384}));
}

TEST(DecodeWav, RoundTripsIntegerDepths) {
  for (int bits : {8, 16, 24, 32}) {
    bctest::WavSpec spec;
    spec.bits = bits;
    const auto src = ramp(64);
    const auto wav = decode_wav(bctest::make_wav(src, spec));
    ASSERT_EQ(wav.bit_depth, bits);
    const double full = std::ldexp(1.0, bits - 1);
    for (std::size_t i = 0; i < src.size(); ++i) {
      const double expected = std::clamp(std::round(src[i] * full), -full, full - 1.0);
      EXPECT_EQ(wav.channels[0][i], expected) << "bits=" << bits << " i=" << i;
    }
  }
}

TEST(DecodeWav, EightBitIsRecentred) {
  const std::vector<std::uint8_t> payload = {0, 128, 255};
  bctest::WavSpec spec;
  spec.bits = 8;
  const auto wav = decode_wav(bctest::make_wav_raw(payload, spec));
  EXPECT_EQ(wav.channels[0], (std::vector<double>{-128, 0, 127}));
}

TEST(DecodeWav, FloatAndExtensibleFormats) {
  bctest::WavSpec spec;
  spec.bits = 32;
  spec.ieee_float = true;
  const std::vector<double> src = {0.25, -0.5, 0.125};
  auto wav = decode_wav(bctest::make_wav(src, spec));
  EXPECT_EQ(wav.format, SampleFormat::ieee_float);
  EXPECT_EQ(wav.channels[0], src);

  spec.extensible = true;
  wav = decode_wav(bctest::make_wav(src, spec));
  EXPECT_EQ(wav.channels[0], src);

  bctest::WavSpec pcm_ext;
  pcm_ext.extensible = true;
  wav = decode_wav(bctest::make_wav(src, pcm_ext));
  EXPECT_EQ(wav.format, SampleFormat::pcm_int);
  EXPECT_EQ(wav.channels[0][1], -16384.0);
}

TEST(DecodeWav, CompressedCodecNamesItsTag) {
  bctest::WavSpec spec;
  spec.format_tag = 0x0055;  // MPEG layer 3
  try {
    decode_wav(bctest::make_wav(ramp(10), spec));
    FAIL() << "expected UnsupportedCodecError";
  } catch (const UnsupportedCodecError& e) {
    EXPECT_EQ(e.codec_tag(), 0x0055u);
    EXPECT_NE(std::string(e.what()).find("0x0055"), std::string::npos) << e.what();
  }
}

TEST(DecodeWav, MalformedInputsAreFormatErrors) {
  EXPECT_THROW(decode_wav(std::vector<std::uint8_t>{}), FormatError);
  const std::vector<std::uint8_t> junk(64, 0x5a);
  EXPECT_THROW(decode_wav(junk), FormatError);
  auto ok = bctest::make_wav(ramp(10), {});
  ok.resize(30);  // cut inside the fmt chunk
  EXPECT_THROW(decode_wav(ok), FormatError);
  bctest::WavSpec three;
  three.channels = 3;
  EXPECT_THROW(decode_wav(bctest::make_wav(ramp(30), three)), FormatError);
}

TEST(ToMonoNormalized, ScalesSixteenBit) {
  const auto m = to_mono_normalized({{16384, -16384}}, 16, SampleFormat::pcm_int, 8000);
  EXPECT_EQ(m.samples, (std::vector<double>{0.5, -0.5}));
  EXPECT_EQ(m.sample_rate, 8000);
}

TEST(ToMonoNormalized, OppositeStereoChannelsCancel) {
  const std::vector<double> left(50, 1.0);
  const std::vector<double> right(50, -1.0);
  const auto m = to_mono_normalized({left, right}, 32, SampleFormat::ieee_float, 8000);
  for (double v : m.samples) EXPECT_EQ(v, 0.0);
}

TEST(ToMonoNormalized, ConstantOffsetIsRemoved) {
  const auto m = to_mono_normalized({std::vector<double>(20, 1000.0)}, 16, SampleFormat::pcm_int, 8000);
  for (double v : m.samples) EXPECT_EQ(v, 0.0);
}

TEST(ToMonoNormalized, ClampsToUnitRange) {
  const auto m = to_mono_normalized({{1.0, 1.0, 1.0, -1.0}}, 32, SampleFormat::ieee_float, 8000);
  for (double v : m.samples) {
    EXPECT_LE(v, 1.0);
    EXPECT_GE(v, -1.0);
  }
  EXPECT_EQ(m.samples[3], -1.0);
}

TEST(ToMonoNormalized, EmptyInputThrows) {
  EXPECT_THROW(to_mono_normalized({std::vector<double>{}}, 16, SampleFormat::pcm_int, 8000), EmptySignalError);
  EXPECT_THROW(to_mono_normalized({}, 16, SampleFormat::pcm_int, 8000), EmptySignalError);
}

TEST(ToMonoNormalized, IdempotentOnZeroMeanFloat) {
  birdcall::Rng rng(3);
  auto x = bctest::noise(256, 0.2, rng);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  for (auto& v : x) v -= mean;
  const auto once = to_mono_normalized({x}, 32, SampleFormat::ieee_float, 8000);
  const auto twice = to_mono_normalized({once.samples}, 32, SampleFormat::ieee_float, 8000);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(twice.samples[i], once.samples[i], 1e-15);
}

TEST(LoadMono, ReadsFileFromDisk) {
  bctest::TempDir dir;
  const std::vector<double> src = {0.25, -0.25, 0.5, -0.5};
  bctest::write_wav(dir / "a.wav", src, 22050);
  const auto m = load_mono(dir / "a.wav");
  EXPECT_EQ(m.sample_rate, 22050);
  EXPECT_EQ(m.samples, src);
  EXPECT_THROW(load_mono(dir / "missing.wav"), Error);
}

TEST(MsToSamples, RoundsHalfUp) {
  EXPECT_EQ(ms_to_samples(50, 44100), 2205u);
  EXPECT_EQ(ms_to_samples(25, 44100), 1103u);
  EXPECT_EQ(ms_to_samples(50, 16000), 800u);
  EXPECT_EQ(ms_to_samples(25, 48000), 1200u);
}

TEST(FrameSignal, CountAndStarts) {
  MonoSignal s{std::vector<double>(200, 0.0), 1000};
  for (std::size_t i = 0; i < s.samples.size(); ++i) s.samples[i] = static_cast<double>(i);
  const auto f = frame_signal(s, {100.0, 50.0});
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f.window_len(), 100u);
  EXPECT_EQ(f.hop_len(), 50u);
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_EQ(f.start(i), 50 * i);
    EXPECT_EQ(f[i].front(), static_cast<double>(50 * i));
    EXPECT_EQ(f[i].size(), 100u);
  }
}

TEST(FrameSignal, ExactlyOneWindow) {
  const MonoSignal s{std::vector<double>(100, 0.1), 1000};
  EXPECT_EQ(frame_signal(s, {100.0, 50.0}).size(), 1u);
}

TEST(FrameSignal, DropsTrailingPartialWindow) {
  const MonoSignal s{std::vector<double>(249, 0.1), 1000};
  EXPECT_EQ(frame_signal(s, {100.0, 50.0}).size(), 3u);
}

TEST(FrameSignal, TooShortCarriesRequiredLength) {
  const MonoSignal s{std::vector<double>(99, 0.1), 1000};
  try {
    frame_signal(s, {100.0, 50.0});
    FAIL() << "expected TooShortError";
  } catch (const TooShortError& e) {
    EXPECT_EQ(e.required(), 100u);
    EXPECT_EQ(e.actual(), 99u);
  }
}

TEST(FrameSignal, FramesReconstructSourcePrefix) {
  birdcall::Rng rng(11);
  const MonoSignal s{bctest::noise(1000, 0.3, rng), 1000};
  const auto f = frame_signal(s, {100.0, 100.0});
  std::vector<double> rebuilt;
  for (std::size_t i = 0; i < f.size(); ++i) rebuilt.insert(rebuilt.end(), f[i].begin(), f[i].end());
  EXPECT_EQ(rebuilt, s.samples);
}
