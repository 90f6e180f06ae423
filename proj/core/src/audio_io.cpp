#include "birdcall/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>

#include "birdcall/error.hpp"

namespace birdcall {
namespace {

constexpr std::uint16_t kTagPcm = 0x0001;
constexpr std::uint16_t kTagFloat = 0x0003;
constexpr std::uint16_t kTagExtensible = 0xFFFE;

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, std::string_view tag) {
  return std::memcmp(b.data() + at, tag.data(), 4) == 0;
}

std::string codec_name(std::uint16_t tag) {
  switch (tag) {
    case 0x0002: return "MS ADPCM";
    case 0x0006: return "A-law";
    case 0x0007: return "mu-law";
    case 0x0011: return "IMA ADPCM";
    case 0x0050: return "MPEG";
    case 0x0055: return "MPEG Layer 3";
    case 0x00FF: return "AAC";
    default: return "unknown";
  }
}

std::string hex_tag(std::uint16_t tag) {
  std::ostringstream os;
  os << "0x" << std::hex << std::uppercase;
  os.width(4);
  os.fill('0');
  os << tag;
  return os.str();
}

double decode_sample(std::span<const std::uint8_t> b, std::size_t at, int bits, bool is_float) {
  if (is_float) {
    const std::uint32_t raw = read_u32(b, at);
    float f;
    std::memcpy(&f, &raw, sizeof f);
    return static_cast<double>(f);
  }
  switch (bits) {
    case 8:
      return static_cast<double>(static_cast<int>(b[at]) - 128);
    case 16:
      return static_cast<double>(static_cast<std::int16_t>(read_u16(b, at)));
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(b[at] | (b[at + 1] << 8) | (b[at + 2] << 16));
      if (v & 0x800000) v -= 0x1000000;
      return static_cast<double>(v);
    }
    case 32:
      return static_cast<double>(static_cast<std::int32_t>(read_u32(b, at)));
    default:
      return 0.0;
  }
}

}  // namespace

std::size_t ms_to_samples(double ms, int sample_rate) {
  return static_cast<std::size_t>(std::floor(ms * sample_rate / 1000.0 + 0.5));
}

FrameSeries::FrameSeries(std::vector<double> source, std::size_t window_len, std::size_t hop_len,
                         int sample_rate)
    : source_(std::move(source)),
      window_len_(window_len),
      hop_len_(hop_len),
      sample_rate_(sample_rate),
      count_(0) {
  if (window_len_ == 0 || hop_len_ == 0 || hop_len_ > window_len_) {
    throw InvalidArgument("frame geometry requires 0 < hop_len <= window_len");
  }
  if (source_.size() >= window_len_) count_ = (source_.size() - window_len_) / hop_len_ + 1;
}

DecodedWav decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw FormatError("not a RIFF/WAVE container");
  }

  bool have_fmt = false;
  std::uint16_t tag = 0;
  int channels = 0;
  int sample_rate = 0;
  int block_align = 0;
  int bits = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t chunk_size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;

    if (tag_is(bytes, pos, "fmt ")) {
      if (chunk_size < 16 || body + chunk_size > bytes.size()) {
        throw FormatError("truncated fmt chunk");
      }
      tag = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      sample_rate = static_cast<int>(read_u32(bytes, body + 4));
      block_align = read_u16(bytes, body + 12);
      bits = read_u16(bytes, body + 14);
      if (tag == kTagExtensible) {
        if (chunk_size < 40) throw FormatError("truncated WAVE_FORMAT_EXTENSIBLE header");
        tag = read_u16(bytes, body + 24);
      }
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      if (!have_fmt) throw FormatError("data chunk precedes fmt chunk");
      if (tag != kTagPcm && tag != kTagFloat) {
        throw UnsupportedCodecError(
            tag, "unsupported WAV codec " + hex_tag(tag) + " (" + codec_name(tag) + ")");
      }
      const bool is_float = tag == kTagFloat;
      if (is_float && bits != 32) {
        throw UnsupportedCodecError(tag, "unsupported float sample width " +
                                             std::to_string(bits) + " bits");
      }
      if (!is_float && bits != 8 && bits != 16 && bits != 24 && bits != 32) {
        throw UnsupportedCodecError(tag, "unsupported PCM sample width " +
                                             std::to_string(bits) + " bits");
      }
      if (channels < 1 || channels > 2) {
        throw FormatError("unsupported channel count " + std::to_string(channels));
      }
      if (sample_rate <= 0) throw FormatError("non-positive sample rate");
      const int bytes_per_sample = bits / 8;
      if (block_align != bytes_per_sample * channels) {
        throw FormatError("block alignment does not match channels and sample width");
      }

      // Writers that stream to disk sometimes leave the size field too large.
      const std::size_t available = std::min<std::size_t>(chunk_size, bytes.size() - body);
      const std::size_t frames = available / static_cast<std::size_t>(block_align);

      DecodedWav out;
      out.sample_rate = sample_rate;
      out.bit_depth = bits;
      out.format = is_float ? SampleFormat::ieee_float : SampleFormat::pcm_int;
      out.channels.assign(static_cast<std::size_t>(channels), std::vector<double>(frames));
      for (std::size_t f = 0; f < frames; ++f) {
        for (int c = 0; c < channels; ++c) {
          const std::size_t at = body + f * block_align + static_cast<std::size_t>(c) * bytes_per_sample;
          out.channels[static_cast<std::size_t>(c)][f] = decode_sample(bytes, at, bits, is_float);
        }
      }
      return out;
    }

    // Chunks are word aligned.
    pos = body + chunk_size + (chunk_size & 1u);
  }

  throw FormatError(have_fmt ? "missing data chunk" : "missing fmt chunk");
}

DecodedWav read_wav_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const UnsupportedCodecError& e) {
    throw UnsupportedCodecError(e.codec_tag(), path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

MonoSignal to_mono_normalized(const std::vector<std::vector<double>>& channels, int bit_depth,
                              SampleFormat format, int sample_rate) {
  if (channels.empty() || channels.front().empty()) {
    throw EmptySignalError("cannot normalize an empty signal");
  }
  const std::size_t n = channels.front().size();
  for (const auto& ch : channels) {
    if (ch.size() != n) throw ShapeError("channels differ in length");
  }

  MonoSignal out;
  out.sample_rate = sample_rate;
  out.samples.assign(n, 0.0);
  const double inv_channels = 1.0 / static_cast<double>(channels.size());
  for (const auto& ch : channels) {
    for (std::size_t i = 0; i < n; ++i) out.samples[i] += ch[i];
  }
  double scale = inv_channels;
  if (format == SampleFormat::pcm_int) scale /= std::ldexp(1.0, bit_depth - 1);
  for (auto& s : out.samples) s *= scale;

  double mean = 0.0;
  for (double s : out.samples) mean += s;
  mean /= static_cast<double>(n);
  for (auto& s : out.samples) s = std::clamp(s - mean, -1.0, 1.0);
  return out;
}

MonoSignal to_mono_normalized(const DecodedWav& wav) {
  return to_mono_normalized(wav.channels, wav.bit_depth, wav.format, wav.sample_rate);
}

MonoSignal load_mono(const std::filesystem::path& path) {
  return to_mono_normalized(read_wav_file(path));
}

FrameSeries frame_signal(const MonoSignal& signal, const FrameConfig& cfg) {
  if (signal.sample_rate <= 0) throw InvalidArgument("sample rate must be positive");
  if (!(cfg.hop_ms > 0.0) || cfg.hop_ms > cfg.window_ms) {
    throw InvalidArgument("frame config requires 0 < hop_ms <= window_ms");
  }
  const std::size_t window_len = ms_to_samples(cfg.window_ms, signal.sample_rate);
  const std::size_t hop_len = std::max<std::size_t>(1, ms_to_samples(cfg.hop_ms, signal.sample_rate));
  if (window_len == 0) throw InvalidArgument("window shorter than one sample");
  if (signal.size() < window_len) {
    throw TooShortError(window_len, signal.size(),
                        "signal of " + std::to_string(signal.size()) +
                            " samples is shorter than one window of " +
                            std::to_string(window_len) + " samples");
  }
  return FrameSeries(signal.samples, window_len, hop_len, signal.sample_rate);
}

}  // namespace birdcall
