#include "birdcall/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "birdcall/error.hpp"

namespace birdcall {

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_in_place(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0) throw InvalidArgument("FFT length must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    // Twiddles evaluated directly rather than by recurrence to keep the
    // rounding error independent of the transform length.
    std::vector<std::complex<double>> twiddle(half);
    for (std::size_t k = 0; k < half; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
      twiddle[k] = {std::cos(angle), std::sin(angle)};
    }
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const auto u = data[start + k];
        const auto v = data[start + k + half] * twiddle[k];
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

std::vector<double> hamming_window(std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (length < 2) return w;
  const double denom = static_cast<double>(length - 1);
  for (std::size_t n = 0; n < length; ++n) {
    w[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / denom);
  }
  return w;
}

Spectrum fft_magnitude(std::span<const double> frame, bool apply_hamming, int sample_rate) {
  if (frame.empty()) throw InvalidArgument("cannot transform an empty frame");
  const std::size_t n_fft = std::max<std::size_t>(2, next_power_of_two(frame.size()));

  std::vector<std::complex<double>> buf(n_fft);
  if (apply_hamming) {
    const auto w = hamming_window(frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i] * w[i];
  } else {
    for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i];
  }
  fft_in_place(buf);

  Spectrum s;
  s.frame_length = frame.size();
  s.n_fft = n_fft;
  s.sample_rate = sample_rate;
  s.magnitudes.resize(n_fft / 2);
  s.frequencies.resize(n_fft / 2);
  for (std::size_t k = 0; k < n_fft / 2; ++k) {
    s.magnitudes[k] = std::abs(buf[k]);
    s.frequencies[k] = static_cast<double>(k) * sample_rate / static_cast<double>(n_fft);
  }
  return s;
}

std::vector<double> MelFilterbank::center_ladder() {
  std::vector<double> c(kFilters + 2);
  for (std::size_t i = 0; i < kLinearCenters; ++i) c[i] = kLowestHz + static_cast<double>(i) * kLinearStepHz;
  for (std::size_t i = kLinearCenters; i < c.size(); ++i) c[i] = c[i - 1] * kLogStep;
  return c;
}

MelFilterbank::MelFilterbank(int sample_rate, std::size_t n_fft)
    : sample_rate_(sample_rate), n_fft_(n_fft), centers_(center_ladder()) {
  if (n_fft < 2 || (n_fft & (n_fft - 1)) != 0) throw InvalidArgument("n_fft must be a power of two");
  if (sample_rate <= 0 || sample_rate / 2.0 < centers_.front()) {
    throw InvalidArgument("Nyquist frequency " + std::to_string(sample_rate / 2.0) +
                          " Hz lies below the first filter centre");
  }
  weights_.assign(kFilters * bins(), 0.0);
  const double nyquist = sample_rate / 2.0;
  for (std::size_t i = 0; i < kFilters; ++i) {
    for (std::size_t k = 0; k < bins(); ++k) {
      const double hz = static_cast<double>(k) * sample_rate / static_cast<double>(n_fft);
      if (hz > nyquist) break;
      weights_[i * bins() + k] = response(i, hz);
    }
  }
}

double MelFilterbank::response(std::size_t filter, double hz) const {
  const double lo = centers_[filter];
  const double mid = centers_[filter + 1];
  const double hi = centers_[filter + 2];
  const double height = 2.0 / (hi - lo);
  if (hz <= lo || hz >= hi) return 0.0;
  if (hz <= mid) return height * (hz - lo) / (mid - lo);
  return height * (hi - hz) / (hi - mid);
}

std::vector<double> MelFilterbank::apply(std::span<const double> power) const {
  if (power.size() != bins()) throw ShapeError("filterbank and power spectrum differ in bin count");
  std::vector<double> energies(kFilters, 0.0);
  for (std::size_t i = 0; i < kFilters; ++i) {
    const double* w = weights_.data() + i * bins();
    double acc = 0.0;
    for (std::size_t k = 0; k < bins(); ++k) acc += w[k] * power[k];
    energies[i] = acc;
  }
  return energies;
}

std::vector<double> dct2_orthonormal(std::span<const double> input) {
  const std::size_t n = input.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t x = 0; x < n; ++x) {
    double acc = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      acc += input[u] * std::cos(std::numbers::pi * static_cast<double>(x) *
                                 (2.0 * static_cast<double>(u) + 1.0) / (2.0 * static_cast<double>(n)));
    }
    out[x] = scale * acc * (x == 0 ? (1.0 / std::numbers::sqrt2) : 1.0);
  }
  return out;
}

std::vector<double> idct2_orthonormal(std::span<const double> coefficients) {
  const std::size_t n = coefficients.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t u = 0; u < n; ++u) {
    double acc = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      acc += coefficients[x] * (x == 0 ? (1.0 / std::numbers::sqrt2) : 1.0) *
             std::cos(std::numbers::pi * static_cast<double>(x) *
                      (2.0 * static_cast<double>(u) + 1.0) / (2.0 * static_cast<double>(n)));
    }
    out[u] = scale * acc;
  }
  return out;
}

}  // namespace birdcall
