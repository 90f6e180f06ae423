#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace birdcall {

// One-sided magnitude spectrum of a single frame.
struct Spectrum {
  std::vector<double> magnitudes;
  std::vector<double> frequencies;  // Hz, strictly increasing
  std::size_t frame_length = 0;     // samples in the frame before zero-padding
  std::size_t n_fft = 0;
  int sample_rate = 0;

  std::size_t bins() const noexcept { return magnitudes.size(); }
};

std::size_t next_power_of_two(std::size_t n);

// In-place iterative radix-2 FFT; data.size() must be a power of two.
void fft_in_place(std::vector<std::complex<double>>& data);

// w(n) = 0.54 - 0.46 cos(2 pi n / (M - 1)).
std::vector<double> hamming_window(std::size_t length);

// Optionally Hamming-windows the frame, zero-pads to the next power of two and
// returns the magnitudes of the first n_fft / 2 bins.
Spectrum fft_magnitude(std::span<const double> frame, bool apply_hamming, int sample_rate);

// Triangular filters on a 42-point ladder of centre frequencies: 14 linearly
// spaced from 133.33 Hz in 66.67 Hz steps, then geometric with ratio
// 1.0711703. Filter i spans centres (i, i + 1, i + 2) with peak height
// 2 / (c[i + 2] - c[i]).
class MelFilterbank {
 public:
  static constexpr std::size_t kFilters = 40;
  static constexpr std::size_t kLinearCenters = 14;
  static constexpr double kLowestHz = 133.33;
  static constexpr double kLinearStepHz = 66.67;
  static constexpr double kLogStep = 1.0711703;

  MelFilterbank(int sample_rate, std::size_t n_fft);

  std::size_t size() const noexcept { return kFilters; }
  std::size_t bins() const noexcept { return n_fft_ / 2; }
  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t n_fft() const noexcept { return n_fft_; }
  const std::vector<double>& centers() const noexcept { return centers_; }

  // Triangle value of filter i at an arbitrary frequency.
  double response(std::size_t filter, double hz) const;
  // Weight of filter i on FFT bin k; zero above Nyquist.
  double weight(std::size_t filter, std::size_t bin) const { return weights_[filter * bins() + bin]; }

  // Filter energies sum_k w[i][k] * power[k].
  std::vector<double> apply(std::span<const double> power) const;

  static std::vector<double> center_ladder();

 private:
  int sample_rate_;
  std::size_t n_fft_;
  std::vector<double> centers_;
  std::vector<double> weights_;
};

// Orthonormal DCT-II (1/sqrt(2) on output index 0) and its inverse.
std::vector<double> dct2_orthonormal(std::span<const double> input);
std::vector<double> idct2_orthonormal(std::span<const double> coefficients);

}  // namespace birdcall
