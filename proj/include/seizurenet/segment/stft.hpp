#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace seizurenet::segment {

enum class MagnitudeTransform { Log1p, Linear };

struct StftConfig {
  std::size_t n_fft = 256;
  std::size_t hop = 128;
  // Inclusive range of kept DFT bins. The default drops DC.
  std::size_t bin_first = 1;
  std::size_t bin_last = 128;
  MagnitudeTransform magnitude_transform = MagnitudeTransform::Log1p;

  std::size_t n_bins() const { return bin_last - bin_first + 1; }
  std::size_t n_frames(std::size_t window_samples) const;

  bool operator==(const StftConfig&) const = default;
};

void validate(const StftConfig& cfg);

// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

// (channels, frequency, time) magnitudes of one window, row-major with time
// fastest.
struct Spectrogram {
  std::size_t channels = 0;
  std::size_t bins = 0;
  std::size_t frames = 0;
  std::vector<double> values;

  double at(std::size_t c, std::size_t f, std::size_t t) const { return values[(c * bins + f) * frames + t]; }
};

// `window` is row-major [n_channels x n_samples]. Frames start every `hop`
// samples; each is Hann-weighted, transformed by an n_fft-point DFT, and its
// magnitudes in the kept bins pass through the magnitude transform.
// Throws WindowTooShort when n_samples < n_fft.
Spectrogram stft_featurize(std::span<const double> window, std::size_t n_channels, const StftConfig& cfg);

}  // namespace seizurenet::segment
