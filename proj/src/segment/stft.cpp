#include "seizurenet/segment/stft.hpp"

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

#include <fftw3.h>
#include <fmt/format.h>

#include "seizurenet/errors.hpp"

namespace seizurenet::segment {

namespace {

// FFTW's planner is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        in_(fftw_alloc_real(n), fftw_free),
        out_(fftw_alloc_complex(n / 2 + 1), fftw_free) {
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
    if (plan_ == nullptr) throw Error(fmt::format("FFTW could not plan a {}-point transform", n));
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  double* input() { return in_.get(); }
  const fftw_complex* output() const { return out_.get(); }
  void execute() { fftw_execute(plan_); }

 private:
  std::size_t n_;
  std::unique_ptr<double, decltype(&fftw_free)> in_;
  std::unique_ptr<fftw_complex, decltype(&fftw_free)> out_;
  fftw_plan plan_ = nullptr;
};

RealFft& cached_fft(std::size_t n) {
  thread_local std::unique_ptr<RealFft> fft;
  if (!fft || fft->size() != n) fft = std::make_unique<RealFft>(n);
  return *fft;
}

}  // namespace

std::size_t StftConfig::n_frames(std::size_t window_samples) const {
  if (window_samples < n_fft) return 0;
  return 1 + (window_samples - n_fft) / hop;
}

void validate(const StftConfig& c) {
  if (c.n_fft == 0) throw ConfigError("stft.n_fft must be positive");
  if (c.hop == 0 || c.hop > c.n_fft) throw ConfigError("stft.hop must lie in [1, n_fft]");
  if (c.bin_first > c.bin_last || c.bin_last > c.n_fft / 2) {
    throw ConfigError(fmt::format("stft bins [{}, {}] must lie within [0, {}]", c.bin_first, c.bin_last, c.n_fft / 2));
  }
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

Spectrogram stft_featurize(std::span<const double> window, std::size_t n_channels, const StftConfig& cfg) {
  validate(cfg);
  if (n_channels == 0 || window.size() % n_channels != 0) {
    throw ShapeMismatch(fmt::format("{} values do not split into {} channels", window.size(), n_channels));
  }
  const std::size_t n_samples = window.size() / n_channels;
  if (n_samples < cfg.n_fft) {
    throw WindowTooShort(fmt::format("window of {} samples is shorter than n_fft = {}", n_samples, cfg.n_fft));
  }

  Spectrogram out;
  out.channels = n_channels;
  out.bins = cfg.n_bins();
  out.frames = cfg.n_frames(n_samples);
  out.values.resize(out.channels * out.bins * out.frames);

  const auto taper = hann_window(cfg.n_fft);
  auto& fft = cached_fft(cfg.n_fft);
  for (std::size_t c = 0; c < n_channels; ++c) {
    const double* row = window.data() + c * n_samples;
    for (std::size_t t = 0; t < out.frames; ++t) {
      const double* frame = row + t * cfg.hop;
      double* in = fft.input();
      for (std::size_t i = 0; i < cfg.n_fft; ++i) in[i] = frame[i] * taper[i];
      fft.execute();
      const fftw_complex* spec = fft.output();
      for (std::size_t f = 0; f < out.bins; ++f) {
        const auto& z = spec[cfg.bin_first + f];
        double mag = std::hypot(z[0], z[1]);
        if (cfg.magnitude_transform == MagnitudeTransform::Log1p) mag = std::log1p(mag);
        out.values[(c * out.bins + f) * out.frames + t] = mag;
      }
    }
  }
  return out;
}

}  // namespace seizurenet::segment
