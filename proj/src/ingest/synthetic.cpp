#include "seizurenet/ingest/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "seizurenet/errors.hpp"

namespace seizurenet::ingest {

namespace {

constexpr double kSop = 1800.0;
constexpr double kSph = 300.0;
constexpr double kClusterGap = 4 * 3600.0;
constexpr double kIctalRhythmHz = 3.0;
constexpr double kIctalGain = 5.0;

}  // namespace

void validate(const SyntheticSpec& s) {
  if (s.n_channels == 0) throw InvalidSpec("synthetic spec needs at least one channel");
  if (!(s.fs > 0.0)) throw InvalidSpec("synthetic fs must be positive");
  if (std::abs(s.fs - std::round(s.fs)) > 0.0) throw InvalidSpec("synthetic fs must be an integer");
  if (!(s.seconds_per_hour > 0.0)) throw InvalidSpec("seconds_per_hour must be positive");
  if (!(s.seizure_duration > 0.0)) throw InvalidSpec("seizure_duration must be positive");
  if (!(s.noise_amplitude >= 0.0) || !(s.preictal_signature.gain >= 0.0)) {
    throw InvalidSpec("noise amplitude and signature gain must be non-negative");
  }
  if (!(s.preictal_signature.center_hz > 0.0) || s.preictal_signature.center_hz >= s.fs / 2) {
    throw InvalidSpec(fmt::format("signature frequency {} Hz is outside (0, fs/2)", s.preictal_signature.center_hz));
  }
  const double cluster_gap = s.compressed(kClusterGap);
  const double preictal_span = s.compressed(kSop + kSph);
  // Every seizure must be leading, and interictal time (cluster_gap away
  // from any seizure) must exist between neighbours.
  if (!(s.inter_seizure_gap > 2.0 * cluster_gap + s.seizure_duration) ||
      !(s.inter_seizure_gap > preictal_span + s.seizure_duration)) {
    throw InvalidSpec(fmt::format("inter_seizure_gap {} s is too small; needs more than {} s", s.inter_seizure_gap,
                                  2.0 * cluster_gap + s.seizure_duration));
  }
  const double n = s.duration() * s.fs;
  if (std::abs(n - std::round(n)) > 1e-6) throw InvalidSpec("duration * fs must be a whole number of samples");
  if (!(s.file_duration > 0.0)) throw InvalidSpec("file_duration must be positive");
}

std::pair<Recording, std::vector<SeizureAnnotation>> generate_synthetic_recording(
    const SyntheticSpec& s, const std::vector<std::string>& montage) {
  validate(s);
  if (montage.size() < s.n_channels) {
    throw InvalidSpec(fmt::format("montage has {} labels, spec needs {}", montage.size(), s.n_channels));
  }
  const auto n_samples = static_cast<std::size_t>(std::llround(s.duration() * s.fs));
  std::vector<std::string> labels(montage.begin(), montage.begin() + static_cast<long>(s.n_channels));

  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> noise(0.0, s.noise_amplitude);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  std::vector<double> samples(s.n_channels * n_samples);
  for (auto& v : samples) v = noise(rng);

  std::vector<SeizureAnnotation> seizures;
  const double sop = s.compressed(kSop);
  const double sph = s.compressed(kSph);
  for (std::size_t k = 0; k < s.n_seizures; ++k) {
    const double onset = static_cast<double>(k + 1) * s.inter_seizure_gap;
    seizures.push_back({k, onset, onset + s.seizure_duration});

    auto add_tone = [&](double from, double to, double hz, double amplitude) {
      const auto i0 = static_cast<std::size_t>(std::llround(std::max(0.0, from) * s.fs));
      const auto i1 = std::min(n_samples, static_cast<std::size_t>(std::llround(to * s.fs)));
      for (std::size_t c = 0; c < s.n_channels; ++c) {
        const double phi = phase(rng);
        double* row = samples.data() + c * n_samples;
        for (std::size_t i = i0; i < i1; ++i) {
          row[i] += amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / s.fs + phi);
        }
      }
    };
    add_tone(onset - sph - sop, onset - sph, s.preictal_signature.center_hz,
             s.preictal_signature.gain * s.noise_amplitude);
    add_tone(onset, onset + s.seizure_duration, kIctalRhythmHz, kIctalGain * s.noise_amplitude);
  }
  return {Recording(std::move(labels), s.fs, n_samples, std::move(samples)), std::move(seizures)};
}

std::pair<std::vector<SummaryEntry>, std::vector<Recording>> split_into_files(
    const Recording& recording, const std::vector<SeizureAnnotation>& seizures, double file_duration,
    const std::string& prefix) {
  const auto per_file = static_cast<std::size_t>(std::llround(file_duration * recording.fs()));
  if (per_file == 0) throw InvalidSpec("file_duration holds no samples");

  std::vector<SummaryEntry> entries;
  std::vector<Recording> files;
  for (std::size_t first = 0, idx = 1; first < recording.n_samples(); first += per_file, ++idx) {
    const std::size_t n = std::min(per_file, recording.n_samples() - first);
    std::vector<double> data(recording.n_channels() * n);
    for (std::size_t c = 0; c < recording.n_channels(); ++c) {
      const auto ch = recording.channel(c).subspan(first, n);
      std::copy(ch.begin(), ch.end(), data.begin() + static_cast<long>(c * n));
    }
    const double t0 = static_cast<double>(first) / recording.fs();
    const double t1 = static_cast<double>(first + n) / recording.fs();

    SummaryEntry e;
    e.file_name = fmt::format("{}_{:02}.edf", prefix, idx);
    e.clock_start = t0;
    e.clock_end = t1;
    for (const auto& sz : seizures) {
      if (sz.onset >= t0 && sz.onset < t1) {
        if (sz.end > t1) throw InvalidSpec(fmt::format("seizure {} straddles a file boundary", sz.seizure_index));
        e.seizures.push_back({e.seizures.size(), sz.onset - t0, sz.end - t0});
      }
    }
    entries.push_back(std::move(e));
    files.emplace_back(recording.channel_labels(), recording.fs(), n, std::move(data));
  }
  return {std::move(entries), std::move(files)};
}

}  // namespace seizurenet::ingest
