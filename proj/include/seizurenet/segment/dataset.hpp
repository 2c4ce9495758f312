#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "seizurenet/ingest/recording.hpp"
#include "seizurenet/segment/stft.hpp"
#include "seizurenet/segment/timing.hpp"

namespace seizurenet::segment {

inline constexpr std::int64_t kInterictalFold = -1;

// (channels, frequency, time)
using SampleShape = std::array<std::size_t, 3>;

struct SpectralSample {
  std::vector<float> values;  // row-major in SampleShape order
  Label label = Label::Interictal;
  std::int64_t fold_key = kInterictalFold;  // leading seizure index for preictal samples
  double origin = 0.0;                      // timeline seconds of the window start
};

// Canonical sample order: (label, fold_key, origin).
bool sample_order(const SpectralSample& a, const SpectralSample& b);

struct DatasetSummary {
  std::size_t n_seizures = 0;
  std::vector<std::size_t> leading;         // all leading seizures
  std::vector<std::size_t> empty_preictal;  // leading seizures dropped for lack of data
  std::size_t n_preictal = 0;
  std::size_t n_interictal = 0;
  std::map<std::int64_t, std::size_t> preictal_per_fold;
  double preictal_seconds = 0.0;  // total labeled time per class
  double interictal_seconds = 0.0;
};

struct Dataset {
  TimingPolicy policy;
  StftConfig stft;
  double fs = 0.0;
  std::vector<std::string> channels;
  SampleShape shape{};
  std::vector<SpectralSample> samples;  // canonical order
  DatasetSummary summary;

  std::size_t sample_size() const { return shape[0] * shape[1] * shape[2]; }
  std::vector<std::int64_t> fold_keys() const;
};

// Shape every window yields under (n_channels, window_len, fs, cfg).
SampleShape sample_shape(std::size_t n_channels, double window_len, double fs, const StftConfig& cfg);

// Labels the timeline, slides windows over every interval, and featurizes
// them. Throws InsufficientSeizures when fewer than `min_folds` leading
// seizures keep a non-empty preictal interval.
Dataset build_dataset(const ingest::Timeline& timeline, const TimingPolicy& policy, const StftConfig& cfg,
                      std::size_t min_folds = 3);

// Cache layout: <stem>.json manifest plus <stem>.f32, the little-endian
// float32 sample values concatenated in manifest order.
void save_dataset(const Dataset& dataset, const std::string& manifest_path, const std::string& data_path);
Dataset load_dataset(const std::string& manifest_path, const std::string& data_path);

}  // namespace seizurenet::segment
