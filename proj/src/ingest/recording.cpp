#include "seizurenet/ingest/recording.hpp"

#include <fmt/format.h>

#include "seizurenet/errors.hpp"

namespace seizurenet::ingest {

Recording::Recording(std::vector<std::string> channel_labels, double fs, std::size_t n_samples,
                     std::vector<double> samples)
    : labels_(std::move(channel_labels)), fs_(fs), n_samples_(n_samples), samples_(std::move(samples)) {
  if (!(fs_ > 0.0)) throw DataError(fmt::format("sampling rate must be positive, got {}", fs_));
  if (samples_.size() != labels_.size() * n_samples_) {
    throw DataError(fmt::format("recording holds {} values, expected {} channels x {} samples",
                                samples_.size(), labels_.size(), n_samples_));
  }
}

void validate_annotations(std::span<const SeizureAnnotation> annotations) {
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const auto& a = annotations[i];
    if (!(a.onset >= 0.0) || !(a.end > a.onset)) {
      throw DataError(fmt::format("seizure {} has invalid span [{}, {}]", i, a.onset, a.end));
    }
    if (i > 0 && a.onset < annotations[i - 1].end) {
      throw DataError(fmt::format("seizure {} overlaps or precedes seizure {}", i, i - 1));
    }
  }
}

}  // namespace seizurenet::ingest
