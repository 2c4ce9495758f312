#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace seizurenet::ingest {

// Multichannel EEG in physical units (µV), one row per channel. Immutable
// once constructed.
class Recording {
 public:
  Recording() = default;
  Recording(std::vector<std::string> channel_labels, double fs,
            std::size_t n_samples, std::vector<double> samples);

  const std::vector<std::string>& channel_labels() const { return labels_; }
  std::size_t n_channels() const { return labels_.size(); }
  std::size_t n_samples() const { return n_samples_; }
  double fs() const { return fs_; }
  double duration() const { return static_cast<double>(n_samples_) / fs_; }

  std::span<const double> channel(std::size_t i) const {
    return {samples_.data() + i * n_samples_, n_samples_};
  }
  // Row-major [n_channels x n_samples].
  std::span<const double> samples() const { return samples_; }

 private:
  std::vector<std::string> labels_;
  double fs_ = 0.0;
  std::size_t n_samples_ = 0;
  std::vector<double> samples_;
};

struct SeizureAnnotation {
  std::size_t seizure_index = 0;
  double onset = 0.0;  // seconds from the timeline origin
  double end = 0.0;

  bool operator==(const SeizureAnnotation&) const = default;
};

// Throws DataError unless every annotation has end > onset >= 0 and the list
// is sorted by onset without overlaps.
void validate_annotations(std::span<const SeizureAnnotation> annotations);

// One file placed on a subject's timeline.
struct TimelineSegment {
  std::string source;  // file name, or a synthetic tag
  double offset = 0.0;
  Recording recording;

  double start() const { return offset; }
  double end() const { return offset + recording.duration(); }
};

// A subject's recordings on one clock plus seizures in timeline seconds.
// Gaps between segments are unrecorded time.
struct Timeline {
  std::vector<TimelineSegment> segments;
  std::vector<SeizureAnnotation> seizures;

  double end() const { return segments.empty() ? 0.0 : segments.back().end(); }
};

}  // namespace seizurenet::ingest
