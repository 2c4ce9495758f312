#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "seizurenet/ingest/recording.hpp"

namespace seizurenet::segment {

// Clinical timing of the preictal/interictal protocol, in seconds.
struct TimingPolicy {
  double sop = 1800.0;             // seizure occurrence period
  double sph = 300.0;              // seizure prediction horizon
  double interictal_gap = 14400.0; // minimum distance of interictal data from any seizure
  double seizure_free_T = 14400.0; // clustering gap for leading seizures
  double window_len = 30.0;
  double overlap = 8.0;

  double stride() const { return window_len - overlap; }

  // Same policy with every interval duration scaled to `seconds_per_hour`.
  // Window geometry is left untouched.
  TimingPolicy compressed(double seconds_per_hour) const;

  bool operator==(const TimingPolicy&) const = default;
};

void validate(const TimingPolicy& policy);

enum class Label { Interictal = 0, Preictal = 1 };

const char* to_string(Label label);

struct LabeledInterval {
  double start = 0.0;
  double end = 0.0;
  Label label = Label::Interictal;
  std::optional<std::size_t> source_seizure;

  double length() const { return end - start; }
  bool operator==(const LabeledInterval&) const = default;
};

// Half-open span of recorded time on the timeline.
struct Span {
  double start = 0.0;
  double end = 0.0;
  bool operator==(const Span&) const = default;
};

// Indices of seizures that open a cluster: the first seizure, and every
// seizure whose onset lies at least `seizure_free_T` after the previous
// seizure's end.
std::vector<std::size_t> select_leading_seizures(std::span<const ingest::SeizureAnnotation> annotations,
                                                 double seizure_free_T);

struct Labeling {
  std::vector<LabeledInterval> intervals;  // sorted by start
  std::vector<std::size_t> empty_preictal; // leading seizures with no recorded preictal time
};

// Preictal: [onset - sph - sop, onset - sph) for each leading seizure,
// truncated at the end of any earlier seizure and clipped to recorded time.
// Interictal: recorded time at least interictal_gap from every seizure's
// onset and end. Intervals never cross a recorded-span boundary.
Labeling label_intervals(std::span<const ingest::SeizureAnnotation> annotations,
                         std::span<const std::size_t> leading, const TimingPolicy& policy,
                         std::span<const Span> recorded);

// Single recorded span [0, timeline_end).
Labeling label_intervals(std::span<const ingest::SeizureAnnotation> annotations,
                         std::span<const std::size_t> leading, const TimingPolicy& policy, double timeline_end);

// Window start times inside `interval`, spaced window_len - overlap apart.
// `fs` only checks that a window spans a whole number of samples.
std::vector<double> slide_windows(const LabeledInterval& interval, const TimingPolicy& policy, double fs);

}  // namespace seizurenet::segment
