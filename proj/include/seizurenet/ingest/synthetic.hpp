#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "seizurenet/ingest/recording.hpp"
#include "seizurenet/ingest/summary.hpp"

namespace seizurenet::ingest {

struct PreictalSignature {
  double center_hz = 18.0;
  double gain = 3.0;  // sinusoid amplitude in units of noise_amplitude
};

// Desk-scale stand-in for a long-term scalp recording. Clinical durations
// (SOP, SPH, the 4 h clustering gap) are compressed by seconds_per_hour, so
// one "hour" of the protocol lasts seconds_per_hour seconds of signal.
// Seizure k starts at (k + 1) * inter_seizure_gap; the recording lasts
// (n_seizures + 1) * inter_seizure_gap.
struct SyntheticSpec {
  std::size_t n_channels = 4;
  double fs = 64.0;
  std::size_t n_seizures = 3;
  double seconds_per_hour = 600.0;
  double inter_seizure_gap = 7200.0;
  double seizure_duration = 40.0;
  PreictalSignature preictal_signature;
  double noise_amplitude = 10.0;  // µV, standard deviation of the background
  std::uint64_t seed = 7;
  // Recording length per file when written out as EDF.
  double file_duration = 3600.0;

  double compressed(double clinical_seconds) const { return clinical_seconds * seconds_per_hour / 3600.0; }
  double duration() const { return static_cast<double>(n_seizures + 1) * inter_seizure_gap; }
};

// Throws InvalidSpec when the spec cannot hold a preictal window plus
// interictal data between seizures.
void validate(const SyntheticSpec& spec);

// Channel labels are the first n_channels entries of `montage`.
std::pair<Recording, std::vector<SeizureAnnotation>> generate_synthetic_recording(
    const SyntheticSpec& spec, const std::vector<std::string>& montage);

// Cuts a continuous recording into consecutive files named
// "<prefix>_01.edf", ... with file-relative seizure times.
std::pair<std::vector<SummaryEntry>, std::vector<Recording>> split_into_files(
    const Recording& recording, const std::vector<SeizureAnnotation>& seizures, double file_duration,
    const std::string& prefix);

}  // namespace seizurenet::ingest
