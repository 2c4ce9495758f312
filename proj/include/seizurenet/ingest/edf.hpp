#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seizurenet/ingest/recording.hpp"

namespace seizurenet::ingest {

// Reader and writer for the 1992 base EDF layout: a fixed-width ASCII header
// followed by data records of 16-bit little-endian two's-complement samples.

struct EdfSignalHeader {
  std::string label;
  std::string transducer;
  std::string physical_dimension;
  double physical_min = 0.0;
  double physical_max = 0.0;
  int digital_min = 0;
  int digital_max = 0;
  std::string prefiltering;
  std::size_t samples_per_record = 0;
  std::string reserved;

  bool operator==(const EdfSignalHeader&) const = default;
};

struct EdfHeader {
  std::string version;
  std::string patient;
  std::string recording;
  std::string start_date;  // dd.mm.yy
  std::string start_time;  // hh.mm.ss
  std::size_t header_bytes = 0;
  std::string reserved;
  long n_records = 0;  // -1 when the writer did not know
  double record_duration = 0.0;
  std::vector<EdfSignalHeader> signals;

  std::size_t n_signals() const { return signals.size(); }
  std::size_t record_samples() const;

  bool operator==(const EdfHeader&) const = default;
};

inline constexpr std::string_view kEdfAnnotationLabel = "EDF Annotations";

EdfHeader parse_edf_header(std::span<const std::uint8_t> bytes);

// Physical value of one digital sample under the signal's affine scaling.
double digital_to_physical(const EdfSignalHeader& signal, int digital);

// Decodes the data area. With `channels`, the result holds exactly those
// labels in that order (first match wins on duplicate labels); otherwise all
// non-annotation signals. Selected signals must share one sampling rate.
Recording read_edf_signals(std::span<const std::uint8_t> source,
                           const std::optional<std::vector<std::string>>& channels = std::nullopt);

// Builds a header for `recording` with per-channel physical ranges taken from
// the data (widened to stay representable in 8 ASCII characters) and the full
// 16-bit digital range. The recording length must be a whole number of
// records.
EdfHeader make_edf_header(const Recording& recording, double record_duration = 1.0,
                          const std::string& patient = "X", const std::string& recording_id = "X");

std::vector<std::uint8_t> encode_edf_header(const EdfHeader& header);

// Header plus quantized data area.
std::vector<std::uint8_t> write_edf(const EdfHeader& header, const Recording& recording);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);

}  // namespace seizurenet::ingest
