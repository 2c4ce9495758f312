#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seizurenet/ingest/recording.hpp"

namespace seizurenet::ingest {

// One "File Name:" block of a CHB-MIT "-summary.txt" file. Seizure times are
// seconds from the start of that file.
struct SummaryEntry {
  std::string file_name;
  std::optional<double> clock_start;  // seconds after midnight, when given
  std::optional<double> clock_end;
  std::vector<SeizureAnnotation> seizures;
};

// Throws ParseError carrying the 1-based line number on malformed blocks.
std::vector<SummaryEntry> parse_chbmit_summary(std::string_view text);

// Inverse of parse_chbmit_summary for what it reads: file blocks, optional
// clock times, seizure start/end pairs.
std::string format_chbmit_summary(const std::vector<SummaryEntry>& entries, double fs);

// Places each recording on one subject timeline. Wall-clock start times are
// used when every entry has them (midnight rollover handled); otherwise files
// are laid end to end. Seizures are converted to timeline seconds and
// renumbered in timeline order.
Timeline assemble_timeline(const std::vector<SummaryEntry>& entries, std::vector<Recording> recordings);

}  // namespace seizurenet::ingest
