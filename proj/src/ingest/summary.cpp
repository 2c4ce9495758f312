#include "seizurenet/ingest/summary.hpp"

#include <algorithm>
#include <charconv>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "seizurenet/errors.hpp"

namespace seizurenet::ingest {

namespace {

constexpr double kDay = 86400.0;

std::optional<double> parse_seconds(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_clock(const std::string& s) {
  static const std::regex clock(R"((\d+):(\d{1,2}):(\d{1,2}))");
  std::smatch m;
  if (!std::regex_match(s, m, clock)) return std::nullopt;
  // Hours may pass 24 (recordings that run past midnight); minutes and
  // seconds may not pass 59.
  const double minutes = std::stod(m[2]), seconds = std::stod(m[3]);
  if (minutes >= 60 || seconds >= 60) return std::nullopt;
  return std::stod(m[1]) * 3600.0 + minutes * 60.0 + seconds;
}

std::string format_clock(double seconds) {
  const auto t = static_cast<long>(seconds);
  return fmt::format("{:02}:{:02}:{:02}", t / 3600, (t / 60) % 60, t % 60);
}

struct BlockState {
  SummaryEntry entry;
  std::size_t header_line = 0;
  std::optional<std::size_t> declared;
  std::size_t declared_line = 0;
  std::optional<double> pending_start;
  std::size_t pending_line = 0;
};

void close_block(BlockState& b, std::vector<SummaryEntry>& out) {
  if (b.pending_start) {
    throw ParseError(b.pending_line, "seizure start time without a matching end time");
  }
  const std::size_t declared = b.declared.value_or(0);
  if (declared != b.entry.seizures.size()) {
    throw ParseError(b.declared ? b.declared_line : b.header_line,
                     fmt::format("'{}' declares {} seizures but lists {}", b.entry.file_name, declared,
                                 b.entry.seizures.size()));
  }
  std::sort(b.entry.seizures.begin(), b.entry.seizures.end(),
            [](const auto& a, const auto& c) { return a.onset < c.onset; });
  for (std::size_t i = 0; i < b.entry.seizures.size(); ++i) b.entry.seizures[i].seizure_index = i;
  out.push_back(std::move(b.entry));
}

}  // namespace

std::vector<SummaryEntry> parse_chbmit_summary(std::string_view text) {
  static const std::regex file_re(R"(^\s*File Name:\s*(\S+)\s*$)");
  static const std::regex start_clock_re(R"(^\s*File Start Time:\s*(\S+)\s*$)");
  static const std::regex end_clock_re(R"(^\s*File End Time:\s*(\S+)\s*$)");
  static const std::regex count_re(R"(^\s*Number of Seizures in File:\s*(\S+)\s*$)");
  static const std::regex seizure_re(
      R"(^\s*Seizure(?:\s+\d+)?\s+(Start|End)\s+Time:\s*(\S+)(?:\s+seconds?)?\s*$)");

  std::vector<SummaryEntry> out;
  std::optional<BlockState> block;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::smatch m;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    if (std::regex_match(line, m, file_re)) {
      if (block) close_block(*block, out);
      block.emplace();
      block->entry.file_name = m[1];
      block->header_line = line_no;
      continue;
    }
    const bool is_start_clock = std::regex_match(line, m, start_clock_re);
    if (is_start_clock || std::regex_match(line, m, end_clock_re)) {
      if (!block) throw ParseError(line_no, "file time outside a 'File Name' block");
      const auto clock = parse_clock(m[1]);
      if (!clock) throw ParseError(line_no, fmt::format("malformed clock time '{}'", m[1].str()));
      (is_start_clock ? block->entry.clock_start : block->entry.clock_end) = *clock;
      continue;
    }
    if (std::regex_match(line, m, count_re)) {
      if (!block) throw ParseError(line_no, "seizure count outside a 'File Name' block");
      const auto n = parse_seconds(m[1]);
      if (!n || *n < 0 || *n != static_cast<double>(static_cast<std::size_t>(*n))) {
        throw ParseError(line_no, fmt::format("seizure count '{}' is not a non-negative integer", m[1].str()));
      }
      block->declared = static_cast<std::size_t>(*n);
      block->declared_line = line_no;
      continue;
    }
    if (std::regex_match(line, m, seizure_re)) {
      if (!block) throw ParseError(line_no, "seizure time outside a 'File Name' block");
      const auto seconds = parse_seconds(m[2]);
      if (!seconds) throw ParseError(line_no, fmt::format("seizure time '{}' is not numeric", m[2].str()));
      if (m[1] == "Start") {
        if (block->pending_start) {
          throw ParseError(block->pending_line, "seizure start time without a matching end time");
        }
        block->pending_start = *seconds;
        block->pending_line = line_no;
      } else {
        if (!block->pending_start) throw ParseError(line_no, "seizure end time without a start time");
        if (*seconds <= *block->pending_start) {
          throw ParseError(line_no, fmt::format("seizure end {} is not after start {}", *seconds,
                                                *block->pending_start));
        }
        block->entry.seizures.push_back({0, *block->pending_start, *seconds});
        block->pending_start.reset();
      }
    }
  }
  if (block) close_block(*block, out);
  return out;
}

std::string format_chbmit_summary(const std::vector<SummaryEntry>& entries, double fs) {
  std::string out = fmt::format("Data Sampling Rate: {:g} Hz\n*************************\n\n", fs);
  for (const auto& e : entries) {
    out += fmt::format("File Name: {}\n", e.file_name);
    if (e.clock_start) out += fmt::format("File Start Time: {}\n", format_clock(*e.clock_start));
    if (e.clock_end) out += fmt::format("File End Time: {}\n", format_clock(*e.clock_end));
    out += fmt::format("Number of Seizures in File: {}\n", e.seizures.size());
    for (const auto& s : e.seizures) {
      out += fmt::format("Seizure Start Time: {:g} seconds\nSeizure End Time: {:g} seconds\n", s.onset, s.end);
    }
    out += "\n";
  }
  return out;
}

Timeline assemble_timeline(const std::vector<SummaryEntry>& entries, std::vector<Recording> recordings) {
  if (entries.size() != recordings.size()) {
    throw DataError(fmt::format("{} summary entries but {} recordings", entries.size(), recordings.size()));
  }
  const bool use_clock = !entries.empty() && std::all_of(entries.begin(), entries.end(), [](const auto& e) {
    return e.clock_start.has_value();
  });

  Timeline tl;
  double first_abs = 0.0, prev_abs = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    double offset = tl.end();
    if (use_clock) {
      double abs = *entries[i].clock_start;
      while (i > 0 && abs < prev_abs) abs += kDay;
      if (i == 0) first_abs = abs;
      prev_abs = abs;
      offset = std::max(abs - first_abs, tl.end());
    }
    for (const auto& s : entries[i].seizures) {
      if (s.end > recordings[i].duration() + 1e-9) {
        throw DataError(fmt::format("'{}': seizure ends at {} s, past the recording's {} s",
                                    entries[i].file_name, s.end, recordings[i].duration()));
      }
      tl.seizures.push_back({tl.seizures.size(), offset + s.onset, offset + s.end});
    }
    tl.segments.push_back({entries[i].file_name, offset, std::move(recordings[i])});
  }
  validate_annotations(tl.seizures);
  return tl;
}

}  // namespace seizurenet::ingest
