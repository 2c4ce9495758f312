#include "seizurenet/ingest/edf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include <fmt/format.h>

#include "seizurenet/errors.hpp"

namespace seizurenet::ingest {

namespace {

constexpr std::size_t kFixedHeaderBytes = 256;
constexpr std::size_t kSignalHeaderBytes = 256;

// Per-signal field widths, in the order the fields appear (each field is
// stored for all signals before the next field starts).
constexpr std::size_t kLabelW = 16, kTransducerW = 80, kDimW = 8, kNumW = 8,
                      kPrefilterW = 80, kSamplesW = 8, kSignalReservedW = 32;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\0')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

class FieldReader {
 public:
  explicit FieldReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::string_view raw(std::size_t width) {
    if (pos_ + width > bytes_.size()) {
      throw MalformedHeader(fmt::format("EDF header truncated at byte {}", pos_));
    }
    std::string_view out(reinterpret_cast<const char*>(bytes_.data()) + pos_, width);
    pos_ += width;
    return out;
  }

  std::string text(std::size_t width) { return std::string(trim(raw(width))); }

  template <typename T>
  T number(std::size_t width, std::string_view what) {
    const auto field = trim(raw(width));
    T value{};
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.empty() || ec != std::errc() || ptr != last) {
      throw MalformedHeader(fmt::format("EDF field '{}' is not numeric: '{}'", what, field));
    }
    return value;
  }

  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_field(std::vector<std::uint8_t>& out, std::string_view value, std::size_t width) {
  if (value.size() > width) {
    throw MalformedHeader(fmt::format("value '{}' does not fit an {}-byte EDF field", value, width));
  }
  out.insert(out.end(), value.begin(), value.end());
  out.insert(out.end(), width - value.size(), ' ');
}

// Shortest fixed-point rendering of at most 8 characters that does not cross
// `v` in the requested direction.
std::string format_bound(double v, bool round_up) {
  for (int decimals = 6; decimals >= 0; --decimals) {
    const double scale = std::pow(10.0, decimals);
    const double q = round_up ? std::ceil(v * scale - 1e-9) / scale
                              : std::floor(v * scale + 1e-9) / scale;
    auto s = fmt::format("{:.{}f}", q, decimals);
    if (s.size() <= kNumW) return s;
  }
  throw MalformedHeader(fmt::format("physical bound {} cannot be written in 8 characters", v));
}

std::string format_number(double v) {
  auto s = fmt::format("{}", v);
  if (s.size() > kNumW) s = format_bound(v, false);
  return s;
}

}  // namespace

std::size_t EdfHeader::record_samples() const {
  std::size_t total = 0;
  for (const auto& s : signals) total += s.samples_per_record;
  return total;
}

EdfHeader parse_edf_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFixedHeaderBytes) {
    throw MalformedHeader(fmt::format("EDF header needs 256 bytes, got {}", bytes.size()));
  }
  FieldReader r(bytes);
  EdfHeader h;
  h.version = r.text(8);
  h.patient = r.text(80);
  h.recording = r.text(80);
  h.start_date = r.text(8);
  h.start_time = r.text(8);
  h.header_bytes = r.number<std::size_t>(8, "header bytes");
  h.reserved = r.text(44);
  h.n_records = r.number<long>(8, "number of records");
  h.record_duration = r.number<double>(8, "record duration");
  const auto ns = r.number<long>(4, "number of signals");

  if (h.reserved.starts_with("EDF+D")) {
    throw UnsupportedVariant("EDF+ discontinuous recordings are not supported");
  }
  if (ns < 1) throw MalformedHeader(fmt::format("EDF header declares {} signals", ns));
  if (!(h.record_duration > 0.0)) {
    throw MalformedHeader(fmt::format("EDF record duration must be positive, got {}", h.record_duration));
  }
  if (h.n_records < -1) throw MalformedHeader(fmt::format("EDF record count {} is invalid", h.n_records));
  const auto n = static_cast<std::size_t>(ns);
  if (bytes.size() < kFixedHeaderBytes + kSignalHeaderBytes * n) {
    throw MalformedHeader(fmt::format("EDF header for {} signals needs {} bytes, got {}", n,
                                      kFixedHeaderBytes + kSignalHeaderBytes * n, bytes.size()));
  }

  h.signals.resize(n);
  for (auto& s : h.signals) s.label = r.text(kLabelW);
  for (auto& s : h.signals) s.transducer = r.text(kTransducerW);
  for (auto& s : h.signals) s.physical_dimension = r.text(kDimW);
  for (auto& s : h.signals) s.physical_min = r.number<double>(kNumW, "physical minimum");
  for (auto& s : h.signals) s.physical_max = r.number<double>(kNumW, "physical maximum");
  for (auto& s : h.signals) s.digital_min = r.number<int>(kNumW, "digital minimum");
  for (auto& s : h.signals) s.digital_max = r.number<int>(kNumW, "digital maximum");
  for (auto& s : h.signals) s.prefiltering = r.text(kPrefilterW);
  for (auto& s : h.signals) s.samples_per_record = r.number<std::size_t>(kSamplesW, "samples per record");
  for (auto& s : h.signals) s.reserved = r.text(kSignalReservedW);

  for (const auto& s : h.signals) {
    if (s.digital_max <= s.digital_min) {
      throw MalformedHeader(fmt::format("signal '{}': digital range [{}, {}] is degenerate", s.label,
                                        s.digital_min, s.digital_max));
    }
    if (s.physical_max == s.physical_min) {
      throw MalformedHeader(fmt::format("signal '{}': physical range is degenerate", s.label));
    }
  }
  return h;
}

double digital_to_physical(const EdfSignalHeader& s, int digital) {
  return s.physical_min + static_cast<double>(digital - s.digital_min) *
                              (s.physical_max - s.physical_min) /
                              static_cast<double>(s.digital_max - s.digital_min);
}

Recording read_edf_signals(std::span<const std::uint8_t> source,
                           const std::optional<std::vector<std::string>>& channels) {
  const EdfHeader h = parse_edf_header(source);
  const std::size_t data_offset = kFixedHeaderBytes + kSignalHeaderBytes * h.n_signals();
  const std::size_t record_bytes = 2 * h.record_samples();
  const std::size_t available = source.size() - data_offset;
  const std::size_t n_records =
      h.n_records >= 0 ? static_cast<std::size_t>(h.n_records) : available / record_bytes;
  if (available < n_records * record_bytes) {
    throw TruncatedData(fmt::format("EDF data area holds {} bytes, header promises {}", available,
                                    n_records * record_bytes));
  }

  std::vector<std::size_t> picks;
  if (channels) {
    for (const auto& label : *channels) {
      const auto it = std::find_if(h.signals.begin(), h.signals.end(),
                                   [&](const EdfSignalHeader& s) { return s.label == label; });
      if (it == h.signals.end()) throw UnknownChannel(fmt::format("channel '{}' not in EDF", label));
      picks.push_back(static_cast<std::size_t>(it - h.signals.begin()));
    }
  } else {
    for (std::size_t i = 0; i < h.n_signals(); ++i) {
      if (h.signals[i].label != kEdfAnnotationLabel) picks.push_back(i);
    }
  }
  if (picks.empty()) throw UnknownChannel("no EEG channels selected");

  const std::size_t spr = h.signals[picks.front()].samples_per_record;
  for (auto p : picks) {
    if (h.signals[p].samples_per_record != spr) {
      throw UnsupportedVariant(fmt::format("channel '{}' has {} samples/record, expected {}",
                                           h.signals[p].label, h.signals[p].samples_per_record, spr));
    }
  }

  // Byte offset of each signal inside one record.
  std::vector<std::size_t> signal_offset(h.n_signals());
  for (std::size_t i = 0, acc = 0; i < h.n_signals(); ++i) {
    signal_offset[i] = acc;
    acc += 2 * h.signals[i].samples_per_record;
  }

  const std::size_t n_samples = n_records * spr;
  std::vector<double> samples(picks.size() * n_samples);
  std::vector<std::string> labels;
  for (std::size_t c = 0; c < picks.size(); ++c) {
    const auto& sig = h.signals[picks[c]];
    labels.push_back(sig.label);
    double* out = samples.data() + c * n_samples;
    for (std::size_t rec = 0; rec < n_records; ++rec) {
      const std::uint8_t* p = source.data() + data_offset + rec * record_bytes + signal_offset[picks[c]];
      for (std::size_t k = 0; k < spr; ++k, p += 2) {
        const auto d = static_cast<std::int16_t>(static_cast<std::uint16_t>(p[0] | (p[1] << 8)));
        *out++ = digital_to_physical(sig, d);
      }
    }
  }
  return Recording(std::move(labels), static_cast<double>(spr) / h.record_duration, n_samples,
                   std::move(samples));
}

EdfHeader make_edf_header(const Recording& recording, double record_duration,
                          const std::string& patient, const std::string& recording_id) {
  const double spr_exact = recording.fs() * record_duration;
  const auto spr = static_cast<std::size_t>(std::llround(spr_exact));
  if (spr == 0 || std::abs(spr_exact - static_cast<double>(spr)) > 1e-9) {
    throw InvalidSpec("record duration must hold a whole number of samples");
  }
  if (recording.n_samples() % spr != 0) {
    throw InvalidSpec("recording length is not a whole number of EDF records");
  }

  EdfHeader h;
  h.version = "0";
  h.patient = patient;
  h.recording = recording_id;
  h.start_date = "01.01.00";
  h.start_time = "00.00.00";
  h.header_bytes = kFixedHeaderBytes * (recording.n_channels() + 1);
  h.n_records = static_cast<long>(recording.n_samples() / spr);
  h.record_duration = std::stod(format_number(record_duration));
  for (std::size_t c = 0; c < recording.n_channels(); ++c) {
    const auto ch = recording.channel(c);
    double lo = ch.empty() ? -1.0 : *std::min_element(ch.begin(), ch.end());
    double hi = ch.empty() ? 1.0 : *std::max_element(ch.begin(), ch.end());
    if (hi - lo < 1e-3) {
      lo -= 1.0;
      hi += 1.0;
    }
    EdfSignalHeader s;
    s.label = recording.channel_labels()[c];
    s.physical_dimension = "uV";
    s.physical_min = std::stod(format_bound(lo, false));
    s.physical_max = std::stod(format_bound(hi, true));
    s.digital_min = std::numeric_limits<std::int16_t>::min();
    s.digital_max = std::numeric_limits<std::int16_t>::max();
    s.samples_per_record = spr;
    h.signals.push_back(std::move(s));
  }
  return h;
}

std::vector<std::uint8_t> encode_edf_header(const EdfHeader& h) {
  std::vector<std::uint8_t> out;
  out.reserve(kFixedHeaderBytes + kSignalHeaderBytes * h.n_signals());
  put_field(out, h.version, 8);
  put_field(out, h.patient, 80);
  put_field(out, h.recording, 80);
  put_field(out, h.start_date, 8);
  put_field(out, h.start_time, 8);
  put_field(out, std::to_string(h.header_bytes), 8);
  put_field(out, h.reserved, 44);
  put_field(out, std::to_string(h.n_records), 8);
  put_field(out, format_number(h.record_duration), 8);
  put_field(out, std::to_string(h.n_signals()), 4);
  for (const auto& s : h.signals) put_field(out, s.label, kLabelW);
  for (const auto& s : h.signals) put_field(out, s.transducer, kTransducerW);
  for (const auto& s : h.signals) put_field(out, s.physical_dimension, kDimW);
  for (const auto& s : h.signals) put_field(out, format_number(s.physical_min), kNumW);
  for (const auto& s : h.signals) put_field(out, format_number(s.physical_max), kNumW);
  for (const auto& s : h.signals) put_field(out, std::to_string(s.digital_min), kNumW);
  for (const auto& s : h.signals) put_field(out, std::to_string(s.digital_max), kNumW);
  for (const auto& s : h.signals) put_field(out, s.prefiltering, kPrefilterW);
  for (const auto& s : h.signals) put_field(out, std::to_string(s.samples_per_record), kSamplesW);
  for (const auto& s : h.signals) put_field(out, s.reserved, kSignalReservedW);
  return out;
}

std::vector<std::uint8_t> write_edf(const EdfHeader& h, const Recording& recording) {
  if (h.n_signals() != recording.n_channels()) {
    throw InvalidSpec("EDF header and recording disagree on channel count");
  }
  auto out = encode_edf_header(h);
  const auto n_records = static_cast<std::size_t>(h.n_records);
  out.reserve(out.size() + 2 * n_records * h.record_samples());
  for (std::size_t rec = 0; rec < n_records; ++rec) {
    for (std::size_t c = 0; c < h.n_signals(); ++c) {
      const auto& s = h.signals[c];
      const auto ch = recording.channel(c);
      const double gain = static_cast<double>(s.digital_max - s.digital_min) /
                          (s.physical_max - s.physical_min);
      for (std::size_t k = 0; k < s.samples_per_record; ++k) {
        const double p = ch[rec * s.samples_per_record + k];
        const double d = std::round(s.digital_min + (p - s.physical_min) * gain);
        const auto q = static_cast<std::int16_t>(
            std::clamp(d, static_cast<double>(s.digital_min), static_cast<double>(s.digital_max)));
        const auto u = static_cast<std::uint16_t>(q);
        out.push_back(static_cast<std::uint8_t>(u & 0xff));
        out.push_back(static_cast<std::uint8_t>(u >> 8));
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace seizurenet::ingest
