#include "seizurenet/segment/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "seizurenet/errors.hpp"
#include "seizurenet/ingest/edf.hpp"
#include "seizurenet/io.hpp"
#include "seizurenet/json_util.hpp"
#include "seizurenet/serialization.hpp"

namespace seizurenet::segment {

static_assert(std::endian::native == std::endian::little, "dataset cache I/O assumes a little-endian host");

namespace {

constexpr int kCacheFormat = 1;
constexpr double kEps = 1e-9;

const ingest::TimelineSegment* segment_containing(const ingest::Timeline& tl, double start, double end) {
  for (const auto& s : tl.segments) {
    if (start >= s.start() - kEps && end <= s.end() + kEps) return &s;
  }
  return nullptr;
}

}  // namespace

bool sample_order(const SpectralSample& a, const SpectralSample& b) {
  return std::tuple(static_cast<int>(a.label), a.fold_key, a.origin) <
         std::tuple(static_cast<int>(b.label), b.fold_key, b.origin);
}

std::vector<std::int64_t> Dataset::fold_keys() const {
  std::set<std::int64_t> keys;
  for (const auto& s : samples) {
    if (s.label == Label::Preictal) keys.insert(s.fold_key);
  }
  return {keys.begin(), keys.end()};
}

SampleShape sample_shape(std::size_t n_channels, double window_len, double fs, const StftConfig& cfg) {
  const auto n = static_cast<std::size_t>(std::llround(window_len * fs));
  return {n_channels, cfg.n_bins(), cfg.n_frames(n)};
}

Dataset build_dataset(const ingest::Timeline& tl, const TimingPolicy& policy, const StftConfig& cfg,
                      std::size_t min_folds) {
  validate(policy);
  validate(cfg);
  if (tl.segments.empty()) throw DataError("timeline holds no recordings");
  const auto& first = tl.segments.front().recording;
  for (const auto& s : tl.segments) {
    if (s.recording.fs() != first.fs() || s.recording.channel_labels() != first.channel_labels()) {
      throw DataError(fmt::format("'{}' differs from '{}' in sampling rate or channels", s.source,
                                  tl.segments.front().source));
    }
  }

  Dataset d;
  d.policy = policy;
  d.stft = cfg;
  d.fs = first.fs();
  d.channels = first.channel_labels();
  d.shape = sample_shape(first.n_channels(), policy.window_len, d.fs, cfg);
  if (d.shape[2] == 0) {
    throw WindowTooShort(fmt::format("a {} s window at {} Hz is shorter than n_fft = {}", policy.window_len, d.fs,
                                     cfg.n_fft));
  }

  std::vector<Span> recorded;
  for (const auto& s : tl.segments) recorded.push_back({s.start(), s.end()});
  const auto leading = select_leading_seizures(tl.seizures, policy.seizure_free_T);
  const auto labeling = label_intervals(tl.seizures, leading, policy, recorded);
  d.summary.n_seizures = tl.seizures.size();
  d.summary.leading = leading;
  d.summary.empty_preictal = labeling.empty_preictal;

  const auto window_samples = static_cast<std::size_t>(std::llround(policy.window_len * d.fs));
  const std::size_t C = first.n_channels();
  std::vector<double> buffer(C * window_samples);

  for (const auto& interval : labeling.intervals) {
    (interval.label == Label::Preictal ? d.summary.preictal_seconds : d.summary.interictal_seconds) +=
        interval.length();
    for (const double start : slide_windows(interval, policy, d.fs)) {
      const auto* seg = segment_containing(tl, start, start + policy.window_len);
      if (seg == nullptr) continue;
      const auto i0 = static_cast<std::size_t>(std::llround((start - seg->offset) * d.fs));
      if (i0 + window_samples > seg->recording.n_samples()) continue;
      for (std::size_t c = 0; c < C; ++c) {
        const auto ch = seg->recording.channel(c).subspan(i0, window_samples);
        std::copy(ch.begin(), ch.end(), buffer.begin() + static_cast<long>(c * window_samples));
      }
      const auto spec = stft_featurize(buffer, C, cfg);
      SpectralSample s;
      s.values.assign(spec.values.begin(), spec.values.end());
      s.label = interval.label;
      s.fold_key = interval.source_seizure ? static_cast<std::int64_t>(*interval.source_seizure) : kInterictalFold;
      s.origin = start;
      d.samples.push_back(std::move(s));
    }
  }
  std::sort(d.samples.begin(), d.samples.end(), sample_order);

  for (const auto& s : d.samples) {
    if (s.label == Label::Preictal) {
      ++d.summary.n_preictal;
      ++d.summary.preictal_per_fold[s.fold_key];
    } else {
      ++d.summary.n_interictal;
    }
  }
  if (d.summary.preictal_per_fold.size() < min_folds) {
    throw InsufficientSeizures(fmt::format("{} leading seizures with preictal data; at least {} are required",
                                           d.summary.preictal_per_fold.size(), min_folds));
  }
  return d;
}

void save_dataset(const Dataset& d, const std::string& manifest_path, const std::string& data_path) {
  Json samples = Json::array();
  for (const auto& s : d.samples) {
    samples.push_back(Json{{"label", to_string(s.label)}, {"fold_key", s.fold_key}, {"origin", s.origin}});
  }
  Json per_fold = Json::object();
  for (const auto& [k, n] : d.summary.preictal_per_fold) per_fold[std::to_string(k)] = n;
  const Json manifest{
      {"format", kCacheFormat},
      {"policy", to_json(d.policy)},
      {"stft", to_json(d.stft)},
      {"fs", d.fs},
      {"channels", d.channels},
      {"shape", d.shape},
      {"dtype", "float32-le"},
      {"counts",
       {{"seizures", d.summary.n_seizures},
        {"leading", d.summary.leading},
        {"empty_preictal", d.summary.empty_preictal},
        {"preictal", d.summary.n_preictal},
        {"interictal", d.summary.n_interictal},
        {"preictal_per_fold", per_fold},
        {"preictal_seconds", d.summary.preictal_seconds},
        {"interictal_seconds", d.summary.interictal_seconds}}},
      {"samples", samples}};

  std::vector<std::uint8_t> bytes(d.samples.size() * d.sample_size() * sizeof(float));
  std::size_t at = 0;
  for (const auto& s : d.samples) {
    if (s.values.size() != d.sample_size()) throw ShapeMismatch("sample size does not match the dataset shape");
    std::memcpy(bytes.data() + at, s.values.data(), s.values.size() * sizeof(float));
    at += s.values.size() * sizeof(float);
  }
  io::write_file_atomic(data_path, bytes);
  io::write_file_atomic(manifest_path, manifest.dump(2) + "\n");
}

Dataset load_dataset(const std::string& manifest_path, const std::string& data_path) {
  Json m;
  try {
    m = Json::parse(io::read_text_file(manifest_path));
  } catch (const Json::parse_error& e) {
    throw DataError(fmt::format("'{}' is not valid JSON: {}", manifest_path, e.what()));
  }
  Dataset d;
  StrictObject o(m, "manifest");
  int format = 0;
  o.required("format", format);
  if (format != kCacheFormat) throw DataError(fmt::format("unsupported dataset cache format {}", format));
  d.policy = timing_policy_from_json(o.child("policy"), "manifest.policy");
  d.stft = stft_config_from_json(o.child("stft"), "manifest.stft");
  o.required("fs", d.fs);
  o.required("channels", d.channels);
  o.required("shape", d.shape);
  std::string dtype;
  o.required("dtype", dtype);
  if (dtype != "float32-le") throw DataError(fmt::format("unsupported dtype '{}'", dtype));

  StrictObject counts(o.child("counts"), "manifest.counts");
  counts.optional("seizures", d.summary.n_seizures);
  counts.optional("leading", d.summary.leading);
  counts.optional("empty_preictal", d.summary.empty_preictal);
  counts.optional("preictal", d.summary.n_preictal);
  counts.optional("interictal", d.summary.n_interictal);
  counts.optional("preictal_seconds", d.summary.preictal_seconds);
  counts.optional("interictal_seconds", d.summary.interictal_seconds);
  if (counts.has("preictal_per_fold")) {
    for (const auto& [k, v] : counts.child("preictal_per_fold").items()) {
      d.summary.preictal_per_fold[std::stoll(k)] = v.get<std::size_t>();
    }
  }
  counts.finish();

  const auto bytes = ingest::read_file_bytes(data_path);
  const auto& list = o.child("samples");
  o.finish();
  const std::size_t n = d.sample_size();
  if (bytes.size() != list.size() * n * sizeof(float)) {
    throw TruncatedData(fmt::format("'{}' holds {} bytes, manifest needs {}", data_path, bytes.size(),
                                    list.size() * n * sizeof(float)));
  }
  d.samples.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    StrictObject so(list[i], fmt::format("manifest.samples[{}]", i));
    std::string label;
    SpectralSample s;
    so.required("label", label);
    so.required("fold_key", s.fold_key);
    so.required("origin", s.origin);
    so.finish();
    if (label == "preictal") {
      s.label = Label::Preictal;
    } else if (label == "interictal") {
      s.label = Label::Interictal;
    } else {
      throw DataError(fmt::format("sample {} has unknown label '{}'", i, label));
    }
    s.values.resize(n);
    std::memcpy(s.values.data(), bytes.data() + i * n * sizeof(float), n * sizeof(float));
    d.samples.push_back(std::move(s));
  }
  return d;
}

}  // namespace seizurenet::segment
