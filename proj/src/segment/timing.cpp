#include "seizurenet/segment/timing.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "seizurenet/errors.hpp"

namespace seizurenet::segment {

namespace {

constexpr double kEps = 1e-9;

// `spans` minus the union of `holes`; both inputs in any order, output sorted.
std::vector<Span> subtract(std::vector<Span> spans, std::vector<Span> holes) {
  std::sort(holes.begin(), holes.end(), [](const Span& a, const Span& b) { return a.start < b.start; });
  std::vector<Span> out;
  for (const auto& s : spans) {
    double cursor = s.start;
    for (const auto& h : holes) {
      if (h.end <= cursor || h.start >= s.end) continue;
      if (h.start > cursor) out.push_back({cursor, h.start});
      cursor = std::max(cursor, h.end);
      if (cursor >= s.end) break;
    }
    if (cursor < s.end) out.push_back({cursor, s.end});
  }
  std::sort(out.begin(), out.end(), [](const Span& a, const Span& b) { return a.start < b.start; });
  return out;
}

}  // namespace

TimingPolicy TimingPolicy::compressed(double seconds_per_hour) const {
  const double k = seconds_per_hour / 3600.0;
  TimingPolicy p = *this;
  p.sop *= k;
  p.sph *= k;
  p.interictal_gap *= k;
  p.seizure_free_T *= k;
  return p;
}

void validate(const TimingPolicy& p) {
  if (!(p.sop > 0.0)) throw ConfigError("timing.sop must be positive");
  if (!(p.sph >= 0.0)) throw ConfigError("timing.sph must be non-negative");
  if (!(p.interictal_gap >= 0.0)) throw ConfigError("timing.interictal_gap must be non-negative");
  if (!(p.seizure_free_T >= 0.0)) throw ConfigError("timing.seizure_free_T must be non-negative");
  if (!(p.window_len > 0.0)) throw ConfigError("timing.window_len must be positive");
  if (!(p.overlap >= 0.0 && p.overlap < p.window_len)) {
    throw ConfigError("timing.overlap must lie in [0, window_len)");
  }
}

const char* to_string(Label label) { return label == Label::Preictal ? "preictal" : "interictal"; }

std::vector<std::size_t> select_leading_seizures(std::span<const ingest::SeizureAnnotation> a,
                                                 double seizure_free_T) {
  std::vector<std::size_t> leading;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i == 0 || a[i].onset - a[i - 1].end >= seizure_free_T) leading.push_back(i);
  }
  return leading;
}

Labeling label_intervals(std::span<const ingest::SeizureAnnotation> a, std::span<const std::size_t> leading,
                         const TimingPolicy& policy, std::span<const Span> recorded) {
  validate(policy);
  ingest::validate_annotations(a);
  std::vector<Span> spans;
  for (const auto& r : recorded) {
    if (r.end > r.start) spans.push_back(r);
  }

  Labeling out;
  std::vector<Span> preictal_spans;
  for (const auto idx : leading) {
    if (idx >= a.size()) throw DataError(fmt::format("leading seizure {} out of range", idx));
    const double onset = a[idx].onset;
    double lo = onset - policy.sph - policy.sop;
    const double hi = onset - policy.sph;
    for (std::size_t j = 0; j < idx; ++j) lo = std::max(lo, a[j].end);

    bool any = false;
    for (const auto& r : spans) {
      const double s = std::max(lo, r.start);
      const double e = std::min(hi, r.end);
      if (e > s) {
        out.intervals.push_back({s, e, Label::Preictal, idx});
        preictal_spans.push_back({s, e});
        any = true;
      }
    }
    if (!any) out.empty_preictal.push_back(idx);
  }

  std::vector<Span> excluded = preictal_spans;
  for (const auto& sz : a) excluded.push_back({sz.onset - policy.interictal_gap, sz.end + policy.interictal_gap});
  for (const auto& s : subtract(spans, excluded)) {
    out.intervals.push_back({s.start, s.end, Label::Interictal, std::nullopt});
  }

  std::sort(out.intervals.begin(), out.intervals.end(),
            [](const LabeledInterval& x, const LabeledInterval& y) { return x.start < y.start; });
  return out;
}

Labeling label_intervals(std::span<const ingest::SeizureAnnotation> a, std::span<const std::size_t> leading,
                         const TimingPolicy& policy, double timeline_end) {
  const Span whole{0.0, timeline_end};
  return label_intervals(a, leading, policy, std::span<const Span>(&whole, 1));
}

std::vector<double> slide_windows(const LabeledInterval& interval, const TimingPolicy& policy, double fs) {
  validate(policy);
  const double per_window = policy.window_len * fs;
  if (std::abs(per_window - std::round(per_window)) > kEps * std::max(1.0, per_window)) {
    throw ConfigError(fmt::format("window_len {} s is not a whole number of samples at {} Hz", policy.window_len, fs));
  }
  std::vector<double> starts;
  const double len = interval.end - interval.start;
  if (len + kEps < policy.window_len) return starts;
  const double stride = policy.stride();
  const auto n = static_cast<std::size_t>(std::floor((len - policy.window_len) / stride + kEps)) + 1;
  starts.reserve(n);
  for (std::size_t k = 0; k < n; ++k) starts.push_back(interval.start + static_cast<double>(k) * stride);
  return starts;
}

}  // namespace seizurenet::segment
