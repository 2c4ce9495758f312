#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "oracles.hpp"
#include "seizurenet/errors.hpp"
#include "seizurenet/segment/dataset.hpp"
#include "seizurenet/segment/stft.hpp"
#include "seizurenet/segment/timing.hpp"

using namespace seizurenet;
using namespace seizurenet::segment;
using ingest::SeizureAnnotation;

namespace {

constexpr double kHour = 3600.0;

std::vector<SeizureAnnotation> seizures_at_hours(std::initializer_list<std::pair<double, double>> hours) {
  std::vector<SeizureAnnotation> out;
  for (const auto& [a, b] : hours) out.push_back({out.size(), a * kHour, b * kHour});
  return out;
}

// A continuous low-rate recording with seizures at the given onsets.
ingest::Timeline flat_timeline(double duration, double fs, std::size_t channels,
                               const std::vector<SeizureAnnotation>& seizures, std::uint64_t seed = 1) {
  const auto n = static_cast<std::size_t>(duration * fs);
  std::mt19937_64 rng(seed);
  std::vector<std::string> labels;
  for (std::size_t c = 0; c < channels; ++c) labels.push_back("C" + std::to_string(c));
  ingest::Timeline t;
  t.segments.push_back({"flat", 0.0, ingest::Recording(labels, fs, n, oracle::gaussian(channels * n, rng))});
  t.seizures = seizures;
  return t;
}

StftConfig small_stft(std::size_t fs) {
  StftConfig c;
  c.n_fft = fs;
  c.hop = fs / 2;
  c.bin_first = 1;
  c.bin_last = fs / 2;
  return c;
}

}  // namespace

TEST_CASE("leading seizures with a four-hour clustering gap") {
  const auto s = seizures_at_hours({{0, 0.1}, {1, 1.1}, {6, 6.1}, {20, 20.1}});
  CHECK(select_leading_seizures(s, 4 * kHour) == std::vector<std::size_t>{0, 2, 3});
  CHECK(select_leading_seizures({}, 4 * kHour).empty());
}

TEST_CASE("inserting a seizure inside a cluster keeps the leading onsets") {
  std::mt19937_64 rng(11);
  const double T = 4 * kHour;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SeizureAnnotation> s;
    double t = std::uniform_real_distribution<double>(0, 2 * kHour)(rng);
    const auto n = std::uniform_int_distribution<int>(2, 8)(rng);
    for (int i = 0; i < n; ++i) {
      const double dur = std::uniform_real_distribution<double>(10, 120)(rng);
      s.push_back({s.size(), t, t + dur});
      t += dur + std::uniform_real_distribution<double>(600, 8 * kHour)(rng);
    }
    auto onsets = [&](const std::vector<SeizureAnnotation>& v) {
      std::vector<double> o;
      for (auto i : select_leading_seizures(v, T)) o.push_back(v[i].onset);
      return o;
    };
    const auto before = onsets(s);
    // Pick a gap that lies inside a cluster and drop a short seizure into it.
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      const double gap = s[i + 1].onset - s[i].end;
      if (gap >= T || gap < 60) continue;
      auto inserted = s;
      const double on = s[i].end + gap / 3;
      inserted.insert(inserted.begin() + static_cast<long>(i + 1), {0, on, on + gap / 6});
      CHECK(onsets(inserted) == before);
      break;
    }
  }
}

TEST_CASE("preictal interval geometry") {
  TimingPolicy p;
  const std::vector<SeizureAnnotation> s{{0, 7200, 7260}};
  const auto lab = label_intervals(s, std::vector<std::size_t>{0}, p, 20000.0);
  const auto pre = std::find_if(lab.intervals.begin(), lab.intervals.end(),
                                [](const auto& i) { return i.label == Label::Preictal; });
  REQUIRE(pre != lab.intervals.end());
  CHECK(pre->start == 5100.0);
  CHECK(pre->end == 6900.0);
  CHECK(pre->source_seizure == 0u);

  // [t - 2100, t - 300) for any onset far from the recording start.
  const std::vector<SeizureAnnotation> s2{{0, 50000, 50100}};
  const auto lab2 = label_intervals(s2, std::vector<std::size_t>{0}, p, 60000.0);
  bool found = false;
  for (const auto& i : lab2.intervals) {
    if (i.label == Label::Preictal) {
      CHECK(i.start == 50000 - 2100);
      CHECK(i.end == 50000 - 300);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("preictal clipping at the recording start") {
  TimingPolicy p;
  const std::vector<SeizureAnnotation> early{{0, 100, 150}};
  const auto lab = label_intervals(early, std::vector<std::size_t>{0}, p, 30000.0);
  CHECK(lab.empty_preictal == std::vector<std::size_t>{0});
  const std::vector<SeizureAnnotation> partial{{0, 1000, 1050}};
  const auto lab2 = label_intervals(partial, std::vector<std::size_t>{0}, p, 30000.0);
  CHECK(lab2.empty_preictal.empty());
  CHECK(lab2.intervals.front().label == Label::Preictal);
  CHECK(lab2.intervals.front().start == 0.0);
  CHECK(lab2.intervals.front().end == 700.0);
}

TEST_CASE("interictal is the complement of the exclusion zones") {
  TimingPolicy p;
  const double dur = 120.0;
  const std::vector<SeizureAnnotation> s{{0, 10 * kHour, 10 * kHour + dur}};
  const auto lab = label_intervals(s, std::vector<std::size_t>{0}, p, 20 * kHour);
  std::vector<LabeledInterval> inter;
  for (const auto& i : lab.intervals)
    if (i.label == Label::Interictal) inter.push_back(i);
  REQUIRE(inter.size() == 2);
  CHECK(inter[0].start == 0.0);
  CHECK(inter[0].end == 6 * kHour);
  CHECK(inter[1].start == 14 * kHour + dur);
  CHECK(inter[1].end == 20 * kHour);
}

TEST_CASE("labels never overlap and stay inside recorded spans") {
  std::mt19937_64 rng(5);
  TimingPolicy p = TimingPolicy{}.compressed(600);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<SeizureAnnotation> s;
    double t = std::uniform_real_distribution<double>(0, 3000)(rng);
    for (int i = 0; i < 6; ++i) {
      s.push_back({s.size(), t, t + 40});
      t += 40 + std::uniform_real_distribution<double>(100, 5000)(rng);
    }
    const std::vector<Span> rec{{0, t * 0.4}, {t * 0.45, t + 1000}};
    const auto lab = label_intervals(s, select_leading_seizures(s, p.seizure_free_T), p, rec);
    for (std::size_t i = 0; i < lab.intervals.size(); ++i) {
      const auto& a = lab.intervals[i];
      CHECK(a.end > a.start);
      CHECK(std::any_of(rec.begin(), rec.end(), [&](const Span& r) { return a.start >= r.start && a.end <= r.end; }));
      for (std::size_t j = i + 1; j < lab.intervals.size(); ++j) {
        const auto& b = lab.intervals[j];
        CHECK((a.end <= b.start || b.end <= a.start));
      }
      if (a.label == Label::Interictal) {
        for (const auto& z : s) {
          CHECK((a.end <= z.onset - p.interictal_gap + 1e-9 || a.start >= z.end + p.interictal_gap - 1e-9));
        }
      }
    }
  }
}

TEST_CASE("window counts") {
  TimingPolicy p;
  auto count = [&](double len) { return slide_windows({0, len, Label::Preictal, 0}, p, 256).size(); };
  CHECK(count(1800) == 81);
  CHECK(count(30) == 1);
  CHECK(count(29) == 0);
  const auto w = slide_windows({100, 1900, Label::Preictal, 0}, p, 256);
  CHECK(w.front() == 100.0);
  CHECK(w[1] - w[0] == 22.0);
  CHECK(w.back() + 30.0 <= 1900.0);
  p.window_len = 30.001;
  CHECK_THROWS_AS(slide_windows({0, 100, Label::Interictal, {}}, p, 256), ConfigError);
}

TEST_CASE("STFT matches a naive DFT") {
  std::mt19937_64 rng(3);
  for (std::size_t trial = 0; trial < 6; ++trial) {
    StftConfig cfg;
    cfg.n_fft = trial % 2 ? 64 : 100;
    cfg.hop = cfg.n_fft / 2 + trial;
    cfg.bin_first = trial % 3;
    cfg.bin_last = cfg.n_fft / 2;
    cfg.magnitude_transform = MagnitudeTransform::Linear;
    const std::size_t channels = 2, n = 5 * cfg.n_fft + 7;
    const auto x = oracle::gaussian(channels * n, rng, 20.0);
    const auto s = stft_featurize(x, channels, cfg);
    REQUIRE(s.frames == (n - cfg.n_fft) / cfg.hop + 1);
    REQUIRE(s.bins == cfg.n_bins());
    double worst = 0.0;
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t t = 0; t < s.frames; ++t) {
        const auto ref = oracle::dft_magnitudes(std::span(x).subspan(c * n + t * cfg.hop, cfg.n_fft));
        for (std::size_t f = 0; f < s.bins; ++f) {
          const double r = ref[f + cfg.bin_first];
          worst = std::max(worst, std::abs(s.at(c, f, t) - r) / std::max(r, 1e-12));
        }
      }
    CHECK(worst < 1e-8);

    cfg.magnitude_transform = MagnitudeTransform::Log1p;
    const auto l = stft_featurize(x, channels, cfg);
    CHECK(l.values[5] == doctest::Approx(std::log1p(s.values[5])).epsilon(1e-14));
  }
}

TEST_CASE("STFT shapes and simple signals") {
  StftConfig cfg;
  const std::size_t fs = 256, n = 30 * fs;
  SUBCASE("30 s at 256 Hz") {
    const auto s = stft_featurize(std::vector<double>(18 * n, 0.0), 18, cfg);
    CHECK(s.channels == 18);
    CHECK(s.bins == 128);
    CHECK(s.frames == 59);
    CHECK(std::all_of(s.values.begin(), s.values.end(), [](double v) { return v == 0.0; }));
  }
  SUBCASE("10 Hz sinusoid") {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2 * std::numbers::pi * 10.0 * static_cast<double>(i) / fs);
    const auto s = stft_featurize(x, 1, cfg);
    for (std::size_t t = 0; t < s.frames; ++t) {
      std::size_t best = 0;
      for (std::size_t f = 1; f < s.bins; ++f)
        if (s.at(0, f, t) > s.at(0, best, t)) best = f;
      CHECK(best + cfg.bin_first == 10);
    }
  }
  SUBCASE("too short") { CHECK_THROWS_AS(stft_featurize(std::vector<double>(100), 1, cfg), WindowTooShort); }
}

TEST_CASE("dataset from a three-seizure clinical timeline") {
  // Seizures 10 h apart at 8 Hz: every one is leading with a full 30 min
  // preictal interval, so each contributes 81 windows.
  const double fs = 8;
  const std::vector<SeizureAnnotation> s{{0, 6 * kHour, 6 * kHour + 60}, {1, 16 * kHour, 16 * kHour + 60},
                                         {2, 26 * kHour, 26 * kHour + 60}};
  const auto tl = flat_timeline(32 * kHour, fs, 2, s);
  const auto ds = build_dataset(tl, TimingPolicy{}, small_stft(8));
  CHECK(ds.summary.leading == std::vector<std::size_t>{0, 1, 2});
  CHECK(ds.summary.n_preictal == 243);
  for (const auto& [k, n] : ds.summary.preictal_per_fold) CHECK(n == 81);
  for (const auto& x : ds.samples) {
    CHECK(x.values.size() == ds.sample_size());
    if (x.label == Label::Preictal) CHECK((x.fold_key >= 0 && x.fold_key <= 2));
    if (x.label == Label::Interictal) CHECK(x.fold_key == kInterictalFold);
  }
  CHECK(ds.fold_keys() == std::vector<std::int64_t>{0, 1, 2});
  CHECK(std::is_sorted(ds.samples.begin(), ds.samples.end(), sample_order));

  SUBCASE("cache round trip is bit-identical to a fresh featurization") {
    const auto dir = oracle::scratch_dir("dataset-cache");
    save_dataset(ds, (dir / "d.json").string(), (dir / "d.f32").string());
    const auto back = load_dataset((dir / "d.json").string(), (dir / "d.f32").string());
    const auto fresh = build_dataset(tl, TimingPolicy{}, small_stft(8));
    REQUIRE(back.samples.size() == fresh.samples.size());
    CHECK(back.shape == fresh.shape);
    CHECK(back.policy == fresh.policy);
    CHECK(back.stft == fresh.stft);
    for (std::size_t i = 0; i < back.samples.size(); ++i) {
      CHECK(back.samples[i].label == fresh.samples[i].label);
      CHECK(back.samples[i].fold_key == fresh.samples[i].fold_key);
      CHECK(back.samples[i].origin == fresh.samples[i].origin);
      CHECK(std::memcmp(back.samples[i].values.data(), fresh.samples[i].values.data(),
                        fresh.samples[i].values.size() * sizeof(float)) == 0);
    }
  }

  SUBCASE("a damaged cache is rejected") {
    const auto dir = oracle::scratch_dir("dataset-damaged");
    save_dataset(ds, (dir / "d.json").string(), (dir / "d.f32").string());
    std::filesystem::resize_file(dir / "d.f32", 16);
    CHECK_THROWS_AS(load_dataset((dir / "d.json").string(), (dir / "d.f32").string()), DataError);
  }
}

TEST_CASE("two leading seizures are not enough") {
  const std::vector<SeizureAnnotation> s{{0, 6 * kHour, 6 * kHour + 60}, {1, 16 * kHour, 16 * kHour + 60}};
  CHECK_THROWS_AS(build_dataset(flat_timeline(22 * kHour, 8, 1, s), TimingPolicy{}, small_stft(8)),
                  InsufficientSeizures);
}

TEST_CASE("leading selection is idempotent and keeps input order") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SeizureAnnotation> s;
    double t = std::uniform_real_distribution<double>(0, kHour)(rng);
    for (int i = 0, n = std::uniform_int_distribution<int>(0, 10)(rng); i < n; ++i) {
      s.push_back({s.size(), t, t + 60});
      t += 60 + std::uniform_real_distribution<double>(60, 10 * kHour)(rng);
    }
    const auto lead = select_leading_seizures(s, 4 * kHour);
    CHECK(std::is_sorted(lead.begin(), lead.end()));
    CHECK(select_leading_seizures(s, 4 * kHour) == lead);
    std::vector<SeizureAnnotation> only;
    for (auto i : lead) only.push_back(s[i]);
    std::vector<std::size_t> all(only.size());
    std::iota(all.begin(), all.end(), 0);
    CHECK(select_leading_seizures(only, 4 * kHour) == all);
  }
}

TEST_CASE("windows are evenly spaced and inside their interval") {
  std::mt19937_64 rng(13);
  TimingPolicy p;
  for (int trial = 0; trial < 300; ++trial) {
    const double start = std::uniform_real_distribution<double>(0, 5000)(rng);
    const double len = std::uniform_real_distribution<double>(0, 4000)(rng);
    const auto w = slide_windows({start, start + len, Label::Interictal, {}}, p, 256);
    for (std::size_t i = 0; i < w.size(); ++i) {
      CHECK(w[i] >= start);
      CHECK(w[i] + p.window_len <= start + len);
      if (i > 0) CHECK(w[i] - w[i - 1] == doctest::Approx(p.stride()).epsilon(1e-12));
    }
    // One more stride would leave the interval.
    if (!w.empty()) CHECK(w.back() + p.stride() + p.window_len > start + len);
  }
}

TEST_CASE("dataset windows respect seizures and share one shape") {
  // The second seizure sits inside the first one's cluster.
  const double fs = 8;
  const std::vector<SeizureAnnotation> s{{0, 6 * kHour, 6 * kHour + 60},
                                         {1, 7 * kHour, 7 * kHour + 90},
                                         {2, 16 * kHour, 16 * kHour + 60},
                                         {3, 26 * kHour, 26 * kHour + 60}};
  const TimingPolicy p;
  const auto ds = build_dataset(flat_timeline(32 * kHour, fs, 2, s), p, small_stft(8));
  CHECK(ds.summary.leading == std::vector<std::size_t>{0, 2, 3});
  CHECK(ds.shape == sample_shape(2, p.window_len, fs, small_stft(8)));
  for (const auto& x : ds.samples) {
    CHECK(x.values.size() == ds.sample_size());
    const double a = x.origin, b = x.origin + p.window_len;
    for (const auto& z : s) {
      CHECK((b <= z.onset || a > z.end));
      if (x.label == Label::Interictal) {
        const double distance = std::max(z.onset - b, a - z.end);
        CHECK(distance >= p.interictal_gap);
      }
    }
  }
}
