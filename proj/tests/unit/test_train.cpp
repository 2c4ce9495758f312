#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "oracles.hpp"
#include "seizurenet/errors.hpp"
#include "seizurenet/pipeline/commands.hpp"
#include "seizurenet/train/adam.hpp"
#include "seizurenet/train/metrics.hpp"
#include "seizurenet/train/trainer.hpp"

using namespace seizurenet;
using namespace seizurenet::train;
using segment::Label;

namespace {

const segment::Dataset& synthetic_dataset() {
  static const segment::Dataset ds = pipeline::build_dataset_for(pipeline::synthetic_default_config());
  return ds;
}

net::ModelConfig small_model(const segment::Dataset& ds) {
  net::ModelConfig m;
  m.input = {ds.shape[0], ds.shape[1], ds.shape[2]};
  m.n_filters = 2;
  return m;
}

TrainConfig quick_training(std::size_t epochs) {
  TrainConfig t;
  t.max_epochs = epochs;
  t.batch_size = 8;
  return t;
}

bool same_report(const FoldReport& a, const FoldReport& b) {
  return a.fold_key == b.fold_key && a.counts == b.counts && a.epochs_run == b.epochs_run &&
         a.final_train_loss == b.final_train_loss && a.n_train == b.n_train && a.n_test == b.n_test;
}

}  // namespace

TEST_CASE("metric examples") {
  const auto m = metrics({3, 1, 3, 1});
  CHECK(m.acc == 0.75);
  CHECK(m.tpr == 0.75);
  CHECK(m.tnr == 0.75);
  CHECK((0.858 + 0.751) / 2 == doctest::Approx(0.8045).epsilon(1e-12));
  CHECK_THROWS_AS(sensitivity({0, 0, 3, 1}), UndefinedMetric);
  CHECK_THROWS_AS(specificity({3, 1, 0, 0}), UndefinedMetric);
  CHECK_THROWS_AS(accuracy({}), UndefinedMetric);
  CHECK_THROWS_AS(metrics({0, 0, 3, 1}), UndefinedMetric);
}

TEST_CASE("metric identities on random counts") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::uint64_t> d(0, 1000);
  for (int i = 0; i < 1000; ++i) {
    ConfusionCounts c{d(rng) + 1, d(rng), d(rng) + 1, d(rng)};
    CHECK(accuracy(c) == static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total()));
    const std::uint64_t n = d(rng) + 1;
    const std::uint64_t tp = std::uniform_int_distribution<std::uint64_t>(0, n)(rng);
    const std::uint64_t tn = std::uniform_int_distribution<std::uint64_t>(0, n)(rng);
    const auto m = metrics({tp, n - tp, tn, n - tn});
    CHECK(std::abs(m.acc - (m.tpr + m.tnr) / 2) < 1e-12);
  }
}

TEST_CASE("undersampling to a balanced set") {
  std::vector<segment::SpectralSample> samples(581);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].label = i < 81 ? Label::Preictal : Label::Interictal;
    samples[i].origin = static_cast<double>(i);
  }
  const auto a = balance_undersample(samples, 9);
  CHECK(a.size() == 162);
  CHECK(std::count_if(a.begin(), a.end(), [&](auto i) { return samples[i].label == Label::Preictal; }) == 81);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == a.size());
  CHECK(balance_undersample(samples, 9) == a);
  CHECK(balance_undersample(samples, 10) != a);

  samples.resize(81);
  CHECK_THROWS_AS(balance_undersample(samples, 1), MissingClass);
}

TEST_CASE("Adam") {
  const AdamConfig cfg;
  SUBCASE("zero gradient leaves parameters unchanged") {
    std::vector<double> p{1.0, -2.0, 3.0};
    const auto before = p;
    AdamState s(3);
    adam_step(p, std::vector<double>(3, 0.0), s, cfg);
    CHECK(p == before);
  }
  SUBCASE("first step moves each parameter by about lr") {
    std::mt19937_64 rng(1);
    const auto g = oracle::gaussian(100, rng);
    std::vector<double> p(100, 0.5);
    AdamState s(100);
    adam_step(p, g, s, cfg);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double step = std::abs(p[i] - 0.5);
      CHECK(step <= cfg.lr);
      if (std::abs(g[i]) > 1e-2) CHECK(step >= cfg.lr * (1 - 1e-6));
    }
  }
  SUBCASE("non-finite gradients are refused without side effects") {
    std::vector<double> p{1.0, 2.0};
    AdamState s(2);
    CHECK_THROWS_AS(adam_step(p, std::vector<double>{0.1, std::nan("")}, s, cfg), NonFiniteGradient);
    CHECK(p == std::vector<double>{1.0, 2.0});
    CHECK(s.step == 0);
  }
}

TEST_CASE("box statistics") {
  const auto b = box_stats({1.0, 0.6, 0.8});
  CHECK(b.median == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(b.min == 0.6);
  CHECK(b.max == 1.0);
  CHECK(b.q1 == doctest::Approx(0.7));
  CHECK(b.q3 == doctest::Approx(0.9));
  CHECK(b.mean == doctest::Approx(0.8));
  CHECK_THROWS_AS(box_stats({}), UndefinedMetric);
}

TEST_CASE("fold split keeps test windows out of training") {
  const auto& ds = synthetic_dataset();
  for (const auto k : ds.fold_keys()) {
    const auto split = make_fold_split(ds, k);
    std::size_t pre = 0;
    for (const auto i : split.test) pre += ds.samples[i].label == Label::Preictal;
    CHECK(pre == ds.summary.preictal_per_fold.at(k));
    CHECK(split.test.size() == 2 * pre);
    for (const auto i : split.train) {
      const auto& s = ds.samples[i];
      CHECK_FALSE((s.label == Label::Preictal && s.fold_key == k));
      for (const auto j : split.test) {
        const auto& t = ds.samples[j];
        CHECK(std::abs(s.origin - t.origin) >= ds.policy.window_len);
      }
    }
  }
}

TEST_CASE("training never sees the held-out fold") {
  const auto& ds = synthetic_dataset();
  const auto model = small_model(ds);
  const std::int64_t held_out = 1;
  const auto split = make_fold_split(ds, held_out);
  const std::set<double> test_origins = [&] {
    std::set<double> o;
    for (auto i : split.test) o.insert(ds.samples[i].origin);
    return o;
  }();
  std::size_t batches = 0;
  const auto r = train_fold(ds, held_out, model, quick_training(2), [&](std::size_t, std::span<const std::size_t> b) {
    ++batches;
    for (const auto i : b) {
      CHECK_FALSE((ds.samples[i].label == Label::Preictal && ds.samples[i].fold_key == held_out));
      CHECK(test_origins.count(ds.samples[i].origin) == 0);
    }
  });
  CHECK(batches > 0);
  CHECK(r.report.epochs_run == 2);
  CHECK(r.report.n_test == split.test.size());
}

TEST_CASE("normalizer is fitted on the given indices only") {
  const auto& ds = synthetic_dataset();
  const std::vector<std::size_t> first{0, 1, 2};
  const auto a = FeatureNormalizer::fit(ds, first);
  auto changed = ds;
  for (std::size_t i = 3; i < changed.samples.size(); ++i)
    for (auto& v : changed.samples[i].values) v += 100.0f;
  const auto b = FeatureNormalizer::fit(changed, first);
  CHECK(a.mean() == b.mean());
  CHECK(a.stddev() == b.stddev());
}

TEST_CASE("an untrained network is at chance") {
  const auto& ds = synthetic_dataset();
  const auto r = train_fold(ds, 0, small_model(ds), quick_training(0));
  CHECK(r.report.epochs_run == 0);
  CHECK(r.report.metrics.acc == doctest::Approx(0.5).epsilon(0.5));
  CHECK(std::isfinite(r.report.final_train_loss));
}

TEST_CASE("leave-one-out") {
  const auto& ds = synthetic_dataset();
  const auto model = small_model(ds);
  const auto tc = quick_training(1);
  const auto cv = loocv(ds, model, tc);
  REQUIRE(cv.folds.size() == 3);
  double sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(cv.folds[i].fold_key == static_cast<std::int64_t>(i));
    sum += cv.folds[i].metrics.acc;
  }
  CHECK(std::abs(cv.summary.acc.mean - sum / 3) < 1e-12);

  SUBCASE("dataset order does not matter") {
    auto shuffled = ds;
    std::mt19937_64 rng(99);
    std::shuffle(shuffled.samples.begin(), shuffled.samples.end(), rng);
    const auto again = loocv(shuffled, model, tc);
    for (std::size_t i = 0; i < 3; ++i) CHECK(same_report(again.folds[i], cv.folds[i]));
  }

  SUBCASE("two folds are not enough") {
    auto two = ds;
    std::erase_if(two.samples, [](const auto& s) { return s.label == Label::Preictal && s.fold_key == 2; });
    CHECK_THROWS_AS(loocv(two, model, tc), InsufficientSeizures);
  }
}

TEST_CASE("train_fold rejects a model that does not fit the data") {
  const auto& ds = synthetic_dataset();
  auto model = small_model(ds);
  model.input = {4, 33, 59};
  CHECK_THROWS_AS(train_fold(ds, 0, model, quick_training(1)), ShapeMismatch);
  CHECK_THROWS_AS(train_fold(ds, 7, small_model(ds), quick_training(1)), NoTestSamples);
}

TEST_CASE("each training epoch is class balanced") {
  const auto& ds = synthetic_dataset();
  const auto tc = quick_training(3);
  std::map<std::size_t, std::array<std::size_t, 2>> per_epoch;
  train_fold(ds, 0, small_model(ds), tc, [&](std::size_t epoch, std::span<const std::size_t> batch) {
    for (const auto i : batch) ++per_epoch[epoch][static_cast<std::size_t>(ds.samples[i].label)];
  });
  CHECK(per_epoch.size() == 3);
  for (const auto& [epoch, counts] : per_epoch) {
    CHECK(counts[1] > 0);
    const auto diff = counts[0] > counts[1] ? counts[0] - counts[1] : counts[1] - counts[0];
    CHECK(diff <= tc.batch_size);
  }
}

TEST_CASE("metrics stay in the unit interval") {
  std::mt19937_64 rng(18);
  std::uniform_int_distribution<std::uint64_t> d(0, 1u << 20);
  for (int i = 0; i < 1000; ++i) {
    const auto m = metrics({d(rng), d(rng) + 1, d(rng), d(rng) + 1});
    for (const double v : {m.acc, m.tpr, m.tnr}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}
