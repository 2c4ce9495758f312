#include "seizurenet/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "seizurenet/errors.hpp"

namespace seizurenet::train {

using segment::Dataset;
using segment::Label;
using segment::SpectralSample;

namespace {

std::mt19937_64 fold_rng(std::uint64_t seed, std::int64_t fold_key) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(fold_key + 1)};
  return std::mt19937_64(seq);
}

std::size_t label_index(Label l) { return l == Label::Preictal ? 1 : 0; }

const Dataset& canonical(const Dataset& dataset, Dataset& storage) {
  if (std::is_sorted(dataset.samples.begin(), dataset.samples.end(), segment::sample_order)) return dataset;
  storage = dataset;
  std::sort(storage.samples.begin(), storage.samples.end(), segment::sample_order);
  return storage;
}

double quantile(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

void validate(const TrainConfig& c) {
  if (!(c.adam.lr > 0.0)) throw ConfigError("train.lr must be positive");
  if (!(c.adam.beta1 >= 0.0 && c.adam.beta1 < 1.0) || !(c.adam.beta2 >= 0.0 && c.adam.beta2 < 1.0)) {
    throw ConfigError("train.betas must lie in [0, 1)");
  }
  if (!(c.adam.eps > 0.0)) throw ConfigError("train.eps must be positive");
  if (c.batch_size == 0) throw ConfigError("train.batch_size must be positive");
  if (!(c.decision_threshold > 0.0 && c.decision_threshold < 1.0)) {
    throw ConfigError("train.decision_threshold must lie in (0, 1)");
  }
}

std::vector<std::size_t> balance_undersample(const std::vector<SpectralSample>& samples,
                                             std::span<const std::size_t> candidates, std::uint64_t seed) {
  std::vector<std::size_t> inter;
  std::size_t n_pre = 0;
  for (const auto i : candidates) {
    if (samples.at(i).label == Label::Preictal) {
      ++n_pre;
    } else {
      inter.push_back(i);
    }
  }
  if (n_pre == 0 || inter.empty()) {
    throw MissingClass(fmt::format("balancing needs both classes; have {} preictal, {} interictal", n_pre, inter.size()));
  }

  std::vector<char> keep(samples.size(), 0);
  if (inter.size() <= n_pre) {
    for (const auto i : inter) keep[i] = 1;
  } else {
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates: the first n_pre slots become a uniform draw.
    for (std::size_t k = 0; k < n_pre; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, inter.size() - 1);
      std::swap(inter[k], inter[pick(rng)]);
      keep[inter[k]] = 1;
    }
  }
  std::vector<std::size_t> out;
  out.reserve(2 * n_pre);
  for (const auto i : candidates) {
    if (samples[i].label == Label::Preictal || keep[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> balance_undersample(const std::vector<SpectralSample>& samples, std::uint64_t seed) {
  std::vector<std::size_t> all(samples.size());
  std::iota(all.begin(), all.end(), 0);
  return balance_undersample(samples, all, seed);
}

FeatureNormalizer FeatureNormalizer::fit(const Dataset& d, std::span<const std::size_t> indices) {
  const auto [C, F, T] = d.shape;
  FeatureNormalizer n;
  n.mean_.assign(F, 0.0);
  n.std_.assign(F, 1.0);
  if (indices.empty()) return n;
  std::vector<double> sum(F, 0.0), sum_sq(F, 0.0);
  for (const auto i : indices) {
    const auto& v = d.samples.at(i).values;
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t f = 0; f < F; ++f) {
        const float* row = v.data() + (c * F + f) * T;
        for (std::size_t t = 0; t < T; ++t) {
          sum[f] += row[t];
          sum_sq[f] += static_cast<double>(row[t]) * row[t];
        }
      }
    }
  }
  const double count = static_cast<double>(indices.size() * C * T);
  for (std::size_t f = 0; f < F; ++f) {
    n.mean_[f] = sum[f] / count;
    const double var = std::max(0.0, sum_sq[f] / count - n.mean_[f] * n.mean_[f]);
    n.std_[f] = std::sqrt(var) > 1e-8 ? std::sqrt(var) : 1.0;
  }
  return n;
}

std::vector<double> FeatureNormalizer::apply(const SpectralSample& s, const segment::SampleShape& shape) const {
  const auto [C, F, T] = shape;
  if (s.values.size() != C * F * T || mean_.size() != F) throw ShapeMismatch("normalizer does not match sample shape");
  std::vector<double> out(s.values.size());
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t f = 0; f < F; ++f) {
      const std::size_t row = (c * F + f) * T;
      for (std::size_t t = 0; t < T; ++t) out[row + t] = (s.values[row + t] - mean_[f]) / std_[f];
    }
  }
  return out;
}

FoldSplit make_fold_split(const Dataset& d, std::int64_t held_out) {
  const double wl = d.policy.window_len;
  FoldSplit split;
  double lo = 0.0, hi = 0.0;
  std::vector<std::size_t> inter;
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    const auto& s = d.samples[i];
    if (s.label == Label::Interictal) {
      inter.push_back(i);
    } else if (s.fold_key == held_out) {
      if (split.test.empty()) lo = s.origin, hi = s.origin + wl;
      lo = std::min(lo, s.origin);
      hi = std::max(hi, s.origin + wl);
      split.test.push_back(i);
    }
  }
  const std::size_t n_pre = split.test.size();
  if (n_pre == 0) throw NoTestSamples(fmt::format("fold {} has no preictal samples", held_out));
  if (inter.empty()) throw NoTestSamples("dataset has no interictal samples");

  auto distance = [&](std::size_t i) {
    const double s = d.samples[i].origin;
    return std::max({0.0, lo - (s + wl), s - hi});
  };
  std::stable_sort(inter.begin(), inter.end(), [&](std::size_t a, std::size_t b) { return distance(a) < distance(b); });
  const std::size_t n_inter = std::min(n_pre, inter.size());
  std::vector<std::size_t> test_inter(inter.begin(), inter.begin() + static_cast<long>(n_inter));
  split.test.insert(split.test.end(), test_inter.begin(), test_inter.end());
  std::sort(split.test.begin(), split.test.end());

  std::vector<char> in_test(d.samples.size(), 0);
  for (const auto i : split.test) in_test[i] = 1;
  auto overlaps_test = [&](double origin) {
    return std::any_of(test_inter.begin(), test_inter.end(), [&](std::size_t j) {
      const double o = d.samples[j].origin;
      return origin < o + wl && o < origin + wl;
    });
  };
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    if (in_test[i]) continue;
    const auto& s = d.samples[i];
    if (s.label == Label::Preictal && s.fold_key == held_out) continue;
    if (s.label == Label::Interictal && overlaps_test(s.origin)) continue;
    split.train.push_back(i);
  }
  return split;
}

ConfusionCounts evaluate(const net::ModelParams& params, const net::ModelConfig& model,
                         const FeatureNormalizer& normalizer, const Dataset& d, std::span<const std::size_t> indices,
                         double threshold) {
  ConfusionCounts c;
  for (const auto i : indices) {
    const auto& s = d.samples.at(i);
    const auto x = normalizer.apply(s, d.shape);
    const auto fwd = net::model_forward(params, model, x);
    const bool predicted_pre = fwd.probs[1] >= threshold;
    if (s.label == Label::Preictal) {
      (predicted_pre ? c.tp : c.fn) += 1;
    } else {
      (predicted_pre ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

FoldResult train_fold(const Dataset& dataset, std::int64_t held_out, const net::ModelConfig& model,
                      const TrainConfig& config, const BatchObserver& observer) {
  validate(config);
  net::validate(model);
  Dataset sorted_storage;
  const Dataset& d = canonical(dataset, sorted_storage);
  if (!(model.input == net::Dim3{d.shape[0], d.shape[1], d.shape[2]})) {
    throw ShapeMismatch(fmt::format("model input {} does not match dataset samples ({},{},{})",
                                    net::to_string(model.input), d.shape[0], d.shape[1], d.shape[2]));
  }

  const FoldSplit split = make_fold_split(d, held_out);
  FoldResult r;
  r.normalizer = FeatureNormalizer::fit(d, split.train);
  r.params = net::init_params(model);
  auto rng = fold_rng(config.seed, held_out);

  AdamState adam(r.params.values.size());
  std::vector<double> grad_sum(r.params.values.size());
  double epoch_loss = 0.0;
  std::size_t epoch_count = 0;

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    auto order = balance_undersample(d.samples, split.train, rng());
    std::shuffle(order.begin(), order.end(), rng);
    epoch_loss = 0.0;
    epoch_count = order.size();
    for (std::size_t first = 0; first < order.size(); first += config.batch_size) {
      const std::size_t last = std::min(order.size(), first + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + first, last - first);
      if (observer) observer(epoch, batch);

      std::ranges::fill(grad_sum, 0.0);
      for (const auto i : batch) {
        const auto& s = d.samples[i];
        const auto x = r.normalizer.apply(s, d.shape);
        const auto fwd = net::model_forward(r.params, model, x);
        const auto bwd = net::model_backward(r.params, model, fwd.cache, label_index(s.label));
        epoch_loss += bwd.loss;
        for (std::size_t k = 0; k < grad_sum.size(); ++k) grad_sum[k] += bwd.grads.values[k];
      }
      const double scale = 1.0 / static_cast<double>(batch.size());
      for (auto& g : grad_sum) g *= scale;
      adam_step(r.params.values, grad_sum, adam, config.adam);
    }
    epoch_loss /= static_cast<double>(std::max<std::size_t>(1, epoch_count));
    r.report.epochs_run = epoch + 1;
  }

  const auto balanced = balance_undersample(d.samples, split.train, rng());
  r.report.n_train = balanced.size();
  if (config.max_epochs == 0) {
    epoch_loss = 0.0;
    for (const auto i : balanced) {
      epoch_loss += net::model_loss(r.params, model, r.normalizer.apply(d.samples[i], d.shape),
                                    label_index(d.samples[i].label));
    }
    epoch_loss /= static_cast<double>(balanced.size());
  }

  r.report.fold_key = held_out;
  r.report.final_train_loss = epoch_loss;
  r.report.n_test = split.test.size();
  r.report.counts = evaluate(r.params, model, r.normalizer, d, split.test, config.decision_threshold);
  r.report.metrics = metrics(r.report.counts);
  return r;
}

BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) throw UndefinedMetric("box statistics of an empty set");
  std::sort(values.begin(), values.end());
  BoxStats b;
  b.min = values.front();
  b.max = values.back();
  b.q1 = quantile(values, 0.25);
  b.median = quantile(values, 0.5);
  b.q3 = quantile(values, 0.75);
  b.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return b;
}

Aggregate aggregate(std::span<const FoldReport> folds) {
  std::vector<double> acc, tpr, tnr;
  for (const auto& f : folds) {
    acc.push_back(f.metrics.acc);
    tpr.push_back(f.metrics.tpr);
    tnr.push_back(f.metrics.tnr);
  }
  return {box_stats(acc), box_stats(tpr), box_stats(tnr)};
}

CrossValidation loocv(const Dataset& dataset, const net::ModelConfig& model, const TrainConfig& config) {
  const auto keys = dataset.fold_keys();
  if (keys.size() < 3) {
    throw InsufficientSeizures(fmt::format("leave-one-out needs at least 3 leading seizures, dataset has {}", keys.size()));
  }
  Dataset sorted_storage;
  const Dataset& d = canonical(dataset, sorted_storage);
  CrossValidation cv;
  for (const auto k : keys) cv.folds.push_back(train_fold(d, k, model, config).report);
  cv.summary = aggregate(cv.folds);
  return cv;
}

}  // namespace seizurenet::train
