#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "seizurenet/net/model.hpp"
#include "seizurenet/segment/dataset.hpp"
#include "seizurenet/train/adam.hpp"
#include "seizurenet/train/metrics.hpp"

namespace seizurenet::train {

enum class Balance { UndersampleInterictal };

struct TrainConfig {
  AdamConfig adam;
  std::size_t batch_size = 16;
  std::size_t max_epochs = 20;
  std::uint64_t seed = 3;
  double decision_threshold = 0.5;  // on the preictal probability
  Balance balance = Balance::UndersampleInterictal;

  bool operator==(const TrainConfig&) const = default;
};

void validate(const TrainConfig& config);

struct FoldReport {
  std::int64_t fold_key = 0;
  ConfusionCounts counts;
  Metrics metrics;
  std::size_t epochs_run = 0;
  double final_train_loss = 0.0;
  std::size_t n_train = 0;  // samples seen per epoch
  std::size_t n_test = 0;
};

// Keeps every preictal candidate and an equally sized random subset of the
// interictal ones, preserving candidate order. Throws MissingClass when
// either class is absent.
std::vector<std::size_t> balance_undersample(const std::vector<segment::SpectralSample>& samples,
                                             std::span<const std::size_t> candidates, std::uint64_t seed);
std::vector<std::size_t> balance_undersample(const std::vector<segment::SpectralSample>& samples, std::uint64_t seed);

// Per-frequency-bin standardization fitted on training samples only.
class FeatureNormalizer {
 public:
  FeatureNormalizer() = default;
  static FeatureNormalizer fit(const segment::Dataset& dataset, std::span<const std::size_t> indices);

  std::vector<double> apply(const segment::SpectralSample& sample, const segment::SampleShape& shape) const;
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return std_; }

 private:
  std::vector<double> mean_;
  std::vector<double> std_;
};

struct FoldSplit {
  std::vector<std::size_t> train;  // candidates before class balancing
  std::vector<std::size_t> test;
};

// Test set: the held-out seizure's preictal samples plus the same number of
// interictal samples temporally nearest to them. Training candidates: every
// other sample whose window does not overlap a test window.
FoldSplit make_fold_split(const segment::Dataset& dataset, std::int64_t held_out);

// Receives (epoch, dataset indices of one minibatch) as training proceeds.
using BatchObserver = std::function<void(std::size_t, std::span<const std::size_t>)>;

struct FoldResult {
  net::ModelParams params;
  FeatureNormalizer normalizer;
  FoldReport report;
};

FoldResult train_fold(const segment::Dataset& dataset, std::int64_t held_out, const net::ModelConfig& model,
                      const TrainConfig& config, const BatchObserver& observer = {});

// Counts for the given samples at the configured decision threshold.
ConfusionCounts evaluate(const net::ModelParams& params, const net::ModelConfig& model,
                         const FeatureNormalizer& normalizer, const segment::Dataset& dataset,
                         std::span<const std::size_t> indices, double threshold);

struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

// Quartiles by linear interpolation between order statistics.
BoxStats box_stats(std::vector<double> values);

struct Aggregate {
  BoxStats acc;
  BoxStats tpr;
  BoxStats tnr;
};

Aggregate aggregate(std::span<const FoldReport> folds);

struct CrossValidation {
  std::vector<FoldReport> folds;
  Aggregate summary;
};

// One fold per leading seizure present in the dataset, in fold-key order.
// Throws InsufficientSeizures below three folds.
CrossValidation loocv(const segment::Dataset& dataset, const net::ModelConfig& model, const TrainConfig& config);

}  // namespace seizurenet::train
