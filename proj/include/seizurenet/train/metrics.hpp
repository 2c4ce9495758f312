#pragma once

#include <cstdint>
#include <span>

namespace seizurenet::train {

// Positive class is preictal.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;

  std::uint64_t positives() const { return tp + fn; }
  std::uint64_t negatives() const { return tn + fp; }
  std::uint64_t total() const { return tp + fn + tn + fp; }

  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;
};

struct Metrics {
  double acc = 0.0;
  double tpr = 0.0;  // sensitivity
  double tnr = 0.0;  // specificity
};

// Each throws UndefinedMetric when its denominator is zero.
double accuracy(const ConfusionCounts& c);
double sensitivity(const ConfusionCounts& c);
double specificity(const ConfusionCounts& c);
Metrics metrics(const ConfusionCounts& c);

}  // namespace seizurenet::train
