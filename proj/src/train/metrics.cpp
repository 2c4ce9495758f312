#include "seizurenet/train/metrics.hpp"

#include "seizurenet/errors.hpp"

namespace seizurenet::train {

namespace {

double ratio(std::uint64_t num, std::uint64_t den, const char* what) {
  if (den == 0) throw UndefinedMetric(std::string(what) + " is undefined: no samples in its denominator");
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fn += o.fn;
  tn += o.tn;
  fp += o.fp;
  return *this;
}

double accuracy(const ConfusionCounts& c) { return ratio(c.tp + c.tn, c.total(), "accuracy"); }
double sensitivity(const ConfusionCounts& c) { return ratio(c.tp, c.positives(), "sensitivity"); }
double specificity(const ConfusionCounts& c) { return ratio(c.tn, c.negatives(), "specificity"); }

Metrics metrics(const ConfusionCounts& c) { return {accuracy(c), sensitivity(c), specificity(c)}; }

}  // namespace seizurenet::train
