#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace seizurenet::train {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  bool operator==(const AdamConfig&) const = default;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update of `params` in place. Throws
// NonFiniteGradient before touching anything if a gradient is not finite.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& config);

}  // namespace seizurenet::train
