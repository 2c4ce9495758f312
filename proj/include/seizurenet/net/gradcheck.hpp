#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace seizurenet::net {

// |analytic - numeric| / max(|analytic|, |numeric|, floor). The floor keeps
// gradients that are zero up to rounding from reporting O(1) errors.
double relative_error(double analytic, double numeric, double floor = 1e-6);

struct GradcheckOptions {
  std::uint64_t seed = 20220501;
  double step = 1e-5;        // central-difference step
  double tolerance = 1e-4;   // maximum accepted relative error
  std::size_t conv_cases = 8;
};

struct GradcheckRow {
  std::string layer;  // conv, relu, pool, gap, dense, model
  double worst_error = 0.0;
  std::size_t checked = 0;
  bool passed = true;
};

struct GradcheckReport {
  std::vector<GradcheckRow> rows;
  bool passed = true;
};

// Central finite differences against every layer's backward pass and against
// the full four-branch model on a tiny input.
GradcheckReport run_gradcheck(const GradcheckOptions& options = {});

}  // namespace seizurenet::net
