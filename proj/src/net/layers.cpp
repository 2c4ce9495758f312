#include "seizurenet/net/layers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <numeric>

#include <fmt/format.h>

#include "seizurenet/errors.hpp"
#include "seizurenet/net/fault_injection.hpp"

namespace seizurenet::net {

namespace testing {
namespace {
std::atomic<Fault> g_fault{Fault::None};
}
void inject_fault(Fault fault) { g_fault.store(fault); }
Fault active_fault() { return g_fault.load(); }
}  // namespace testing

namespace {

using Index = std::ptrdiff_t;

Index as_index(std::size_t v) { return static_cast<Index>(v); }

// Output positions o in [0, n_out) whose source o + offset lies in [0, n_in).
struct Range {
  Index lo, hi;
};
Range valid_range(Index offset, Index n_in, Index n_out) {
  return {std::max<Index>(0, -offset), std::min<Index>(n_out, n_in - offset)};
}

void check_conv_args(const Tensor4& x, const ConvSpec& spec, std::span<const double> weights) {
  if (x.maps() != spec.in_maps) {
    throw ShapeMismatch(fmt::format("conv3d expects {} input maps, got {}", spec.in_maps, x.maps()));
  }
  if (weights.size() != spec.weight_count()) {
    throw ShapeMismatch(fmt::format("conv3d expects {} weights, got {}", spec.weight_count(), weights.size()));
  }
}

// Visits every (filter, in-map, tap, output row) combination that touches
// valid input, handing the callback aligned output/input row offsets and the
// contiguous time range [t_lo, t_hi) with its input shift.
template <typename RowFn>
void for_each_conv_row(const ConvSpec& spec, const Dim3& in, const Dim3& out, RowFn&& fn) {
  const Dim3 pad = spec.pad_before();
  const Dim3& k = spec.kernel;
  const Dim3& d = spec.dilation;
  std::size_t widx = 0;
  for (std::size_t m = 0; m < spec.n_filters; ++m) {
    for (std::size_t n = 0; n < spec.in_maps; ++n) {
      for (std::size_t i = 0; i < k.c; ++i) {
        const Index oc = as_index(i * d.c) - as_index(pad.c);
        const auto rc = valid_range(oc, as_index(in.c), as_index(out.c));
        for (std::size_t j = 0; j < k.f; ++j) {
          const Index of = as_index(j * d.f) - as_index(pad.f);
          const auto rf = valid_range(of, as_index(in.f), as_index(out.f));
          for (std::size_t l = 0; l < k.t; ++l, ++widx) {
            const Index ot = as_index(l * d.t) - as_index(pad.t);
            const auto rt = valid_range(ot, as_index(in.t), as_index(out.t));
            if (rt.lo >= rt.hi) continue;
            for (Index c = rc.lo; c < rc.hi; ++c) {
              for (Index f = rf.lo; f < rf.hi; ++f) {
                const std::size_t out_row = ((m * out.c + static_cast<std::size_t>(c)) * out.f +
                                             static_cast<std::size_t>(f)) * out.t;
                const std::size_t in_row = ((n * in.c + static_cast<std::size_t>(c + oc)) * in.f +
                                            static_cast<std::size_t>(f + of)) * in.t;
                fn(widx, m, out_row, in_row, rt.lo, rt.hi, ot);
              }
            }
          }
        }
      }
    }
  }
}

}  // namespace

std::string to_string(const Dim3& d) { return fmt::format("({},{},{})", d.c, d.f, d.t); }

Tensor4::Tensor4(std::size_t maps, Dim3 dims, double fill)
    : maps_(maps), dims_(dims), data_(maps * dims.volume(), fill) {}

Tensor4::Tensor4(std::size_t maps, Dim3 dims, std::vector<double> data)
    : maps_(maps), dims_(dims), data_(std::move(data)) {
  if (data_.size() != maps_ * dims_.volume()) {
    throw ShapeMismatch(fmt::format("tensor data has {} values, shape needs {}", data_.size(),
                                    maps_ * dims_.volume()));
  }
}

std::size_t effective_extent(std::size_t k, std::size_t d) { return (k - 1) * d + 1; }

Dim3 effective_extent(const Dim3& k, const Dim3& d) {
  return {effective_extent(k.c, d.c), effective_extent(k.f, d.f), effective_extent(k.t, d.t)};
}

Dim3 ConvSpec::output_dims(const Dim3& in) const {
  if (padding == Padding::Same) return in;
  const Dim3 e = effective_extent(kernel, dilation);
  if (e.c > in.c || e.f > in.f || e.t > in.t) {
    throw ShapeMismatch(fmt::format("kernel extent {} exceeds input {}", to_string(e), to_string(in)));
  }
  return {in.c - e.c + 1, in.f - e.f + 1, in.t - e.t + 1};
}

Dim3 ConvSpec::pad_before() const {
  if (padding == Padding::Valid) return {0, 0, 0};
  const Dim3 e = effective_extent(kernel, dilation);
  return {(e.c - 1) / 2, (e.f - 1) / 2, (e.t - 1) / 2};
}

Tensor4 conv3d_forward(const Tensor4& x, const ConvSpec& spec, std::span<const double> weights,
                       std::span<const double> bias) {
  check_conv_args(x, spec, weights);
  if (bias.size() != spec.n_filters) {
    throw ShapeMismatch(fmt::format("conv3d expects {} biases, got {}", spec.n_filters, bias.size()));
  }
  const Dim3 out_dims = spec.output_dims(x.dims());
  Tensor4 y(spec.n_filters, out_dims);
  for (std::size_t m = 0; m < spec.n_filters; ++m) std::ranges::fill(y.map(m), bias[m]);

  const double* xd = x.data().data();
  double* yd = y.data().data();
  for_each_conv_row(spec, x.dims(), out_dims,
                    [&](std::size_t widx, std::size_t, std::size_t out_row, std::size_t in_row, Index lo,
                        Index hi, Index shift) {
                      const double w = weights[widx];
                      double* o = yd + out_row;
                      const double* s = xd + in_row + shift;
                      for (Index t = lo; t < hi; ++t) o[t] += w * s[t];
                    });
  return y;
}

ConvGrads conv3d_backward(const Tensor4& x, const ConvSpec& spec, std::span<const double> weights,
                          const Tensor4& grad_out) {
  check_conv_args(x, spec, weights);
  const Dim3 out_dims = spec.output_dims(x.dims());
  if (grad_out.maps() != spec.n_filters || !(grad_out.dims() == out_dims)) {
    throw ShapeMismatch("conv3d_backward: upstream gradient does not match the forward output");
  }

  ConvGrads g{Tensor4(x.maps(), x.dims()), std::vector<double>(weights.size(), 0.0),
              std::vector<double>(spec.n_filters, 0.0)};
  for (std::size_t m = 0; m < spec.n_filters; ++m) {
    const auto map = grad_out.map(m);
    g.grad_b[m] = std::accumulate(map.begin(), map.end(), 0.0);
  }

  const double* xd = x.data().data();
  const double* god = grad_out.data().data();
  double* gxd = g.grad_x.data().data();
  for_each_conv_row(spec, x.dims(), out_dims,
                    [&](std::size_t widx, std::size_t, std::size_t out_row, std::size_t in_row, Index lo,
                        Index hi, Index shift) {
                      const double w = weights[widx];
                      const double* go = god + out_row;
                      const double* s = xd + in_row + shift;
                      double* gx = gxd + in_row + shift;
                      double acc = 0.0;
                      for (Index t = lo; t < hi; ++t) {
                        acc += go[t] * s[t];
                        gx[t] += w * go[t];
                      }
                      g.grad_w[widx] += acc;
                    });

  if (testing::active_fault() == testing::Fault::ConvBackwardSign) {
    for (auto& v : g.grad_x.data()) v = -v;
  }
  return g;
}

Tensor4 relu(const Tensor4& x) {
  Tensor4 y = x;
  for (auto& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor4 relu_backward(const Tensor4& x, const Tensor4& grad_out) {
  if (!x.same_shape(grad_out)) throw ShapeMismatch("relu_backward: shape mismatch");
  Tensor4 g(x.maps(), x.dims());
  for (std::size_t i = 0; i < x.size(); ++i) g.data()[i] = x.data()[i] > 0.0 ? grad_out.data()[i] : 0.0;
  return g;
}

Dim3 pooled_dims(const Dim3& in, const Dim3& pool) {
  if (pool.c == 0 || pool.f == 0 || pool.t == 0) throw ShapeMismatch("pool sizes must be positive");
  if (pool.c > in.c || pool.f > in.f || pool.t > in.t) {
    throw PoolLargerThanInput(fmt::format("pool {} exceeds input {}", to_string(pool), to_string(in)));
  }
  return {in.c / pool.c, in.f / pool.f, in.t / pool.t};
}

PoolResult maxpool3d(const Tensor4& x, const Dim3& pool) {
  const Dim3 in = x.dims();
  const Dim3 out = pooled_dims(in, pool);
  PoolResult r{Tensor4(x.maps(), out), std::vector<std::size_t>(x.maps() * out.volume())};
  std::size_t o = 0;
  for (std::size_t m = 0; m < x.maps(); ++m) {
    for (std::size_t c = 0; c < out.c; ++c) {
      for (std::size_t f = 0; f < out.f; ++f) {
        for (std::size_t t = 0; t < out.t; ++t, ++o) {
          std::size_t best = ((m * in.c + c * pool.c) * in.f + f * pool.f) * in.t + t * pool.t;
          double best_v = x.data()[best];
          for (std::size_t i = 0; i < pool.c; ++i) {
            for (std::size_t j = 0; j < pool.f; ++j) {
              const std::size_t row = ((m * in.c + c * pool.c + i) * in.f + f * pool.f + j) * in.t + t * pool.t;
              for (std::size_t k = 0; k < pool.t; ++k) {
                if (x.data()[row + k] > best_v) {
                  best_v = x.data()[row + k];
                  best = row + k;
                }
              }
            }
          }
          r.y.data()[o] = best_v;
          r.argmax[o] = best;
        }
      }
    }
  }
  return r;
}

Tensor4 maxpool3d_backward(std::span<const std::size_t> argmax, const Tensor4& grad_out, std::size_t in_maps,
                           const Dim3& in_dims) {
  if (argmax.size() != grad_out.size()) throw ShapeMismatch("maxpool3d_backward: argmax/gradient size mismatch");
  Tensor4 g(in_maps, in_dims);
  for (std::size_t i = 0; i < argmax.size(); ++i) {
    if (argmax[i] >= g.size()) throw ShapeMismatch("maxpool3d_backward: argmax outside the input");
    g.data()[argmax[i]] += grad_out.data()[i];
  }
  return g;
}

std::vector<double> global_avg_pool(const Tensor4& x) {
  std::vector<double> out(x.maps());
  const auto n = static_cast<double>(x.dims().volume());
  for (std::size_t m = 0; m < x.maps(); ++m) {
    const auto map = x.map(m);
    out[m] = std::accumulate(map.begin(), map.end(), 0.0) / n;
  }
  return out;
}

Tensor4 global_avg_pool_backward(std::span<const double> grad_out, std::size_t maps, const Dim3& dims) {
  if (grad_out.size() != maps) throw ShapeMismatch("global_avg_pool_backward: gradient length mismatch");
  Tensor4 g(maps, dims);
  const auto n = static_cast<double>(dims.volume());
  for (std::size_t m = 0; m < maps; ++m) std::ranges::fill(g.map(m), grad_out[m] / n);
  return g;
}

std::array<double, kClasses> softmax(const std::array<double, kClasses>& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::array<double, kClasses> p{};
  double z = 0.0;
  for (std::size_t k = 0; k < kClasses; ++k) z += (p[k] = std::exp(logits[k] - mx));
  for (auto& v : p) v /= z;
  return p;
}

DenseResult dense_softmax_xent(std::span<const double> features, std::span<const double> weights,
                               std::span<const double> bias, std::size_t label) {
  const std::size_t n = features.size();
  if (weights.size() != kClasses * n || bias.size() != kClasses) {
    throw ShapeMismatch(fmt::format("dense layer expects {}x{} weights and {} biases", kClasses, n, kClasses));
  }
  if (label >= kClasses) throw ShapeMismatch(fmt::format("label {} is not a class", label));
  auto finite = [](std::span<const double> s) {
    return std::all_of(s.begin(), s.end(), [](double v) { return std::isfinite(v); });
  };
  if (!finite(features) || !finite(weights) || !finite(bias)) {
    throw NonFiniteInput("dense layer received a non-finite value");
  }

  std::array<double, kClasses> logits{};
  for (std::size_t k = 0; k < kClasses; ++k) {
    double acc = bias[k];
    for (std::size_t i = 0; i < n; ++i) acc += weights[k * n + i] * features[i];
    logits[k] = acc;
  }
  DenseResult r;
  r.probs = softmax(logits);
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (const double l : logits) z += std::exp(l - mx);
  r.loss = mx + std::log(z) - logits[label];

  r.grad_features.assign(n, 0.0);
  r.grad_w.assign(kClasses * n, 0.0);
  for (std::size_t k = 0; k < kClasses; ++k) {
    const double dl = r.probs[k] - (k == label ? 1.0 : 0.0);
    r.grad_b[k] = dl;
    for (std::size_t i = 0; i < n; ++i) {
      r.grad_w[k * n + i] = dl * features[i];
      r.grad_features[i] += dl * weights[k * n + i];
    }
  }
  return r;
}

}  // namespace seizurenet::net
