#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "seizurenet/net/tensor.hpp"

namespace seizurenet::net {

// Span covered by a kernel of k taps spaced d positions apart: (k-1)*d + 1.
std::size_t effective_extent(std::size_t k, std::size_t d);
Dim3 effective_extent(const Dim3& kernel, const Dim3& dilation);

enum class Padding { Same, Valid };

struct ConvSpec {
  Dim3 kernel;
  Dim3 dilation;
  std::size_t n_filters = 1;
  std::size_t in_maps = 1;
  Padding padding = Padding::Same;

  // Weights are [n_filters x in_maps x kC x kF x kT].
  std::size_t weight_count() const { return n_filters * in_maps * kernel.volume(); }
  Dim3 output_dims(const Dim3& input) const;
  // Zeros inserted before index 0 on each axis; Same pads floor((extent-1)/2)
  // before and the rest after.
  Dim3 pad_before() const;
};

Tensor4 conv3d_forward(const Tensor4& x, const ConvSpec& spec, std::span<const double> weights,
                       std::span<const double> bias);

struct ConvGrads {
  Tensor4 grad_x;
  std::vector<double> grad_w;
  std::vector<double> grad_b;
};

ConvGrads conv3d_backward(const Tensor4& x, const ConvSpec& spec, std::span<const double> weights,
                          const Tensor4& grad_out);

Tensor4 relu(const Tensor4& x);
Tensor4 relu_backward(const Tensor4& x, const Tensor4& grad_out);

struct PoolResult {
  Tensor4 y;
  std::vector<std::size_t> argmax;  // flat input index per output element
};

// Non-overlapping windows with stride equal to the pool size; trailing
// elements that do not fill a window are dropped. Ties go to the first
// element in row-major order.
PoolResult maxpool3d(const Tensor4& x, const Dim3& pool);
Tensor4 maxpool3d_backward(std::span<const std::size_t> argmax, const Tensor4& grad_out, std::size_t in_maps,
                           const Dim3& in_dims);
Dim3 pooled_dims(const Dim3& input, const Dim3& pool);

std::vector<double> global_avg_pool(const Tensor4& x);
Tensor4 global_avg_pool_backward(std::span<const double> grad_out, std::size_t maps, const Dim3& dims);

inline constexpr std::size_t kClasses = 2;

struct DenseResult {
  std::array<double, kClasses> probs{};
  double loss = 0.0;
  std::vector<double> grad_features;
  std::vector<double> grad_w;  // [kClasses x n_features], row-major
  std::array<double, kClasses> grad_b{};
};

std::array<double, kClasses> softmax(const std::array<double, kClasses>& logits);

// logits = W * features + b, softmax, cross-entropy against `label`.
DenseResult dense_softmax_xent(std::span<const double> features, std::span<const double> weights,
                               std::span<const double> bias, std::size_t label);

}  // namespace seizurenet::net
