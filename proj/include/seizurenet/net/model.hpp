#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "seizurenet/net/layers.hpp"
#include "seizurenet/net/tensor.hpp"

namespace seizurenet::net {

inline constexpr std::size_t kBranches = 4;
inline constexpr std::size_t kLayers = 3;

// One dilation scale: three [conv -> relu -> maxpool] stages sharing a
// dilation tuple.
struct BranchSpec {
  Dim3 dilation;
  std::array<Dim3, kLayers> kernels{Dim3{1, 2, 3}, Dim3{2, 2, 3}, Dim3{2, 2, 3}};
  std::array<Dim3, kLayers> pools{Dim3{1, 2, 2}, Dim3{2, 2, 2}, Dim3{2, 2, 2}};

  bool operator==(const BranchSpec&) const = default;
};

// Branch order is fixed; features are concatenated in this order.
std::array<BranchSpec, kBranches> default_branches();

struct ModelConfig {
  Dim3 input{18, 128, 59};  // (channels, frequency, time)
  std::size_t n_filters = 16;
  std::array<BranchSpec, kBranches> branches = default_branches();
  std::uint64_t seed = 1;

  std::size_t feature_count() const { return kBranches * n_filters; }
  ConvSpec conv_spec(std::size_t branch, std::size_t layer) const;
  // Spatial dims after each pool of a branch.
  std::array<Dim3, kLayers> pooled_shapes(std::size_t branch) const;

  bool operator==(const ModelConfig&) const = default;
};

// Throws ConfigError when a pool would leave an empty axis.
void validate(const ModelConfig& config);

// Location of one parameter block inside the flat parameter vector.
struct Block {
  std::size_t offset = 0;
  std::size_t size = 0;

  bool operator==(const Block&) const = default;
};

// Flat parameter order: branch-major, layer-major, weights then bias; the
// dense weights [2 x features] and bias [2] come last.
class ParamLayout {
 public:
  ParamLayout() = default;
  explicit ParamLayout(const ModelConfig& config);

  const Block& conv_weight(std::size_t branch, std::size_t layer) const { return conv_w_[branch][layer]; }
  const Block& conv_bias(std::size_t branch, std::size_t layer) const { return conv_b_[branch][layer]; }
  const Block& dense_weight() const { return dense_w_; }
  const Block& dense_bias() const { return dense_b_; }
  std::size_t total() const { return total_; }
  // Parameter range owned by one branch's conv layers.
  Block branch(std::size_t b) const;

  bool operator==(const ParamLayout&) const = default;

 private:
  std::array<std::array<Block, kLayers>, kBranches> conv_w_{};
  std::array<std::array<Block, kLayers>, kBranches> conv_b_{};
  Block dense_w_, dense_b_;
  std::size_t total_ = 0;
};

// Parameters (or gradients) as one flat vector addressed through a layout.
struct ModelParams {
  ParamLayout layout;
  std::vector<double> values;

  ModelParams() = default;
  explicit ModelParams(const ModelConfig& config) : layout(config), values(layout.total(), 0.0) {}

  std::span<double> block(const Block& b) { return {values.data() + b.offset, b.size}; }
  std::span<const double> block(const Block& b) const { return {values.data() + b.offset, b.size}; }
};

// He initialization: N(0, 2 / fan_in) weights, zero biases, deterministic in
// config.seed.
ModelParams init_params(const ModelConfig& config);

struct LayerCache {
  Tensor4 input;       // conv input
  Tensor4 pre_activation;
  std::vector<std::size_t> argmax;
  Dim3 pool_in_dims;
};

struct ForwardCache {
  ParamLayout layout;
  std::array<std::array<LayerCache, kLayers>, kBranches> layers;
  std::array<Dim3, kBranches> final_dims{};
  std::vector<double> features;  // concatenated per-branch GAP vectors
};

struct ForwardResult {
  std::array<double, kClasses> probs{};  // class 1 = preictal
  ForwardCache cache;
};

// `sample` holds one (C, F, T) tensor in row-major order.
ForwardResult model_forward(const ModelParams& params, const ModelConfig& config, std::span<const double> sample);

struct BackwardResult {
  ModelParams grads;
  double loss = 0.0;
};

BackwardResult model_backward(const ModelParams& params, const ModelConfig& config, const ForwardCache& cache,
                              std::size_t label);

// Loss alone, for finite-difference checks.
double model_loss(const ModelParams& params, const ModelConfig& config, std::span<const double> sample,
                  std::size_t label);

}  // namespace seizurenet::net
