#include "seizurenet/net/model.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "seizurenet/errors.hpp"

namespace seizurenet::net {

std::array<BranchSpec, kBranches> default_branches() {
  return {BranchSpec{Dim3{1, 1, 3}}, BranchSpec{Dim3{1, 1, 5}}, BranchSpec{Dim3{3, 1, 3}},
          BranchSpec{Dim3{3, 1, 5}}};
}

ConvSpec ModelConfig::conv_spec(std::size_t branch, std::size_t layer) const {
  return ConvSpec{branches[branch].kernels[layer], branches[branch].dilation, n_filters,
                  layer == 0 ? 1 : n_filters, Padding::Same};
}

std::array<Dim3, kLayers> ModelConfig::pooled_shapes(std::size_t branch) const {
  std::array<Dim3, kLayers> out{};
  Dim3 d = input;
  for (std::size_t l = 0; l < kLayers; ++l) out[l] = d = pooled_dims(d, branches[branch].pools[l]);
  return out;
}

void validate(const ModelConfig& config) {
  if (config.n_filters == 0) throw ConfigError("model.n_filters must be positive");
  if (config.input.volume() == 0) throw ConfigError("model input dims must be positive");
  for (std::size_t b = 0; b < kBranches; ++b) {
    const auto& br = config.branches[b];
    if (br.dilation.volume() == 0) throw ConfigError(fmt::format("branch {} has a zero dilation", b));
    for (std::size_t l = 0; l < kLayers; ++l) {
      if (br.kernels[l].volume() == 0) throw ConfigError(fmt::format("branch {} layer {} has an empty kernel", b, l));
    }
    try {
      (void)config.pooled_shapes(b);
    } catch (const PoolLargerThanInput& e) {
      throw ConfigError(fmt::format("input {} is too small for branch {}: {}", to_string(config.input), b, e.what()));
    }
  }
}

ParamLayout::ParamLayout(const ModelConfig& config) {
  std::size_t at = 0;
  auto take = [&at](std::size_t n) {
    Block b{at, n};
    at += n;
    return b;
  };
  for (std::size_t b = 0; b < kBranches; ++b) {
    for (std::size_t l = 0; l < kLayers; ++l) {
      const ConvSpec spec = config.conv_spec(b, l);
      conv_w_[b][l] = take(spec.weight_count());
      conv_b_[b][l] = take(spec.n_filters);
    }
  }
  dense_w_ = take(kClasses * config.feature_count());
  dense_b_ = take(kClasses);
  total_ = at;
}

Block ParamLayout::branch(std::size_t b) const {
  const std::size_t first = conv_w_[b][0].offset;
  const Block& last = conv_b_[b][kLayers - 1];
  return {first, last.offset + last.size - first};
}

ModelParams init_params(const ModelConfig& config) {
  validate(config);
  ModelParams p(config);
  std::mt19937_64 rng(config.seed);
  auto fill = [&](std::span<double> w, std::size_t fan_in) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    for (auto& v : w) v = dist(rng);
  };
  for (std::size_t b = 0; b < kBranches; ++b) {
    for (std::size_t l = 0; l < kLayers; ++l) {
      const ConvSpec spec = config.conv_spec(b, l);
      fill(p.block(p.layout.conv_weight(b, l)), spec.in_maps * spec.kernel.volume());
    }
  }
  fill(p.block(p.layout.dense_weight()), config.feature_count());
  return p;
}

ForwardResult model_forward(const ModelParams& params, const ModelConfig& config, std::span<const double> sample) {
  if (!(params.layout == ParamLayout(config))) throw ShapeMismatch("parameters do not match the model config");
  if (sample.size() != config.input.volume()) {
    throw ShapeMismatch(fmt::format("sample has {} values, model input {} needs {}", sample.size(),
                                    to_string(config.input), config.input.volume()));
  }

  ForwardResult r;
  r.cache.layout = params.layout;
  r.cache.features.reserve(config.feature_count());
  const Tensor4 input(1, config.input, std::vector<double>(sample.begin(), sample.end()));

  for (std::size_t b = 0; b < kBranches; ++b) {
    Tensor4 x = input;
    for (std::size_t l = 0; l < kLayers; ++l) {
      auto& lc = r.cache.layers[b][l];
      const ConvSpec spec = config.conv_spec(b, l);
      Tensor4 z = conv3d_forward(x, spec, params.block(params.layout.conv_weight(b, l)),
                                 params.block(params.layout.conv_bias(b, l)));
      PoolResult pooled = maxpool3d(relu(z), config.branches[b].pools[l]);
      lc.pool_in_dims = z.dims();
      lc.input = std::move(x);
      lc.pre_activation = std::move(z);
      lc.argmax = std::move(pooled.argmax);
      x = std::move(pooled.y);
    }
    r.cache.final_dims[b] = x.dims();
    const auto gap = global_avg_pool(x);
    r.cache.features.insert(r.cache.features.end(), gap.begin(), gap.end());
  }

  const auto dense = dense_softmax_xent(r.cache.features, params.block(params.layout.dense_weight()),
                                        params.block(params.layout.dense_bias()), 0);
  r.probs = dense.probs;
  return r;
}

BackwardResult model_backward(const ModelParams& params, const ModelConfig& config, const ForwardCache& cache,
                              std::size_t label) {
  if (!(cache.layout == params.layout) || !(params.layout == ParamLayout(config)) ||
      cache.features.size() != config.feature_count()) {
    throw StaleCache("forward cache does not match the parameters");
  }

  BackwardResult r{ModelParams(config), 0.0};
  auto& g = r.grads;
  const auto dense = dense_softmax_xent(cache.features, params.block(params.layout.dense_weight()),
                                        params.block(params.layout.dense_bias()), label);
  r.loss = dense.loss;
  std::ranges::copy(dense.grad_w, g.block(g.layout.dense_weight()).begin());
  std::ranges::copy(dense.grad_b, g.block(g.layout.dense_bias()).begin());

  for (std::size_t b = 0; b < kBranches; ++b) {
    const std::span<const double> branch_grad(dense.grad_features.data() + b * config.n_filters, config.n_filters);
    Tensor4 grad = global_avg_pool_backward(branch_grad, config.n_filters, cache.final_dims[b]);
    for (std::size_t l = kLayers; l-- > 0;) {
      const auto& lc = cache.layers[b][l];
      const ConvSpec spec = config.conv_spec(b, l);
      grad = maxpool3d_backward(lc.argmax, grad, spec.n_filters, lc.pool_in_dims);
      grad = relu_backward(lc.pre_activation, grad);
      auto cg = conv3d_backward(lc.input, spec, params.block(params.layout.conv_weight(b, l)), grad);
      std::ranges::copy(cg.grad_w, g.block(g.layout.conv_weight(b, l)).begin());
      std::ranges::copy(cg.grad_b, g.block(g.layout.conv_bias(b, l)).begin());
      grad = std::move(cg.grad_x);
    }
  }
  return r;
}

double model_loss(const ModelParams& params, const ModelConfig& config, std::span<const double> sample,
                  std::size_t label) {
  const auto fwd = model_forward(params, config, sample);
  return dense_softmax_xent(fwd.cache.features, params.block(params.layout.dense_weight()),
                            params.block(params.layout.dense_bias()), label)
      .loss;
}

}  // namespace seizurenet::net
