#include "seizurenet/net/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <span>

#include "seizurenet/net/layers.hpp"
#include "seizurenet/net/model.hpp"

namespace seizurenet::net {

namespace {

class Checker {
 public:
  Checker(std::string layer, const GradcheckOptions& opt) : opt_(opt) { row_.layer = std::move(layer); }

  // Perturbs each entry of `values` in place and compares the centred
  // difference of `loss` with `analytic`.
  void check(std::vector<double>& values, std::span<const double> analytic, const std::function<double()>& loss) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + opt_.step;
      const double up = loss();
      values[i] = saved - opt_.step;
      const double down = loss();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * opt_.step);
      row_.worst_error = std::max(row_.worst_error, relative_error(analytic[i], numeric));
      ++row_.checked;
    }
  }

  GradcheckRow finish() {
    row_.passed = row_.worst_error < opt_.tolerance;
    return row_;
  }

 private:
  const GradcheckOptions& opt_;
  GradcheckRow row_;
};

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

GradcheckRow check_conv(const GradcheckOptions& opt, std::mt19937_64& rng) {
  Checker checker("conv", opt);
  const Dim3 model_dilations[] = {{1, 1, 3}, {1, 1, 5}, {3, 1, 3}, {3, 1, 5}};
  for (std::size_t k = 0; k < opt.conv_cases; ++k) {
    ConvSpec spec;
    spec.in_maps = uniform(rng, 1, 2);
    spec.n_filters = uniform(rng, 1, 2);
    spec.kernel = {uniform(rng, 1, 2), uniform(rng, 1, 2), uniform(rng, 1, 3)};
    spec.dilation = k < 4 ? model_dilations[k] : Dim3{uniform(rng, 1, 3), uniform(rng, 1, 2), uniform(rng, 1, 3)};
    spec.padding = k % 3 == 2 ? Padding::Valid : Padding::Same;
    Dim3 in{uniform(rng, 1, 3), uniform(rng, 2, 6), uniform(rng, 3, 8)};
    const Dim3 e = effective_extent(spec.kernel, spec.dilation);
    if (spec.padding == Padding::Valid) in = {std::max(in.c, e.c), std::max(in.f, e.f), std::max(in.t, e.t)};

    Tensor4 x(spec.in_maps, in, random_vector(spec.in_maps * in.volume(), rng));
    auto w = random_vector(spec.weight_count(), rng);
    auto b = random_vector(spec.n_filters, rng);
    const Tensor4 probe_shape = conv3d_forward(x, spec, w, b);
    const Tensor4 r(probe_shape.maps(), probe_shape.dims(), random_vector(probe_shape.size(), rng));

    const auto g = conv3d_backward(x, spec, w, r);
    auto loss = [&] { return dot(conv3d_forward(x, spec, w, b).data(), r.data()); };
    checker.check(x.data(), g.grad_x.data(), loss);
    checker.check(w, g.grad_w, loss);
    checker.check(b, g.grad_b, loss);
  }
  return checker.finish();
}

GradcheckRow check_relu(const GradcheckOptions& opt, std::mt19937_64& rng) {
  Checker checker("relu", opt);
  Tensor4 x(2, {2, 3, 5}, random_vector(60, rng));
  // Keep inputs away from the kink at zero.
  for (auto& v : x.data()) v = v >= 0 ? v + 0.1 : v - 0.1;
  const Tensor4 r(2, {2, 3, 5}, random_vector(60, rng));
  const auto g = relu_backward(x, r);
  checker.check(x.data(), g.data(), [&] { return dot(relu(x).data(), r.data()); });
  return checker.finish();
}

GradcheckRow check_pool(const GradcheckOptions& opt, std::mt19937_64& rng) {
  Checker checker("pool", opt);
  const Dim3 pools[] = {{1, 2, 2}, {2, 2, 2}, {2, 1, 3}};
  for (const auto& pool : pools) {
    const Dim3 in{3, 5, 7};
    // Distinct values spaced well beyond the step so no window has a near tie.
    std::vector<double> values(2 * in.volume());
    std::iota(values.begin(), values.end(), 0.0);
    std::shuffle(values.begin(), values.end(), rng);
    for (auto& v : values) v *= 0.01;
    Tensor4 x(2, in, values);
    const auto fwd = maxpool3d(x, pool);
    const Tensor4 r(fwd.y.maps(), fwd.y.dims(), random_vector(fwd.y.size(), rng));
    const auto g = maxpool3d_backward(fwd.argmax, r, x.maps(), x.dims());
    checker.check(x.data(), g.data(), [&] { return dot(maxpool3d(x, pool).y.data(), r.data()); });
  }
  return checker.finish();
}

GradcheckRow check_gap(const GradcheckOptions& opt, std::mt19937_64& rng) {
  Checker checker("gap", opt);
  Tensor4 x(3, {2, 3, 4}, random_vector(72, rng));
  const auto r = random_vector(3, rng);
  const auto g = global_avg_pool_backward(r, 3, x.dims());
  checker.check(x.data(), g.data(), [&] { return dot(global_avg_pool(x), r); });
  return checker.finish();
}

GradcheckRow check_dense(const GradcheckOptions& opt, std::mt19937_64& rng) {
  Checker checker("dense", opt);
  for (std::size_t label = 0; label < kClasses; ++label) {
    auto features = random_vector(6, rng);
    auto w = random_vector(kClasses * 6, rng, 0.5);
    auto b = random_vector(kClasses, rng);
    const auto r = dense_softmax_xent(features, w, b, label);
    auto loss = [&] { return dense_softmax_xent(features, w, b, label).loss; };
    checker.check(features, r.grad_features, loss);
    checker.check(w, r.grad_w, loss);
    checker.check(b, r.grad_b, loss);
  }
  return checker.finish();
}

GradcheckRow check_model(const GradcheckOptions& opt, std::mt19937_64& rng) {
  Checker checker("model", opt);
  ModelConfig config;
  config.input = {4, 8, 12};
  config.n_filters = 2;
  config.seed = rng();
  ModelParams params = init_params(config);
  // Nonzero biases move pre-activations off the ReLU kink.
  for (std::size_t b = 0; b < kBranches; ++b) {
    for (std::size_t l = 0; l < kLayers; ++l) {
      for (auto& v : params.block(params.layout.conv_bias(b, l))) v = std::normal_distribution<double>(0.0, 0.1)(rng);
    }
  }
  const auto sample = random_vector(config.input.volume(), rng);
  for (std::size_t label = 0; label < kClasses; ++label) {
    const auto fwd = model_forward(params, config, sample);
    const auto bwd = model_backward(params, config, fwd.cache, label);
    checker.check(params.values, bwd.grads.values, [&] { return model_loss(params, config, sample, label); });
  }
  return checker.finish();
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

GradcheckReport run_gradcheck(const GradcheckOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  GradcheckReport report;
  report.rows.push_back(check_conv(opt, rng));
  report.rows.push_back(check_relu(opt, rng));
  report.rows.push_back(check_pool(opt, rng));
  report.rows.push_back(check_gap(opt, rng));
  report.rows.push_back(check_dense(opt, rng));
  report.rows.push_back(check_model(opt, rng));
  report.passed = std::all_of(report.rows.begin(), report.rows.end(), [](const auto& r) { return r.passed; });
  return report;
}

}  // namespace seizurenet::net
