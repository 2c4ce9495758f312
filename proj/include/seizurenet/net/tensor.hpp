#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace seizurenet::net {

// Spatial extent along (channel, frequency, time).
struct Dim3 {
  std::size_t c = 1;
  std::size_t f = 1;
  std::size_t t = 1;

  std::size_t volume() const { return c * f * t; }
  bool operator==(const Dim3&) const = default;
};

std::string to_string(const Dim3& d);

// Dense (maps, C, F, T) array of doubles, maps slowest and T fastest.
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(std::size_t maps, Dim3 dims, double fill = 0.0);
  Tensor4(std::size_t maps, Dim3 dims, std::vector<double> data);

  std::size_t maps() const { return maps_; }
  const Dim3& dims() const { return dims_; }
  std::array<std::size_t, 4> shape() const { return {maps_, dims_.c, dims_.f, dims_.t}; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t m, std::size_t c, std::size_t f, std::size_t t) {
    return data_[((m * dims_.c + c) * dims_.f + f) * dims_.t + t];
  }
  double operator()(std::size_t m, std::size_t c, std::size_t f, std::size_t t) const {
    return data_[((m * dims_.c + c) * dims_.f + f) * dims_.t + t];
  }

  std::span<double> map(std::size_t m) { return {data_.data() + m * dims_.volume(), dims_.volume()}; }
  std::span<const double> map(std::size_t m) const { return {data_.data() + m * dims_.volume(), dims_.volume()}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Tensor4& o) const { return maps_ == o.maps_ && dims_ == o.dims_; }

 private:
  std::size_t maps_ = 0;
  Dim3 dims_{0, 0, 0};
  std::vector<double> data_;
};

}  // namespace seizurenet::net
