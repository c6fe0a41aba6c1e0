#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wsseg/common/error.hpp"

namespace wsseg {

/// Rank-4 extent: batch, channels, height, width.
struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t numel() const noexcept {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  bool operator==(const Shape&) const = default;
  std::string str() const {
    return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" +
           std::to_string(w);
  }
};

/// Dense row-major NCHW array. Plain value type; gradients live in Var.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0)) : shape_(shape), data_(shape.numel(), fill) {
    check_shape(shape);
  }
  Tensor(Shape shape, std::vector<T> values) : shape_(shape), data_(std::move(values)) {
    check_shape(shape);
    if (data_.size() != shape.numel()) {
      throw ConfigError("tensor data length " + std::to_string(data_.size()) +
                        " does not match shape " + shape.str());
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::size_t offset(int n, int c, int h, int w) const noexcept {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }
  T& operator()(int n, int c, int h, int w) noexcept { return data_[offset(n, c, h, w)]; }
  const T& operator()(int n, int c, int h, int w) const noexcept {
    return data_[offset(n, c, h, w)];
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  /// Same data, new extent with equal element count.
  Tensor reshaped(Shape s) const { return Tensor(s, data_); }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  bool operator==(const Tensor&) const = default;

 private:
  static void check_shape(const Shape& s) {
    if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0) {
      throw ConfigError("negative tensor dimension in " + s.str());
    }
  }

  Shape shape_{};
  std::vector<T> data_;
};

}  // namespace wsseg
