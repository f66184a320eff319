#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "magnifier/errors.hpp"

namespace magnifier::nn {

/// Dense float32 tensor with owning storage. Layout is row-major over the
/// shape vector; images use CHW, batches NCHW.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, float fill = 0.0f)
      : shape_(std::move(shape)), data_(count(shape_), fill) {}

  static Tensor from(std::vector<int> shape, std::vector<float> values) {
    if (static_cast<std::int64_t>(values.size()) != count(shape))
      throw ShapeMismatch("value count does not match shape");
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::move(values);
    return t;
  }

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  float& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  float operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  // NCHW accessor.
  float& at(int n, int c, int h, int w) {
    return data_[static_cast<std::size_t>(
        ((static_cast<std::int64_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
  }
  float at(int n, int c, int h, int w) const {
    return data_[static_cast<std::size_t>(
        ((static_cast<std::int64_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
  }
  // HW accessor.
  float& at(int h, int w) {
    return data_[static_cast<std::size_t>(
        static_cast<std::int64_t>(h) * shape_[1] + w)];
  }
  float at(int h, int w) const {
    return data_[static_cast<std::size_t>(
        static_cast<std::int64_t>(h) * shape_[1] + w)];
  }
  // CHW accessor.
  float& at(int c, int h, int w) {
    return data_[static_cast<std::size_t>(
        (static_cast<std::int64_t>(c) * shape_[1] + h) * shape_[2] + w)];
  }
  float at(int c, int h, int w) const {
    return data_[static_cast<std::size_t>(
        (static_cast<std::int64_t>(c) * shape_[1] + h) * shape_[2] + w)];
  }

  void fill(float v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  static std::int64_t count(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) n *= d;
    return shape.empty() ? 0 : n;
  }

 private:
  std::vector<int> shape_;
  std::vector<float> data_;
};

}  // namespace magnifier::nn
