// Copyright 2026 The relconv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace relconv {

/// Dense row-major tensor. Images and feature maps are (height, width,
/// channels); filter banks are (filters, kernel_h, kernel_w, channels).
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape, T fill = T{})
      : shape_(std::move(shape)), data_(count(shape_), fill) {}

  Tensor(std::vector<std::size_t> shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != count(shape_)) {
      throw std::invalid_argument("tensor data size " + std::to_string(data_.size()) +
                                  " does not match shape (" + std::to_string(count(shape_)) +
                                  " elements)");
    }
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // Rank-3 (y, x, c) access.
  T& at(std::size_t y, std::size_t x, std::size_t c) { return data_[offset(y, x, c)]; }
  const T& at(std::size_t y, std::size_t x, std::size_t c) const {
    return data_[offset(y, x, c)];
  }

  // Rank-4 (n, y, x, c) access.
  T& at(std::size_t n, std::size_t y, std::size_t x, std::size_t c) {
    return data_[offset(n, y, x, c)];
  }
  const T& at(std::size_t n, std::size_t y, std::size_t x, std::size_t c) const {
    return data_[offset(n, y, x, c)];
  }

  /// Contiguous slice for the n-th item along axis 0.
  std::span<const T> slice(std::size_t n) const {
    const std::size_t stride = data_.size() / shape_.at(0);
    return std::span<const T>(data_).subspan(n * stride, stride);
  }
  std::span<T> slice(std::size_t n) {
    const std::size_t stride = data_.size() / shape_.at(0);
    return std::span<T>(data_).subspan(n * stride, stride);
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

  static std::size_t count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  }

 private:
  std::size_t offset(std::size_t y, std::size_t x, std::size_t c) const {
    return (y * shape_[1] + x) * shape_[2] + c;
  }
  std::size_t offset(std::size_t n, std::size_t y, std::size_t x, std::size_t c) const {
    return ((n * shape_[1] + y) * shape_[2] + x) * shape_[3] + c;
  }

  std::vector<std::size_t> shape_;
  std::vector<T> data_;
};

template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& t) {
  std::vector<To> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<To>(t[i]);
  return Tensor<To>(t.shape(), std::move(out));
}

}  // namespace relconv
