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
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "relconv/qualified_arith.hpp"
#include "relconv/tensor.hpp"

namespace relconv {

/// 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels.
struct Image8 {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  std::vector<std::uint8_t> data;

  Image8() = default;
  Image8(std::size_t w, std::size_t h, std::size_t c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), data(w * h * c, fill) {}

  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c = 0) {
    return data[(y * width + x) * channels + c];
  }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return data[(y * width + x) * channels + c];
  }
};

/// Single-channel intensity image, row-major, values nominally in [0, 1].
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> pixels;

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, float fill = 0.0f)
      : width(w), height(h), pixels(w * h, fill) {}

  float& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
  float at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
  bool empty() const { return pixels.empty(); }
};

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads binary PGM (P5) or PPM (P6) with maxval <= 255. Throws ImageError.
Image8 read_pnm(const std::filesystem::path& path);
Image8 decode_pnm(const std::string& bytes);

/// Writes P5 for one channel, P6 for three.
void write_pnm(const std::filesystem::path& path, const Image8& img);
std::string encode_pnm(const Image8& img);

/// Luma (BT.601 weights) scaled to [0, 1].
GrayImage to_gray(const Image8& img);

/// (height, width, channels) tensor with raw 0..255 intensities.
template <Element T>
Tensor<T> to_tensor(const Image8& img) {
  Tensor<T> t({img.height, img.width, img.channels});
  for (std::size_t i = 0; i < img.data.size(); ++i) t[i] = static_cast<T>(img.data[i]);
  return t;
}

/// Repeats a gray image into `channels` identical planes.
Image8 expand_channels(const Image8& img, std::size_t channels);

}  // namespace relconv
