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

#include "relconv/image.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>

namespace relconv {

namespace {

// Header tokens are separated by whitespace; '#' starts a comment to end of line.
class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  std::string token() {
    skip();
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      out += bytes_[pos_++];
    }
    if (out.empty()) throw ImageError("truncated PNM header");
    return out;
  }

  std::size_t number() {
    const std::string t = token();
    std::size_t value = 0;
    for (char ch : t) {
      if (!std::isdigit(static_cast<unsigned char>(ch))) {
        throw ImageError("bad PNM header field: " + t);
      }
      value = value * 10 + static_cast<std::size_t>(ch - '0');
      if (value > (1u << 24)) throw ImageError("PNM dimension too large");
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() const { return pos_ + 1; }

 private:
  void skip() {
    while (pos_ < bytes_.size()) {
      const char ch = bytes_[pos_];
      if (ch == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Image8 decode_pnm(const std::string& bytes) {
  HeaderReader header(bytes);
  const std::string magic = header.token();
  std::size_t channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw ImageError("unsupported image format (expected binary P5/P6): " + magic);
  }
  const std::size_t width = header.number();
  const std::size_t height = header.number();
  const std::size_t maxval = header.number();
  if (width == 0 || height == 0) throw ImageError("empty image");
  if (maxval == 0 || maxval > 255) throw ImageError("only 8-bit PNM is supported");

  Image8 img(width, height, channels);
  const std::size_t start = header.raster_start();
  if (start + img.data.size() > bytes.size()) throw ImageError("truncated PNM raster");
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const auto raw = static_cast<unsigned char>(bytes[start + i]);
    if (raw > maxval) throw ImageError("PNM sample exceeds maxval");
    img.data[i] = static_cast<std::uint8_t>(maxval == 255 ? raw : (raw * 255 + maxval / 2) / maxval);
  }
  return img;
}

Image8 read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError("cannot open image: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pnm(bytes);
}

std::string encode_pnm(const Image8& img) {
  if (img.channels != 1 && img.channels != 3) {
    throw ImageError("PNM output needs 1 or 3 channels");
  }
  std::ostringstream out;
  out << (img.channels == 1 ? "P5" : "P6") << '\n' << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  return out.str();
}

void write_pnm(const std::filesystem::path& path, const Image8& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageError("cannot write image: " + path.string());
  out << encode_pnm(img);
}

GrayImage to_gray(const Image8& img) {
  GrayImage g(img.width, img.height);
  for (std::size_t i = 0; i < img.width * img.height; ++i) {
    if (img.channels == 1) {
      g.pixels[i] = img.data[i] / 255.0f;
    } else {
      const float r = img.data[3 * i], gr = img.data[3 * i + 1], b = img.data[3 * i + 2];
      g.pixels[i] = (0.299f * r + 0.587f * gr + 0.114f * b) / 255.0f;
    }
  }
  return g;
}

Image8 expand_channels(const Image8& img, std::size_t channels) {
  if (img.channels == channels) return img;
  if (img.channels != 1) throw ImageError("can only expand single-channel images");
  Image8 out(img.width, img.height, channels);
  for (std::size_t i = 0; i < img.width * img.height; ++i) {
    for (std::size_t c = 0; c < channels; ++c) out.data[i * channels + c] = img.data[i];
  }
  return out;
}

}  // namespace relconv
