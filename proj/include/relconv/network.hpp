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

// Minimal float CNN whose leading conv layers may run through the reliable
// convolution, plus its weight container and Sobel filter surgery.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "relconv/qualified_arith.hpp"
#include "relconv/reliable_conv.hpp"
#include "relconv/tensor.hpp"

namespace relconv {

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LayerKind { conv, relu, maxpool, flatten, dense, softmax };

std::string to_string(LayerKind k);
LayerKind parse_layer_kind(const std::string& s);

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::string name;  // weight entry prefix for conv / dense

  // conv
  std::size_t filters = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;
  bool reliable = false;

  // maxpool (reuses stride)
  std::size_t size = 0;

  // dense
  std::size_t out_dim = 0;
};

struct NetworkSpec {
  std::vector<std::size_t> input{227, 227, 3};  // (h, w, c)
  std::vector<LayerSpec> layers;
  Variant variant = Variant::redundant;  // for reliable conv layers

  /// Checks the shape chain, the reliable-prefix rule and fills default
  /// layer names ("conv1", "conv2", ..., "fc1", ...). Returns the output
  /// shape of every layer. Throws NetworkError.
  std::vector<std::vector<std::size_t>> validate();

  /// Shapes without mutating names; throws like validate().
  std::vector<std::vector<std::size_t>> shapes() const;

  nlohmann::json to_json() const;
  static NetworkSpec from_json(const nlohmann::json& j);
  static NetworkSpec load(const std::filesystem::path& path);

  /// conv 8x11x11x3 stride 4 (reliable) -> relu -> maxpool 3/2 -> flatten
  /// -> dense 4 -> softmax, on 227x227x3.
  static NetworkSpec mini_alexnet();
};

/// Named float32 tensors. Serialized as `<prefix>.manifest.json` plus
/// `<prefix>.weights.bin` (raw little-endian float32, manifest order).
class WeightStore {
 public:
  bool has(const std::string& name) const { return tensors_.contains(name); }
  const Tensor<float>& get(const std::string& name) const;
  void set(const std::string& name, Tensor<float> t);
  const std::map<std::string, Tensor<float>>& tensors() const { return tensors_; }

  nlohmann::json manifest() const;
  void save(const std::filesystem::path& prefix) const;
  static WeightStore load(const std::filesystem::path& prefix);
  /// Rebuilds a store from a manifest and blob; validates dtype, lengths,
  /// overlap and total size. Throws NetworkError.
  static WeightStore from_parts(const nlohmann::json& manifest, const std::string& blob);

  friend bool operator==(const WeightStore&, const WeightStore&) = default;

 private:
  std::map<std::string, Tensor<float>> tensors_;
};

/// Every conv needs `<name>` shaped (filters, k, k, c_in); every dense needs
/// `<name>` shaped (out, in) and `<name>.bias` shaped (out). Throws NetworkError.
void check_weights(const NetworkSpec& net, const WeightStore& weights);

/// Deterministic uniform(-b, b) initialisation with b = sqrt(6 / fan_in).
WeightStore random_weights(const NetworkSpec& net, std::uint64_t seed);

struct ForwardOptions {
  ConvOptions conv{};
  unsigned threads = 1;
};

struct ForwardResult {
  std::vector<float> scores;
  LayerReport reliability;                 // merged over reliable conv layers
  std::vector<Tensor<float>> conv_outputs;  // pre-activation output of every conv layer
};

/// Runs the network on an (h, w, c) tensor. Conv layer i (0-based among conv
/// layers) uses OpCoord layer index i for fault lookup.
ForwardResult forward(const NetworkSpec& net, const WeightStore& weights, const Tensor<float>& input,
                      const FaultPlan& plan = {}, const ForwardOptions& opts = {});

/// Numerically stable softmax (max subtracted before exponentiation).
std::vector<float> softmax(std::span<const float> logits);

/// Per-channel Sobel assignment for a 3-channel filter.
struct SobelSet {
  enum class Axis { x, y };
  std::vector<Axis> channels{Axis::x, Axis::y, Axis::x};
};

/// 3x3 Sobel stencil for one axis, row-major ([[-1,0,1],[-2,0,2],[-1,0,1]] for x).
std::array<float, 9> sobel_stencil(SobelSet::Axis axis);

/// Writes the Sobel set into the central 3x3 window of filter `filter` of conv
/// layer `layer`, zeroing the rest of that filter. Throws NetworkError.
WeightStore preinit_filters(const WeightStore& weights, const NetworkSpec& net,
                            const std::string& layer, std::size_t filter,
                            const SobelSet& set = {});

/// Same transform; `filter` unset means every filter, one store per index.
std::vector<WeightStore> replace_filters(const WeightStore& weights, const NetworkSpec& net,
                                         const std::string& layer,
                                         std::optional<std::size_t> filter,
                                         const SobelSet& set = {});

}  // namespace relconv
