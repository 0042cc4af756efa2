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

#include "relconv/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "relconv/rng.hpp"

namespace relconv {

static_assert(std::endian::native == std::endian::little,
              "weight blobs are stored little-endian; add byte swapping for this host");

std::string to_string(LayerKind k) {
  switch (k) {
    case LayerKind::conv: return "conv";
    case LayerKind::relu: return "relu";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::flatten: return "flatten";
    case LayerKind::dense: return "dense";
    case LayerKind::softmax: return "softmax";
  }
  return "?";
}

LayerKind parse_layer_kind(const std::string& s) {
  for (LayerKind k : {LayerKind::conv, LayerKind::relu, LayerKind::maxpool, LayerKind::flatten,
                      LayerKind::dense, LayerKind::softmax}) {
    if (to_string(k) == s) return k;
  }
  throw NetworkError("unknown layer type: " + s);
}

namespace {

std::string shape_string(const std::vector<std::size_t>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

std::vector<std::vector<std::size_t>> chain_shapes(const NetworkSpec& net) {
  if (net.input.size() != 3 || std::find(net.input.begin(), net.input.end(), 0u) != net.input.end()) {
    throw NetworkError("network input must be a non-empty (height, width, channels) shape");
  }
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur = net.input;
  bool prefix = true;  // still inside the leading run of conv layers
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    const std::string where = "layer " + std::to_string(i) + " (" + to_string(l.kind) + "): ";
    if (l.kind == LayerKind::conv) {
      if (l.reliable && !prefix) {
        throw NetworkError(where + "only the leading conv layers may be reliable");
      }
      prefix = prefix && l.reliable;
      if (cur.size() != 3) throw NetworkError(where + "needs a (h, w, c) input, got " + shape_string(cur));
      if (l.filters == 0 || l.kernel == 0 || l.stride == 0) {
        throw NetworkError(where + "filters, kernel and stride must be positive");
      }
      try {
        cur = {output_extent(cur[0], l.kernel, l.stride, l.padding),
               output_extent(cur[1], l.kernel, l.stride, l.padding), l.filters};
      } catch (const std::invalid_argument& e) {
        throw NetworkError(where + e.what());
      }
    } else {
      prefix = false;
      switch (l.kind) {
        case LayerKind::relu:
          break;
        case LayerKind::maxpool:
          if (cur.size() != 3) throw NetworkError(where + "needs a (h, w, c) input");
          if (l.size == 0 || l.stride == 0) throw NetworkError(where + "size and stride must be positive");
          if (cur[0] < l.size || cur[1] < l.size) throw NetworkError(where + "window larger than input");
          cur = {(cur[0] - l.size) / l.stride + 1, (cur[1] - l.size) / l.stride + 1, cur[2]};
          break;
        case LayerKind::flatten:
        case LayerKind::softmax:
          cur = {Tensor<float>::count(cur)};
          break;
        case LayerKind::dense:
          if (cur.size() != 1) throw NetworkError(where + "needs a flat input; add a flatten layer");
          if (l.out_dim == 0) throw NetworkError(where + "out_dim must be positive");
          cur = {l.out_dim};
          break;
        case LayerKind::conv:
          break;
      }
    }
    out.push_back(cur);
  }
  return out;
}

}  // namespace

std::vector<std::vector<std::size_t>> NetworkSpec::shapes() const { return chain_shapes(*this); }

std::vector<std::vector<std::size_t>> NetworkSpec::validate() {
  auto s = chain_shapes(*this);
  std::size_t convs = 0, denses = 0;
  for (auto& l : layers) {
    if (l.kind == LayerKind::conv) {
      ++convs;
      if (l.name.empty()) l.name = "conv" + std::to_string(convs);
    } else if (l.kind == LayerKind::dense) {
      ++denses;
      if (l.name.empty()) l.name = "fc" + std::to_string(denses);
    }
  }
  std::vector<std::string> names;
  for (const auto& l : layers) {
    if (!l.name.empty()) names.push_back(l.name);
  }
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
    throw NetworkError("duplicate layer name");
  }
  return s;
}

nlohmann::json NetworkSpec::to_json() const {
  auto layers_json = nlohmann::json::array();
  for (const auto& l : layers) {
    nlohmann::json j{{"type", to_string(l.kind)}};
    if (!l.name.empty()) j["name"] = l.name;
    switch (l.kind) {
      case LayerKind::conv:
        j["filters"] = l.filters;
        j["kernel"] = l.kernel;
        j["stride"] = l.stride;
        j["padding"] = l.padding;
        j["reliable"] = l.reliable;
        break;
      case LayerKind::maxpool:
        j["size"] = l.size;
        j["stride"] = l.stride;
        break;
      case LayerKind::dense:
        j["out_dim"] = l.out_dim;
        break;
      default:
        break;
    }
    layers_json.push_back(j);
  }
  return {{"schema_version", 1},
          {"input", input},
          {"variant", std::string(relconv::to_string(variant))},
          {"layers", layers_json}};
}

NetworkSpec NetworkSpec::from_json(const nlohmann::json& j) {
  NetworkSpec net;
  try {
    net.input = j.at("input").get<std::vector<std::size_t>>();
    if (j.contains("variant")) net.variant = parse_variant(j.at("variant").get<std::string>());
    for (const auto& lj : j.at("layers")) {
      LayerSpec l;
      l.kind = parse_layer_kind(lj.at("type").get<std::string>());
      l.name = lj.value("name", std::string{});
      switch (l.kind) {
        case LayerKind::conv:
          l.filters = lj.at("filters").get<std::size_t>();
          l.kernel = lj.at("kernel").get<std::size_t>();
          l.stride = lj.value("stride", std::size_t{1});
          l.padding = lj.value("padding", std::size_t{0});
          l.reliable = lj.value("reliable", false);
          break;
        case LayerKind::maxpool:
          l.size = lj.at("size").get<std::size_t>();
          l.stride = lj.value("stride", l.size);
          break;
        case LayerKind::dense:
          l.out_dim = lj.at("out_dim").get<std::size_t>();
          break;
        default:
          break;
      }
      net.layers.push_back(l);
    }
  } catch (const nlohmann::json::exception& e) {
    throw NetworkError(std::string("malformed network spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw NetworkError(std::string("malformed network spec: ") + e.what());
  }
  net.validate();
  return net;
}

NetworkSpec NetworkSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NetworkError("cannot open network spec: " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw NetworkError(std::string("network spec is not JSON: ") + e.what());
  }
}

NetworkSpec NetworkSpec::mini_alexnet() {
  auto layer = [](LayerKind kind) {
    LayerSpec l;
    l.kind = kind;
    return l;
  };
  NetworkSpec net;
  net.input = {227, 227, 3};
  LayerSpec conv = layer(LayerKind::conv);
  conv.name = "conv1";
  conv.filters = 8;
  conv.kernel = 11;
  conv.stride = 4;
  conv.reliable = true;
  LayerSpec pool = layer(LayerKind::maxpool);
  pool.size = 3;
  pool.stride = 2;
  LayerSpec fc = layer(LayerKind::dense);
  fc.name = "fc";
  fc.out_dim = 4;
  net.layers = {conv, layer(LayerKind::relu), pool, layer(LayerKind::flatten), fc,
                layer(LayerKind::softmax)};
  net.validate();
  return net;
}

const Tensor<float>& WeightStore::get(const std::string& name) const {
  const auto it = tensors_.find(name);
  if (it == tensors_.end()) throw NetworkError("missing weight entry: " + name);
  return it->second;
}

void WeightStore::set(const std::string& name, Tensor<float> t) { tensors_[name] = std::move(t); }

nlohmann::json WeightStore::manifest() const {
  nlohmann::json entries = nlohmann::json::object();
  std::size_t offset = 0;
  for (const auto& [name, t] : tensors_) {
    const std::size_t length = t.size() * sizeof(float);
    entries[name] = {{"shape", t.shape()}, {"dtype", "float32"}, {"offset", offset},
                     {"length", length}};
    offset += length;
  }
  return {{"schema_version", 1}, {"byte_order", "little"}, {"entries", entries}};
}

void WeightStore::save(const std::filesystem::path& prefix) const {
  const auto base = prefix.string();
  std::ofstream m(base + ".manifest.json");
  if (!m) throw NetworkError("cannot write " + base + ".manifest.json");
  m << manifest().dump(2) << '\n';
  std::ofstream b(base + ".weights.bin", std::ios::binary);
  if (!b) throw NetworkError("cannot write " + base + ".weights.bin");
  for (const auto& [name, t] : tensors_) {
    b.write(reinterpret_cast<const char*>(t.data().data()),
            static_cast<std::streamsize>(t.size() * sizeof(float)));
  }
}

WeightStore WeightStore::from_parts(const nlohmann::json& manifest, const std::string& blob) {
  WeightStore store;
  struct Span {
    std::size_t offset, length;
    std::string name;
  };
  std::vector<Span> spans;
  try {
    for (const auto& [name, e] : manifest.at("entries").items()) {
      const auto shape = e.at("shape").get<std::vector<std::size_t>>();
      const auto dtype = e.at("dtype").get<std::string>();
      const auto offset = e.at("offset").get<std::size_t>();
      const auto length = e.at("length").get<std::size_t>();
      if (dtype != "float32") throw NetworkError(name + ": unsupported dtype " + dtype);
      if (length != Tensor<float>::count(shape) * sizeof(float)) {
        throw NetworkError(name + ": length does not match shape");
      }
      if (offset > blob.size() || length > blob.size() - offset) {
        throw NetworkError(name + ": entry extends past the end of the blob");
      }
      std::vector<float> values(length / sizeof(float));
      std::memcpy(values.data(), blob.data() + offset, length);
      store.tensors_[name] = Tensor<float>(shape, std::move(values));
      spans.push_back({offset, length, name});
    }
  } catch (const nlohmann::json::exception& e) {
    throw NetworkError(std::string("malformed weight manifest: ") + e.what());
  }
  std::sort(spans.begin(), spans.end(),
            [](const Span& a, const Span& b) { return a.offset < b.offset; });
  std::size_t total = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (i > 0 && spans[i - 1].offset + spans[i - 1].length > spans[i].offset) {
      throw NetworkError("weight entries overlap: " + spans[i - 1].name + ", " + spans[i].name);
    }
    total += spans[i].length;
  }
  if (total != blob.size()) throw NetworkError("weight blob size does not match the manifest");
  return store;
}

WeightStore WeightStore::load(const std::filesystem::path& prefix) {
  const auto base = prefix.string();
  std::ifstream m(base + ".manifest.json");
  if (!m) throw NetworkError("cannot open " + base + ".manifest.json");
  std::ifstream b(base + ".weights.bin", std::ios::binary);
  if (!b) throw NetworkError("cannot open " + base + ".weights.bin");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(m);
  } catch (const nlohmann::json::parse_error& e) {
    throw NetworkError(std::string("weight manifest is not JSON: ") + e.what());
  }
  const std::string blob((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  return from_parts(manifest, blob);
}

void check_weights(const NetworkSpec& net, const WeightStore& weights) {
  const auto shapes = net.shapes();
  std::vector<std::size_t> in = net.input;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    auto expect = [&](const std::string& name, const std::vector<std::size_t>& shape) {
      const Tensor<float>& t = weights.get(name);
      if (t.shape() != shape) {
        throw NetworkError(name + ": expected shape " + shape_string(shape) + ", got " +
                           shape_string(t.shape()));
      }
    };
    if (l.kind == LayerKind::conv) {
      expect(l.name, {l.filters, l.kernel, l.kernel, in[2]});
    } else if (l.kind == LayerKind::dense) {
      expect(l.name, {l.out_dim, in[0]});
      expect(l.name + ".bias", {l.out_dim});
    }
    in = shapes[i];
  }
}

WeightStore random_weights(const NetworkSpec& net, std::uint64_t seed) {
  const auto shapes = net.shapes();
  WeightStore store;
  std::vector<std::size_t> in = net.input;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    CounterRng rng(seed, i);
    auto fill = [&](std::vector<std::size_t> shape, std::size_t fan_in) {
      Tensor<float> t(std::move(shape));
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
      for (std::size_t k = 0; k < t.size(); ++k) t[k] = static_cast<float>(rng.uniform(-bound, bound));
      return t;
    };
    if (l.kind == LayerKind::conv) {
      store.set(l.name, fill({l.filters, l.kernel, l.kernel, in[2]}, l.kernel * l.kernel * in[2]));
    } else if (l.kind == LayerKind::dense) {
      store.set(l.name, fill({l.out_dim, in[0]}, in[0]));
      store.set(l.name + ".bias", Tensor<float>({l.out_dim}));
    }
    in = shapes[i];
  }
  return store;
}

std::vector<float> softmax(std::span<const float> logits) {
  std::vector<float> out(logits.size());
  if (logits.empty()) return out;
  const float hi = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - hi);
    sum += out[i];
  }
  for (auto& v : out) v = static_cast<float>(v / sum);
  return out;
}

namespace {

void merge(LayerReport& into, const LayerReport& r) {
  into.any_failure = into.any_failure || r.any_failure;
  into.failed_kernels.insert(into.failed_kernels.end(), r.failed_kernels.begin(),
                             r.failed_kernels.end());
  into.kernels += r.kernels;
  into.total_retries += r.total_retries;
  into.detections += r.detections;
  into.faults_fired += r.faults_fired;
  into.error_peak = std::max(into.error_peak, r.error_peak);
}

Tensor<float> maxpool(const Tensor<float>& x, std::size_t size, std::size_t stride) {
  const std::size_t h = x.extent(0), w = x.extent(1), c = x.extent(2);
  const std::size_t oh = (h - size) / stride + 1, ow = (w - size) / stride + 1;
  Tensor<float> out({oh, ow, c});
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t xx = 0; xx < ow; ++xx) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        float best = x.at(y * stride, xx * stride, ch);
        for (std::size_t dy = 0; dy < size; ++dy) {
          for (std::size_t dx = 0; dx < size; ++dx) {
            best = std::max(best, x.at(y * stride + dy, xx * stride + dx, ch));
          }
        }
        out.at(y, xx, ch) = best;
      }
    }
  }
  return out;
}

}  // namespace

ForwardResult forward(const NetworkSpec& net, const WeightStore& weights, const Tensor<float>& input,
                      const FaultPlan& plan, const ForwardOptions& opts) {
  if (input.shape() != net.input) {
    throw NetworkError("input shape " + shape_string(input.shape()) + " does not match network " +
                       shape_string(net.input));
  }
  check_weights(net, weights);

  ForwardResult result;
  Tensor<float> cur = input;
  std::uint32_t conv_index = 0;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    switch (l.kind) {
      case LayerKind::conv: {
        const ConvConfig cfg{l.stride, l.padding, net.variant};
        if (l.reliable) {
          ConvOptions co = opts.conv;
          co.layer = conv_index;
          co.threads = opts.threads;
          auto r = conv2d(cur, weights.get(l.name), cfg, plan, co);
          merge(result.reliability, r.report);
          cur = std::move(r.feature_maps);
        } else {
          cur = conv2d_plain(cur, weights.get(l.name), cfg, opts.threads);
        }
        result.conv_outputs.push_back(cur);
        ++conv_index;
        break;
      }
      case LayerKind::relu:
        for (std::size_t k = 0; k < cur.size(); ++k) cur[k] = std::max(cur[k], 0.0f);
        break;
      case LayerKind::maxpool:
        cur = maxpool(cur, l.size, l.stride);
        break;
      case LayerKind::flatten:
        cur = Tensor<float>({cur.size()}, cur.values());
        break;
      case LayerKind::dense: {
        const Tensor<float>& w = weights.get(l.name);
        const Tensor<float>& b = weights.get(l.name + ".bias");
        const std::size_t n_in = cur.size();
        Tensor<float> out({l.out_dim});
        for (std::size_t o = 0; o < l.out_dim; ++o) {
          float acc = 0.0f;
          for (std::size_t k = 0; k < n_in; ++k) acc += w[o * n_in + k] * cur[k];
          out[o] = acc + b[o];
        }
        cur = std::move(out);
        break;
      }
      case LayerKind::softmax:
        cur = Tensor<float>({cur.size()}, softmax(cur.data()));
        break;
    }
  }
  result.scores = cur.values();
  return result;
}

std::array<float, 9> sobel_stencil(SobelSet::Axis axis) {
  if (axis == SobelSet::Axis::x) return {-1, 0, 1, -2, 0, 2, -1, 0, 1};
  return {-1, -2, -1, 0, 0, 0, 1, 2, 1};
}

WeightStore preinit_filters(const WeightStore& weights, const NetworkSpec& net,
                            const std::string& layer, std::size_t filter, const SobelSet& set) {
  const auto it = std::find_if(net.layers.begin(), net.layers.end(),
                               [&](const LayerSpec& l) { return l.name == layer; });
  if (it == net.layers.end()) throw NetworkError("no layer named " + layer);
  if (it->kind != LayerKind::conv) throw NetworkError(layer + " is not a conv layer");
  const Tensor<float>& w = weights.get(layer);
  if (w.rank() != 4) throw NetworkError(layer + ": conv weights must be rank 4");
  const std::size_t n = w.extent(0), kh = w.extent(1), kw = w.extent(2), c = w.extent(3);
  if (c != set.channels.size()) {
    throw NetworkError(layer + ": Sobel set needs " + std::to_string(set.channels.size()) +
                       " input channels, layer has " + std::to_string(c));
  }
  if (kh < 3 || kw < 3) throw NetworkError(layer + ": kernel smaller than 3x3");
  if (filter >= n) throw NetworkError(layer + ": filter index out of range");

  Tensor<float> out = w;
  auto f = out.slice(filter);
  std::fill(f.begin(), f.end(), 0.0f);
  const std::size_t oy = (kh - 3) / 2, ox = (kw - 3) / 2;
  for (std::size_t ch = 0; ch < c; ++ch) {
    const auto st = sobel_stencil(set.channels[ch]);
    for (std::size_t dy = 0; dy < 3; ++dy) {
      for (std::size_t dx = 0; dx < 3; ++dx) {
        f[((oy + dy) * kw + (ox + dx)) * c + ch] = st[dy * 3 + dx];
      }
    }
  }
  WeightStore result = weights;
  result.set(layer, std::move(out));
  return result;
}

std::vector<WeightStore> replace_filters(const WeightStore& weights, const NetworkSpec& net,
                                         const std::string& layer,
                                         std::optional<std::size_t> filter, const SobelSet& set) {
  if (filter) return {preinit_filters(weights, net, layer, *filter, set)};
  const std::size_t n = weights.get(layer).extent(0);
  std::vector<WeightStore> out;
  out.reserve(n);
  for (std::size_t f = 0; f < n; ++f) out.push_back(preinit_filters(weights, net, layer, f, set));
  return out;
}

}  // namespace relconv
