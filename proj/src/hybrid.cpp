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

#include "relconv/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <stdexcept>

namespace relconv {

bool SafetyPolicy::marked(std::size_t class_id) const {
  if (class_id >= class_names.size()) return false;
  const auto it = requires_qualification.find(class_names[class_id]);
  return it != requires_qualification.end() && it->second;
}

void SafetyPolicy::validate() const {
  if (class_names.empty()) throw std::invalid_argument("policy lists no classes");
  bool any = false;
  for (const auto& [name, flag] : requires_qualification) {
    if (std::find(class_names.begin(), class_names.end(), name) == class_names.end()) {
      throw std::invalid_argument("policy marks unknown class: " + name);
    }
    any = any || flag;
  }
  if (!any) throw std::invalid_argument("policy must mark at least one class for qualification");
}

nlohmann::json SafetyPolicy::to_json() const {
  return {{"class_names", class_names}, {"requires_qualification", requires_qualification}};
}

SafetyPolicy SafetyPolicy::from_json(const nlohmann::json& j) {
  SafetyPolicy p;
  try {
    p.class_names = j.at("class_names").get<std::vector<std::string>>();
    p.requires_qualification = j.at("requires_qualification").get<std::map<std::string, bool>>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed policy: ") + e.what());
  }
  p.validate();
  return p;
}

SafetyPolicy SafetyPolicy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open policy: " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("policy is not JSON: ") + e.what());
  }
}

SafetyPolicy SafetyPolicy::traffic_signs() {
  SafetyPolicy p;
  p.class_names = {"stop", "parking_prohibition", "yield", "speed_limit"};
  p.requires_qualification = {{"stop", true}};
  return p;
}

std::string to_string(Qualification q) {
  switch (q) {
    case Qualification::confirmed: return "confirmed";
    case Qualification::contradicted: return "contradicted";
    case Qualification::not_required: return "not_required";
  }
  return "?";
}

Qualification qualification_status(bool marked, bool verdict_accepted, bool dcnn_failed) {
  if (!marked) return Qualification::not_required;
  if (dcnn_failed || !verdict_accepted) return Qualification::contradicted;
  return Qualification::confirmed;
}

std::string to_string(EdgeWiring w) { return w == EdgeWiring::shared ? "shared" : "recompute"; }

EdgeWiring parse_edge_wiring(const std::string& s) {
  if (s == "shared") return EdgeWiring::shared;
  if (s == "recompute") return EdgeWiring::recompute;
  throw std::invalid_argument("unknown edge wiring: " + s);
}

nlohmann::json QualifiedClassification::to_json() const {
  return {{"schema_version", 1},
          {"class_id", class_id},
          {"class_name", class_name},
          {"score", score},
          {"scores", scores},
          {"qualified", to_string(qualified)},
          {"reliability", reliability.to_json()},
          {"verdict", verdict.to_json()}};
}

Tensor<float> network_input(const NetworkSpec& net, const Image8& img) {
  if (net.input.size() != 3 || img.height != net.input[0] || img.width != net.input[1]) {
    throw NetworkError("image is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                       ", network expects " + std::to_string(net.input.at(1)) + "x" +
                       std::to_string(net.input.at(0)));
  }
  if (img.channels == net.input[2]) return to_tensor<float>(img);
  try {
    return to_tensor<float>(expand_channels(img, net.input[2]));
  } catch (const ImageError& e) {
    throw NetworkError(e.what());
  }
}

namespace {

GrayImage shared_edges(const NetworkSpec& net, const ForwardResult& fr, std::size_t filter) {
  const auto first = std::find_if(net.layers.begin(), net.layers.end(),
                                  [](const LayerSpec& l) { return l.kind == LayerKind::conv; });
  if (first == net.layers.end() || fr.conv_outputs.empty()) {
    throw NetworkError("shared edge wiring needs a conv layer");
  }
  const Tensor<float>& maps = fr.conv_outputs.front();
  if (filter >= maps.extent(2)) throw NetworkError("shared edge filter index out of range");
  GrayImage edges(maps.extent(1), maps.extent(0));
  for (std::size_t y = 0; y < maps.extent(0); ++y) {
    for (std::size_t x = 0; x < maps.extent(1); ++x) {
      edges.at(x, y) = std::abs(maps.at(y, x, filter));
    }
  }
  return edges;
}

}  // namespace

QualifiedClassification classify_qualified(const NetworkSpec& net, const WeightStore& weights,
                                           const Image8& img, const SafetyPolicy& policy,
                                           const QualifierConfig& qcfg, const FaultPlan& plan,
                                           const ClassifyOptions& opts) {
  policy.validate();
  qcfg.validate();
  const Tensor<float> input = network_input(net, img);

  // The two paths share only the immutable image.
  std::future<QualifierVerdict> qualifier;
  const bool early = opts.wiring == EdgeWiring::recompute;
  if (early) {
    qualifier = std::async(opts.concurrent ? std::launch::async : std::launch::deferred,
                           [&] { return qualify_shape(to_gray(img), qcfg); });
  }
  const ForwardResult fr = forward(net, weights, input, plan, opts.forward);
  if (fr.scores.size() != policy.class_names.size()) {
    throw NetworkError("network produces " + std::to_string(fr.scores.size()) +
                       " scores but the policy names " +
                       std::to_string(policy.class_names.size()) + " classes");
  }

  QualifiedClassification out;
  out.verdict = early ? qualifier.get() : qualify_edges(shared_edges(net, fr, opts.sobel_filter), qcfg);
  out.scores = fr.scores;
  out.class_id = static_cast<std::size_t>(
      std::max_element(fr.scores.begin(), fr.scores.end()) - fr.scores.begin());
  out.class_name = policy.class_names[out.class_id];
  out.score = fr.scores[out.class_id];
  out.reliability = fr.reliability;
  out.qualified = qualification_status(policy.marked(out.class_id), out.verdict.accepted,
                                       fr.reliability.any_failure);
  return out;
}

}  // namespace relconv
