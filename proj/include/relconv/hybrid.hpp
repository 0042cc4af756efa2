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

// CNN classification gated by the shape qualifier for safety-relevant classes.

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "relconv/image.hpp"
#include "relconv/network.hpp"
#include "relconv/shape_qualifier.hpp"

namespace relconv {

struct SafetyPolicy {
  std::vector<std::string> class_names;
  std::map<std::string, bool> requires_qualification;  // by class name

  bool marked(std::size_t class_id) const;
  /// At least one class marked, every named class exists. Throws std::invalid_argument.
  void validate() const;

  nlohmann::json to_json() const;
  static SafetyPolicy from_json(const nlohmann::json& j);
  static SafetyPolicy load(const std::filesystem::path& path);

  /// stop (marked), parking_prohibition, yield, speed_limit.
  static SafetyPolicy traffic_signs();
};

enum class Qualification { confirmed, contradicted, not_required };

std::string to_string(Qualification q);

/// Combination rule: unmarked classes need no qualification; for a marked
/// class a DCNN kernel failure or a rejected verdict contradicts it.
Qualification qualification_status(bool marked, bool verdict_accepted, bool dcnn_failed);

/// Where the qualifier takes its edge image from.
enum class EdgeWiring {
  recompute,  // full-resolution Sobel on the input image
  shared,     // |feature map| of the Sobel-initialised filter in the first conv layer
};

std::string to_string(EdgeWiring w);
EdgeWiring parse_edge_wiring(const std::string& s);

struct ClassifyOptions {
  ForwardOptions forward{};
  EdgeWiring wiring = EdgeWiring::recompute;
  std::size_t sobel_filter = 0;  // filter index used by the shared wiring
  bool concurrent = true;        // run the qualifier beside the CNN
};

struct QualifiedClassification {
  std::size_t class_id = 0;
  std::string class_name;
  float score = 0.0f;
  std::vector<float> scores;
  Qualification qualified = Qualification::not_required;
  LayerReport reliability;
  QualifierVerdict verdict;

  nlohmann::json to_json() const;
};

/// Runs the CNN (with `plan` injected into its reliable prefix) and the
/// qualifier on the same image and combines them per the policy.
QualifiedClassification classify_qualified(const NetworkSpec& net, const WeightStore& weights,
                                           const Image8& img, const SafetyPolicy& policy,
                                           const QualifierConfig& qcfg, const FaultPlan& plan = {},
                                           const ClassifyOptions& opts = {});

/// Network input tensor for an image: raw 0..255 values, gray expanded to the
/// network's channel count. Throws NetworkError on size mismatch.
Tensor<float> network_input(const NetworkSpec& net, const Image8& img);

}  // namespace relconv
