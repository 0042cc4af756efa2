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
#include <optional>

#include <json.hpp>

#include "relconv/qualified_arith.hpp"

namespace relconv {

struct BenchGeometry {
  std::size_t height = 227;
  std::size_t width = 227;
  std::size_t channels = 3;
  std::size_t filters = 96;
  std::size_t kernel = 11;
  std::size_t stride = 4;
  std::size_t padding = 0;
};

struct BenchReport {
  BenchGeometry geometry;
  Domain domain = Domain::float32;
  std::size_t repeats = 0;
  std::optional<double> single_s;     // median wall time, variant=single
  std::optional<double> redundant_s;  // median wall time, variant=redundant
  std::optional<double> ratio;        // redundant / single

  nlohmann::json to_json() const;
};

/// Times conv2d with the single and redundant variants on seeded random data
/// and an empty fault plan. The first run of each variant is a discarded
/// warmup; the report carries medians over `repeats` timed runs.
/// Throws std::invalid_argument when repeats < 3.
BenchReport run_bench(const BenchGeometry& geometry, std::size_t repeats,
                      Domain domain = Domain::float32, std::uint64_t seed = 1);

}  // namespace relconv
