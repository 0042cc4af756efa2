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

// Synthetic test imagery: one filled, aliased shape centred on a square canvas.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "relconv/image.hpp"

namespace relconv {

enum class ShapeKind { octagon, circle, square, triangle, hexagon };

std::string to_string(ShapeKind k);
ShapeKind parse_shape_kind(const std::string& s);

/// Number of polygon sides, or 0 for the circle.
std::size_t side_count(ShapeKind k);

struct ShapeSpec {
  ShapeKind kind = ShapeKind::octagon;
  std::size_t canvas = 227;
  double radius = 80.0;        // circumradius for polygons
  double rotation_deg = 0.0;
  // Flat RGB fill on a white background (P6); gray 255 on black (P5) when unset.
  std::optional<std::array<std::uint8_t, 3>> color;
};

/// Pixels whose centre lies inside the shape are foreground. Throws
/// std::invalid_argument when the shape does not fit with a 2-pixel margin.
Image8 generate_shape(const ShapeSpec& spec);

/// Exact area of the ideal shape.
double analytic_area(ShapeKind kind, double radius);

}  // namespace relconv
