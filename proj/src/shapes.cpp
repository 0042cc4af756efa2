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

#include "relconv/shapes.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "relconv/shape_qualifier.hpp"

namespace relconv {

std::string to_string(ShapeKind k) {
  switch (k) {
    case ShapeKind::octagon: return "octagon";
    case ShapeKind::circle: return "circle";
    case ShapeKind::square: return "square";
    case ShapeKind::triangle: return "triangle";
    case ShapeKind::hexagon: return "hexagon";
  }
  return "?";
}

ShapeKind parse_shape_kind(const std::string& s) {
  for (ShapeKind k : {ShapeKind::octagon, ShapeKind::circle, ShapeKind::square,
                      ShapeKind::triangle, ShapeKind::hexagon}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown shape: " + s);
}

std::size_t side_count(ShapeKind k) {
  switch (k) {
    case ShapeKind::octagon: return 8;
    case ShapeKind::circle: return 0;
    case ShapeKind::square: return 4;
    case ShapeKind::triangle: return 3;
    case ShapeKind::hexagon: return 6;
  }
  return 0;
}

double analytic_area(ShapeKind kind, double radius) {
  const std::size_t n = side_count(kind);
  if (n == 0) return std::numbers::pi * radius * radius;
  return 0.5 * static_cast<double>(n) * radius * radius *
         std::sin(2.0 * std::numbers::pi / static_cast<double>(n));
}

Image8 generate_shape(const ShapeSpec& spec) {
  if (!(spec.radius > 0.0)) throw std::invalid_argument("shape radius must be positive");
  const double c = static_cast<double>(spec.canvas - 1) / 2.0;
  if (spec.canvas < 8 || spec.radius > c - 2.0) {
    throw std::invalid_argument("shape exceeds canvas");
  }
  const Point center{c, c};
  const std::size_t sides = side_count(spec.kind);
  const Contour poly =
      sides == 0 ? Contour{}
                 : regular_polygon(sides, spec.radius, spec.rotation_deg * std::numbers::pi / 180.0,
                                   center);

  const bool rgb = spec.color.has_value();
  Image8 img(spec.canvas, spec.canvas, rgb ? 3 : 1, rgb ? 255 : 0);
  for (std::size_t y = 0; y < spec.canvas; ++y) {
    for (std::size_t x = 0; x < spec.canvas; ++x) {
      const Point p{static_cast<double>(x), static_cast<double>(y)};
      const bool in = sides == 0 ? std::hypot(p.x - c, p.y - c) <= spec.radius : contains(poly, p);
      if (!in) continue;
      if (rgb) {
        for (std::size_t ch = 0; ch < 3; ++ch) img.at(x, y, ch) = (*spec.color)[ch];
      } else {
        img.at(x, y) = 255;
      }
    }
  }
  return img;
}

}  // namespace relconv
