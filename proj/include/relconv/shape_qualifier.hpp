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

// Deterministic shape qualifier: Sobel edges, outer contour, centroid-distance
// (radial) series, SAX word, and a bounded MINDIST match against a reference.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "relconv/image.hpp"
#include "relconv/qualified_arith.hpp"
#include "relconv/reliable_conv.hpp"

namespace relconv {

/// Raised by pipeline stages; qualify_shape turns it into a reject verdict.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Closed boundary; the last point connects back to the first.
struct Contour {
  std::vector<Point> points;
};

struct SobelResult {
  GrayImage gx;
  GrayImage gy;
  GrayImage magnitude;
};

/// 3x3 Sobel gradients. gx uses [[-1,0,1],[-2,0,2],[-1,0,1]], gy its
/// transpose; the one-pixel border is zero. Throws ShapeError below 3x3.
SobelResult sobel(const GrayImage& img);

/// Sobel through the qualified convolution (gx, gy as two 3x3 filters).
/// Failed kernels leave 0 in their pixel and are listed in `report`.
SobelResult sobel_reliable(const GrayImage& img, Variant variant, const FaultPlan& plan = {},
                           LayerReport* report = nullptr);

/// Otsu's threshold over a 256-bin histogram spanning [0, max].
double otsu_threshold(const GrayImage& img);

/// Outer boundary of the largest 8-connected component of (img > threshold),
/// Moore-neighbour traced and oriented to positive signed area. Throws
/// ShapeError("no shape") when the mask is empty.
Contour extract_contour(const GrayImage& img, double threshold);

/// Signed shoelace area (positive = counter-clockwise in x-right, y-up axes).
double signed_area(const Contour& c);

/// Area centroid of the contour polygon. Throws ShapeError on zero area.
Point centroid(const Contour& c);

bool contains(const Contour& c, Point p);

/// Distance from `center` to the contour along rays at angles 2*pi*j/n
/// (nearest crossing). Throws ShapeError when the center is outside.
std::vector<double> radial_series(const Contour& c, Point center, std::size_t n);

struct ZNormalized {
  std::vector<double> values;
  bool degenerate = false;
};

/// (s - mean) / stddev with the population deviation; all zeros and the
/// degenerate flag when stddev < eps.
ZNormalized znorm(std::span<const double> s, double eps = 1e-9);

/// Piecewise aggregate approximation into w frames. Samples straddling a frame
/// boundary contribute proportionally to their overlap.
std::vector<double> paa(std::span<const double> s, std::size_t w);

/// a-1 standard-normal quantiles Phi^-1(i/a), i = 1..a-1.
std::vector<double> sax_breakpoints(std::size_t alphabet);

struct SaxWord {
  std::string symbols;  // 'a' + index
  std::size_t alphabet = 0;

  std::size_t size() const { return symbols.size(); }
  std::size_t index(std::size_t i) const { return static_cast<std::size_t>(symbols[i] - 'a'); }
  SaxWord rotated(std::size_t shift) const;

  friend bool operator==(const SaxWord&, const SaxWord&) = default;
};

/// Symbol index = number of breakpoints strictly below the coefficient.
SaxWord sax_word(std::span<const double> coefficients, std::size_t alphabet);

SaxWord parse_sax_word(const std::string& symbols, std::size_t alphabet);

/// MINDIST lower bound for series of original length n. Throws
/// std::invalid_argument on mismatched word length or alphabet.
double word_distance(const SaxWord& a, const SaxWord& b, std::size_t n);

/// Vertices of a regular polygon; vertex i sits at angle rotation + pi/sides + 2*pi*i/sides
/// (a flat top edge at zero rotation for even side counts).
Contour regular_polygon(std::size_t sides, double circumradius, double rotation_rad,
                        Point center);

struct QualifierConfig {
  std::size_t samples = 128;     // N
  std::size_t word_length = 16;  // w
  std::size_t alphabet = 4;      // a
  // A-priori MINDIST bound T. With N=128, w=16, a=4 the distance takes values
  // sqrt(8 * 0.455 * k); square, hexagon and triangle never fall below k=4
  // (3.8155) on the generator sweep, octagons sit at 0.
  double threshold = 3.5;
  // Series whose coefficient of variation is below this are treated as flat
  // (disc-like) and rejected. Pixelated discs measure <= 0.009 at radius 30,
  // octagons >= 0.020.
  double min_variation = 0.014;
  std::optional<double> edge_threshold;  // Otsu when unset
  std::optional<SaxWord> reference;      // analytic octagon when unset
  // Run the Sobel stage through the qualified convolution; plain when unset.
  // A failed edge kernel rejects the shape.
  std::optional<Variant> edge_variant;

  void validate() const;
};

/// SAX word of the analytic regular octagon under `cfg`.
SaxWord octagon_reference(const QualifierConfig& cfg);

/// Intermediate products of one qualifier run, for diagnostics and tests.
struct ShapeSignature {
  Contour contour;
  Point center;
  std::vector<double> radial;
  ZNormalized normalized;
  std::vector<double> coefficients;
  SaxWord word;
  double variation = 0.0;  // stddev / mean of the radial series
  bool flat = false;
};

ShapeSignature shape_signature(const Contour& contour, const QualifierConfig& cfg);

struct QualifierVerdict {
  bool accepted = false;
  double distance = 0.0;
  std::size_t rotation_shift = 0;
  std::string reason;
  std::string word;
  std::string reference;

  nlohmann::json to_json() const;
  static QualifierVerdict from_json(const nlohmann::json& j);
};

/// Best circular alignment of `word` against `reference`.
struct WordMatch {
  double distance = 0.0;
  std::size_t shift = 0;
};
WordMatch match_rotations(const SaxWord& word, const SaxWord& reference, std::size_t n);

/// Full qualifier on a gray image. Stage failures become rejections.
QualifierVerdict qualify_shape(const GrayImage& img, const QualifierConfig& cfg = {});

/// Qualifier on a precomputed edge-strength image (skips the Sobel stage).
QualifierVerdict qualify_edges(const GrayImage& edges, const QualifierConfig& cfg = {});

/// Local maxima of a circular series (plateaus count once).
std::size_t count_circular_maxima(std::span<const double> s);

}  // namespace relconv
