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

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <utility>
#include <vector>

#include "relconv/rng.hpp"
#include "relconv/shape_qualifier.hpp"
#include "relconv/shapes.hpp"

using namespace relconv;
using std::numbers::pi;

namespace {

// Standard-normal inverse CDF by bisection on the complementary error function.
double normal_quantile_oracle(double p) {
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Radius of a regular polygon along angle theta, from its apothem and the
// angle to the nearest edge normal.
double polygon_radius_oracle(std::size_t sides, double R, double rotation, double theta) {
  const double step = 2.0 * pi / static_cast<double>(sides);
  const double apothem = R * std::cos(pi / static_cast<double>(sides));
  // Edge normals sit midway between vertices, i.e. at rotation + k*step.
  double rel = std::fmod(theta - rotation, step);
  if (rel < 0) rel += step;
  if (rel > step / 2) rel -= step;
  return apothem / std::cos(rel);
}

GrayImage mask_image(std::size_t w, std::size_t h,
                     const std::vector<std::pair<std::size_t, std::size_t>>& on) {
  GrayImage g(w, h);
  for (auto [x, y] : on) g.at(x, y) = 1.0f;
  return g;
}

GrayImage rect_mask(std::size_t w, std::size_t h, std::size_t x0, std::size_t y0,
                    std::size_t rw, std::size_t rh) {
  GrayImage g(w, h);
  for (std::size_t y = y0; y < y0 + rh; ++y) {
    for (std::size_t x = x0; x < x0 + rw; ++x) g.at(x, y) = 1.0f;
  }
  return g;
}

GrayImage generated(ShapeKind kind, double radius, double rotation_deg) {
  ShapeSpec spec;
  spec.kind = kind;
  spec.radius = radius;
  spec.rotation_deg = rotation_deg;
  return to_gray(generate_shape(spec));
}

std::vector<double> random_series(CounterRng& rng, std::size_t n) {
  std::vector<double> s(n);
  double walk = 0.0;
  for (auto& v : s) {
    walk += rng.uniform(-1.0, 1.0);
    v = walk;
  }
  return s;
}

}  // namespace

TEST_CASE("sobel: constant image has zero gradient") {
  const auto r = sobel(GrayImage(6, 5, 0.7f));
  for (float v : r.magnitude.pixels) CHECK(v == 0.0f);
  for (float v : r.gx.pixels) CHECK(v == 0.0f);
  for (float v : r.gy.pixels) CHECK(v == 0.0f);
}

TEST_CASE("sobel: vertical step edge") {
  GrayImage g(10, 6);
  for (std::size_t y = 0; y < 6; ++y) {
    for (std::size_t x = 5; x < 10; ++x) g.at(x, y) = 1.0f;
  }
  const auto r = sobel(g);
  for (std::size_t y = 1; y < 5; ++y) {
    CHECK(r.gx.at(4, y) == 4.0f);
    CHECK(r.gx.at(5, y) == 4.0f);
    CHECK(r.gx.at(2, y) == 0.0f);
    CHECK(r.gx.at(7, y) == 0.0f);
    for (std::size_t x = 0; x < 10; ++x) CHECK(r.gy.at(x, y) == 0.0f);
  }
  for (std::size_t x = 0; x < 10; ++x) {
    CHECK(r.magnitude.at(x, 0) == 0.0f);
    CHECK(r.magnitude.at(x, 5) == 0.0f);
  }
}

TEST_CASE("sobel: transposing swaps gx and gy") {
  CounterRng rng(5, 0);
  GrayImage g(7, 9), t(9, 7);
  for (std::size_t y = 0; y < 9; ++y) {
    for (std::size_t x = 0; x < 7; ++x) {
      g.at(x, y) = static_cast<float>(rng.uniform());
      t.at(y, x) = g.at(x, y);
    }
  }
  const auto a = sobel(g), b = sobel(t);
  for (std::size_t y = 0; y < 9; ++y) {
    for (std::size_t x = 0; x < 7; ++x) {
      CHECK(a.gx.at(x, y) == doctest::Approx(b.gy.at(y, x)));
      CHECK(a.gy.at(x, y) == doctest::Approx(b.gx.at(y, x)));
    }
  }
}

TEST_CASE("sobel: images below 3x3 are rejected") {
  CHECK_THROWS_AS(sobel(GrayImage(2, 5)), ShapeError);
  CHECK_THROWS_AS(sobel(GrayImage(5, 2)), ShapeError);
}

TEST_CASE("otsu separates a bimodal image") {
  GrayImage g(20, 20, 0.1f);
  for (std::size_t y = 5; y < 15; ++y) {
    for (std::size_t x = 5; x < 15; ++x) g.at(x, y) = 0.9f;
  }
  const double t = otsu_threshold(g);
  CHECK(t >= 0.1);
  CHECK(t < 0.9);
  CHECK(otsu_threshold(GrayImage(4, 4)) == 0.0);
}

TEST_CASE("extract_contour: 10x10 square has 36 boundary pixels") {
  const auto contour = extract_contour(rect_mask(16, 16, 3, 3, 10, 10), 0.5);
  CHECK(contour.points.size() == 36);
  // Brute force: foreground pixels with a 4-neighbour outside the square.
  std::set<std::pair<int, int>> expected;
  for (int y = 3; y < 13; ++y) {
    for (int x = 3; x < 13; ++x) {
      if (x == 3 || x == 12 || y == 3 || y == 12) expected.insert({x, y});
    }
  }
  std::set<std::pair<int, int>> traced;
  for (const auto& p : contour.points) traced.insert({static_cast<int>(p.x), static_cast<int>(p.y)});
  CHECK(traced == expected);
  CHECK(signed_area(contour) > 0.0);
}

TEST_CASE("extract_contour: empty mask and largest component") {
  CHECK_THROWS_WITH_AS(extract_contour(GrayImage(8, 8), 0.5), "no shape", ShapeError);

  // 5x10 (area 50) and 3x3 (area 9) blocks.
  GrayImage g = rect_mask(30, 30, 2, 2, 10, 5);
  for (std::size_t y = 20; y < 23; ++y) {
    for (std::size_t x = 20; x < 23; ++x) g.at(x, y) = 1.0f;
  }
  const auto c = extract_contour(g, 0.5);
  for (const auto& p : c.points) {
    CHECK(p.x >= 2);
    CHECK(p.x < 12);
    CHECK(p.y >= 2);
    CHECK(p.y < 7);
  }
  CHECK(c.points.size() == 26);
}

TEST_CASE("extract_contour: single pixel and diagonal chain") {
  const auto one = extract_contour(mask_image(5, 5, {{2, 2}}), 0.5);
  CHECK(one.points.size() == 1);
  const auto chain = extract_contour(mask_image(6, 6, {{1, 1}, {2, 2}, {3, 3}}), 0.5);
  // Out along the chain and back: 1,1 2,2 3,3 2,2.
  CHECK(chain.points.size() == 4);
}

TEST_CASE("extract_contour: traced rings on generated shapes") {
  CounterRng rng(11, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const auto kind = static_cast<ShapeKind>(trial % 5);
    const auto img = generated(kind, rng.uniform(20.0, 100.0), rng.uniform(0.0, 90.0));
    const auto c = extract_contour(img, 0.5);
    REQUIRE(c.points.size() >= 8);
    CHECK(signed_area(c) > 0.0);
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      const auto& p = c.points[i];
      const auto& q = c.points[(i + 1) % c.points.size()];
      // Closed 8-connected chain.
      CHECK(std::max(std::abs(p.x - q.x), std::abs(p.y - q.y)) == 1.0);
      const auto x = static_cast<std::size_t>(p.x), y = static_cast<std::size_t>(p.y);
      REQUIRE(img.at(x, y) > 0.5f);
      const bool on_edge = img.at(x - 1, y) < 0.5f || img.at(x + 1, y) < 0.5f ||
                           img.at(x, y - 1) < 0.5f || img.at(x, y + 1) < 0.5f;
      CHECK(on_edge);
    }
    // Convex shapes: every pixel appears once.
    std::set<std::pair<double, double>> unique;
    for (const auto& p : c.points) unique.insert({p.x, p.y});
    CHECK(unique.size() == c.points.size());
  }
}

TEST_CASE("centroid") {
  CHECK(centroid(Contour{{{0, 0}, {10, 0}, {10, 10}, {0, 10}}}) == Point{5, 5});
  const auto l = centroid(Contour{{{0, 0}, {1, 0}, {2, 0}, {2, 1}, {1, 1}, {0, 1}}});
  CHECK(l.x == doctest::Approx(1.0));
  CHECK(l.y == doctest::Approx(0.5));
  const auto oct = centroid(regular_polygon(8, 30.0, 0.3, {50, 50}));
  CHECK(oct.x == doctest::Approx(50.0).epsilon(1e-9));
  CHECK(oct.y == doctest::Approx(50.0).epsilon(1e-9));
  // Clockwise order gives the same point.
  const auto cw = centroid(Contour{{{0, 0}, {0, 1}, {2, 1}, {2, 0}}});
  CHECK(cw.x == doctest::Approx(1.0));
  CHECK(cw.y == doctest::Approx(0.5));
  CHECK_THROWS_AS(centroid(Contour{{{0, 0}, {1, 1}, {2, 2}}}), ShapeError);
}

TEST_CASE("radial_series: regular polygons against the apothem oracle") {
  const std::size_t n = 128;
  for (std::size_t sides : {3u, 4u, 6u, 8u}) {
    for (double rot : {0.0, 0.1, 0.4}) {
      const auto poly = regular_polygon(sides, 70.0, rot, {0, 0});
      const auto s = radial_series(poly, {0, 0}, n);
      for (std::size_t j = 0; j < n; ++j) {
        const double theta = 2.0 * pi * static_cast<double>(j) / static_cast<double>(n);
        CHECK(s[j] == doctest::Approx(polygon_radius_oracle(sides, 70.0, rot, theta)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("radial_series: octagon and square signatures") {
  const double R = 80.0;
  const auto oct = radial_series(regular_polygon(8, R, 0.05, {0, 0}), {0, 0}, 128);
  const double hi = *std::max_element(oct.begin(), oct.end());
  const double lo = *std::min_element(oct.begin(), oct.end());
  CHECK(hi <= R + 1e-9);
  CHECK(lo >= R * std::cos(pi / 8) - 1e-9);
  CHECK(hi / lo == doctest::Approx(1.0 / std::cos(pi / 8)).epsilon(0.02));
  CHECK(count_circular_maxima(oct) == 8);

  const double half = 40.0;
  const auto sq = radial_series(regular_polygon(4, half * std::sqrt(2.0), 0.0, {0, 0}), {0, 0}, 128);
  CHECK(*std::min_element(sq.begin(), sq.end()) == doctest::Approx(half));
  CHECK(*std::max_element(sq.begin(), sq.end()) == doctest::Approx(half * std::sqrt(2.0)));
  CHECK(count_circular_maxima(sq) == 4);
}

TEST_CASE("radial_series: pixel circle and octagon contours") {
  const auto circle = extract_contour(generated(ShapeKind::circle, 80.0, 0.0), 0.5);
  const auto s = radial_series(circle, centroid(circle), 128);
  for (double v : s) CHECK(std::abs(v - 80.0) <= 1.0);

  const auto oct = extract_contour(generated(ShapeKind::octagon, 90.0, 10.0), 0.5);
  const auto r = radial_series(oct, centroid(oct), 128);
  const double ratio = *std::max_element(r.begin(), r.end()) / *std::min_element(r.begin(), r.end());
  CHECK(ratio == doctest::Approx(1.0 / std::cos(pi / 8)).epsilon(0.02));
}

TEST_CASE("radial_series: center outside is an error") {
  const auto sq = Contour{{{0, 0}, {10, 0}, {10, 10}, {0, 10}}};
  CHECK_THROWS_AS(radial_series(sq, {20, 5}, 16), ShapeError);
  CHECK_NOTHROW(radial_series(sq, {5, 5}, 16));
}

TEST_CASE("count_circular_maxima") {
  CHECK(count_circular_maxima(std::vector<double>{0, 1, 0, 1}) == 2);
  CHECK(count_circular_maxima(std::vector<double>{1, 1, 1}) == 0);
  CHECK(count_circular_maxima(std::vector<double>{0, 2, 2, 0, 3}) == 2);
  // Peak wrapping around the end.
  CHECK(count_circular_maxima(std::vector<double>{5, 1, 2, 1, 4}) == 2);
}

TEST_CASE("znorm") {
  const auto z = znorm(std::vector<double>{1, 2, 3});
  CHECK_FALSE(z.degenerate);
  CHECK(z.values[0] == doctest::Approx(-std::sqrt(1.5)));
  CHECK(z.values[1] == doctest::Approx(0.0));
  CHECK(z.values[2] == doctest::Approx(std::sqrt(1.5)));

  const auto c = znorm(std::vector<double>(10, 4.2));
  CHECK(c.degenerate);
  for (double v : c.values) CHECK(v == 0.0);

  CounterRng rng(3, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_series(rng, 2 + static_cast<std::size_t>(rng.uniform_int(0, 200)));
    const auto a = znorm(s);
    REQUIRE_FALSE(a.degenerate);
    double mean = 0, var = 0;
    for (double v : a.values) mean += v;
    mean /= static_cast<double>(s.size());
    for (double v : a.values) var += (v - mean) * (v - mean);
    CHECK(std::abs(mean) < 1e-6);
    CHECK(std::abs(std::sqrt(var / static_cast<double>(s.size())) - 1.0) < 1e-6);
    const auto b = znorm(a.values);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(a.values[i] - b.values[i]) < 1e-9);
  }
}

TEST_CASE("paa") {
  const auto even = paa(std::vector<double>{1, 2, 3, 4}, 2);
  CHECK(even == std::vector<double>{1.5, 3.5});
  const auto frac = paa(std::vector<double>{1, 2, 3}, 2);
  CHECK(frac[0] == doctest::Approx(4.0 / 3.0));
  CHECK(frac[1] == doctest::Approx(8.0 / 3.0));
  CHECK_THROWS_AS(paa(std::vector<double>{1, 2}, 0), std::invalid_argument);
  CHECK_THROWS_AS(paa(std::vector<double>{1, 2}, 3), std::invalid_argument);

  CounterRng rng(4, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform_int(0, 150));
    const auto s = random_series(rng, n);
    CHECK(paa(s, n) == s);
    const std::size_t w = 1 + static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    const auto p = paa(s, w);
    double ms = 0, mp = 0;
    for (double v : s) ms += v;
    for (double v : p) mp += v;
    CHECK(std::abs(ms / static_cast<double>(n) - mp / static_cast<double>(w)) < 1e-9);
  }
}

TEST_CASE("sax breakpoints match the inverse normal CDF") {
  for (std::size_t a = 2; a <= 20; ++a) {
    const auto beta = sax_breakpoints(a);
    REQUIRE(beta.size() == a - 1);
    for (std::size_t i = 1; i < a; ++i) {
      CHECK(beta[i - 1] ==
            doctest::Approx(normal_quantile_oracle(static_cast<double>(i) / static_cast<double>(a)))
                .epsilon(1e-9));
    }
  }
  const auto b4 = sax_breakpoints(4);
  CHECK(b4[0] == doctest::Approx(-0.6745).epsilon(1e-4));
  CHECK(b4[1] == doctest::Approx(0.0));
  CHECK(b4[2] == doctest::Approx(0.6745).epsilon(1e-4));
  const auto b3 = sax_breakpoints(3);
  CHECK(b3[0] == doctest::Approx(-0.4307).epsilon(1e-4));
  CHECK(b3[1] == doctest::Approx(0.4307).epsilon(1e-4));
  CHECK_THROWS_AS(sax_breakpoints(1), std::invalid_argument);
  CHECK_THROWS_AS(sax_breakpoints(21), std::invalid_argument);
}

TEST_CASE("sax_word") {
  CHECK(sax_word(std::vector<double>{-1, -1, 1, 1}, 2).symbols == "aabb");
  // Strictly-below rule: a coefficient equal to a breakpoint stays in the lower cell.
  CHECK(sax_word(std::vector<double>{-2, 0, 0.5, 2}, 4).symbols == "abcd");
  CHECK(parse_sax_word("abcd", 4).size() == 4);
  CHECK_THROWS_AS(parse_sax_word("abce", 4), std::invalid_argument);
  CHECK(parse_sax_word("abcd", 4).rotated(1).symbols == "bcda");
}

TEST_CASE("word_distance examples") {
  const auto w = parse_sax_word("abcdabcd", 4);
  CHECK(word_distance(w, w, 128) == 0.0);
  CHECK(word_distance(parse_sax_word("abbb", 4), parse_sax_word("dbbb", 4), 4) ==
        doctest::Approx(1.349).epsilon(1e-3));
  CHECK(word_distance(parse_sax_word("aaaa", 4), parse_sax_word("bbbb", 4), 4) == 0.0);
  CHECK_THROWS_AS(word_distance(parse_sax_word("ab", 4), parse_sax_word("abc", 4), 4),
                  std::invalid_argument);
  CHECK_THROWS_AS(word_distance(parse_sax_word("ab", 4), parse_sax_word("ab", 3), 4),
                  std::invalid_argument);
}

TEST_CASE("word_distance: metric properties and lower bound on random pairs") {
  CounterRng rng(17, 0);
  const std::size_t n = 128, w = 16, a = 4;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto s1 = znorm(random_series(rng, n)).values;
    const auto s2 = znorm(random_series(rng, n)).values;
    const auto w1 = sax_word(paa(s1, w), a), w2 = sax_word(paa(s2, w), a);
    const double d = word_distance(w1, w2, n);
    double euclid = 0.0;
    for (std::size_t i = 0; i < n; ++i) euclid += (s1[i] - s2[i]) * (s1[i] - s2[i]);
    CHECK(d >= 0.0);
    CHECK(d == word_distance(w2, w1, n));
    CHECK(d <= std::sqrt(euclid) + 1e-9);
    CHECK(word_distance(w1, w1, n) == 0.0);
  }
}

TEST_CASE("polygon rotation by 2*pi/N shifts the radial series") {
  QualifierConfig cfg;
  const auto ref = octagon_reference(cfg);
  for (std::size_t sides : {4u, 8u}) {
    const auto base = shape_signature(regular_polygon(sides, 80, 0.2, {0, 0}), cfg);
    const bool base_ok = match_rotations(base.word, ref, cfg.samples).distance <= cfg.threshold;
    for (std::size_t k : {1u, 5u, 13u, 64u}) {
      const double rot = 0.2 + 2.0 * pi * static_cast<double>(k) / 128.0;
      const auto sig = shape_signature(regular_polygon(sides, 80, rot, {0, 0}), cfg);
      for (std::size_t j = 0; j < 128; ++j) {
        CHECK(sig.radial[(j + k) % 128] == doctest::Approx(base.radial[j]).epsilon(1e-9));
      }
      const bool ok = match_rotations(sig.word, ref, cfg.samples).distance <= cfg.threshold;
      CHECK(ok == base_ok);
    }
    CHECK(base_ok == (sides == 8));
  }
}

TEST_CASE("octagon reference word") {
  const auto ref = octagon_reference(QualifierConfig{});
  CHECK(ref.size() == 16);
  CHECK(ref.alphabet == 4);
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(ref.index(i) < 4);
  // Period-two pattern: one vertex and one edge midpoint per pair of frames.
  CHECK(ref.rotated(2) == ref);
}

TEST_CASE("qualify_shape end to end on generated shapes") {
  for (double rot : {0.0, 7.0, 22.5, 33.0, 45.0}) {
    const auto v = qualify_shape(generated(ShapeKind::octagon, 80.0, rot));
    CHECK_MESSAGE(v.accepted, "rotation " << rot << " reason " << v.reason);
    CHECK(v.reason == "accepted");
  }
  const auto circle = qualify_shape(generated(ShapeKind::circle, 80.0, 0.0));
  CHECK_FALSE(circle.accepted);
  CHECK(circle.reason == "flat radial series");
  for (auto kind : {ShapeKind::square, ShapeKind::triangle, ShapeKind::hexagon}) {
    for (double rot : {0.0, 20.0, 41.0}) {
      const auto v = qualify_shape(generated(kind, 80.0, rot));
      CHECK_FALSE(v.accepted);
      CHECK(v.distance > QualifierConfig{}.threshold);
      CHECK(v.reason == "distance above threshold");
    }
  }
}

TEST_CASE("qualify_shape: scale invariance over 0.5x to 1.5x") {
  for (double r : {40.0, 55.0, 70.0, 85.0, 100.0, 110.0}) {
    CHECK(qualify_shape(generated(ShapeKind::octagon, r, 12.0)).accepted);
    CHECK_FALSE(qualify_shape(generated(ShapeKind::square, r, 12.0)).accepted);
    CHECK_FALSE(qualify_shape(generated(ShapeKind::hexagon, r, 12.0)).accepted);
  }
}

TEST_CASE("qualify_shape: color input and stage failures") {
  ShapeSpec spec;
  spec.color = std::array<std::uint8_t, 3>{200, 20, 30};
  CHECK(qualify_shape(to_gray(generate_shape(spec))).accepted);

  const auto blank = qualify_shape(GrayImage(50, 50, 0.3f));
  CHECK_FALSE(blank.accepted);
  CHECK(blank.reason == "no shape");

  const auto tiny = qualify_shape(GrayImage(1, 1));
  CHECK_FALSE(tiny.accepted);
  CHECK_FALSE(tiny.reason.empty());
}

TEST_CASE("qualifier config validation") {
  QualifierConfig cfg;
  cfg.word_length = 200;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.alphabet = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.reference = parse_sax_word("abc", 4);
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.reference = parse_sax_word("bcbcbcbcbcbcbcbc", 4);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("verdict JSON round trip") {
  const auto v = qualify_shape(generated(ShapeKind::square, 70.0, 5.0));
  const auto j = v.to_json();
  CHECK(j.at("schema_version") == 1);
  const auto back = QualifierVerdict::from_json(j);
  CHECK(back.accepted == v.accepted);
  CHECK(back.distance == v.distance);
  CHECK(back.rotation_shift == v.rotation_shift);
  CHECK(back.reason == v.reason);
  CHECK(back.word == v.word);
  CHECK(back.reference == v.reference);
}

TEST_CASE("generator: octagon area and canvas bounds") {
  const double R = 80.0;
  const auto img = generate_shape({});
  CHECK(img.width == 227);
  CHECK(img.channels == 1);
  std::size_t count = 0;
  for (auto b : img.data) count += b == 255;
  const double side = 2.0 * R * std::sin(pi / 8);
  const double area = 2.0 * (1.0 + std::sqrt(2.0)) * side * side;
  CHECK(analytic_area(ShapeKind::octagon, R) == doctest::Approx(area));
  CHECK(std::abs(static_cast<double>(count) - area) / area < 0.02);

  ShapeSpec big;
  big.radius = 120.0;
  CHECK_THROWS_AS(generate_shape(big), std::invalid_argument);

  const auto pnm = decode_pnm(encode_pnm(img));
  CHECK(pnm.data == img.data);
  CHECK(parse_shape_kind("hexagon") == ShapeKind::hexagon);
  CHECK_THROWS_AS(parse_shape_kind("pentagon"), std::invalid_argument);
}

TEST_CASE("generator: pixel counts track analytic areas for every kind") {
  for (auto kind : {ShapeKind::octagon, ShapeKind::circle, ShapeKind::square, ShapeKind::triangle,
                    ShapeKind::hexagon}) {
    ShapeSpec spec;
    spec.kind = kind;
    spec.radius = 90.0;
    spec.rotation_deg = 13.0;
    const auto img = generate_shape(spec);
    std::size_t count = 0;
    for (auto b : img.data) count += b == 255;
    const double area = analytic_area(kind, 90.0);
    CHECK(std::abs(static_cast<double>(count) - area) / area < 0.02);
  }
}
