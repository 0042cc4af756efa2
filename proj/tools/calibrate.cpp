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

// Sweeps the synthetic generator and prints, per shape kind, the range of
// rotation-matched distances to the octagon reference and the flatness flag.

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>

#include <CLI11.hpp>

#include "relconv/rng.hpp"
#include "relconv/shape_qualifier.hpp"
#include "relconv/shapes.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qualifier threshold calibration sweep"};
  relconv::QualifierConfig cfg;
  std::size_t trials = 400;
  std::uint64_t seed = 7;
  double min_radius = 60.0, max_radius = 100.0;
  app.add_option("--samples", cfg.samples);
  app.add_option("--word-length", cfg.word_length);
  app.add_option("--alphabet", cfg.alphabet);
  app.add_option("--min-variation", cfg.min_variation);
  app.add_option("--trials", trials);
  app.add_option("--seed", seed);
  app.add_option("--min-radius", min_radius);
  app.add_option("--max-radius", max_radius);
  CLI11_PARSE(app, argc, argv);

  struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    double cv_lo = std::numeric_limits<double>::infinity();
    double cv_hi = 0.0;
    std::size_t flat = 0;
    std::size_t n = 0;
  };
  std::map<std::string, Range> ranges;
  relconv::CounterRng rng(seed, 0);
  const relconv::ShapeKind kinds[] = {relconv::ShapeKind::octagon, relconv::ShapeKind::circle,
                                      relconv::ShapeKind::square, relconv::ShapeKind::triangle,
                                      relconv::ShapeKind::hexagon};
  std::printf("reference %s\n", relconv::octagon_reference(cfg).symbols.c_str());
  for (std::size_t t = 0; t < trials; ++t) {
    relconv::ShapeSpec spec;
    spec.kind = kinds[t % 5];
    spec.rotation_deg = rng.uniform(0.0, 45.0);
    spec.radius = rng.uniform(min_radius, max_radius);
    const auto img = relconv::to_gray(relconv::generate_shape(spec));
    const auto edges = relconv::sobel(img).magnitude;
    const auto contour = relconv::extract_contour(edges, relconv::otsu_threshold(edges));
    const auto sig = relconv::shape_signature(contour, cfg);
    const auto m = relconv::match_rotations(sig.word, relconv::octagon_reference(cfg), cfg.samples);
    auto& r = ranges[relconv::to_string(spec.kind)];
    ++r.n;
    r.cv_lo = std::min(r.cv_lo, sig.variation);
    r.cv_hi = std::max(r.cv_hi, sig.variation);
    if (sig.flat) {
      ++r.flat;
      continue;
    }
    r.lo = std::min(r.lo, m.distance);
    r.hi = std::max(r.hi, m.distance);
  }
  for (const auto& [name, r] : ranges) {
    std::printf("%-9s n=%zu flat=%zu variation=[%.4f, %.4f] distance=[%.4f, %.4f]\n",
                name.c_str(), r.n, r.flat, r.cv_lo, r.cv_hi, r.lo, r.hi);
  }
  return 0;
}
