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

#include "relconv/shape_qualifier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

namespace relconv {

SobelResult sobel(const GrayImage& img) {
  if (img.width < 3 || img.height < 3) throw ShapeError("image too small");
  SobelResult r{GrayImage(img.width, img.height), GrayImage(img.width, img.height),
                GrayImage(img.width, img.height)};
  for (std::size_t y = 1; y + 1 < img.height; ++y) {
    for (std::size_t x = 1; x + 1 < img.width; ++x) {
      const float tl = img.at(x - 1, y - 1), t = img.at(x, y - 1), tr = img.at(x + 1, y - 1);
      const float l = img.at(x - 1, y), rr = img.at(x + 1, y);
      const float bl = img.at(x - 1, y + 1), b = img.at(x, y + 1), br = img.at(x + 1, y + 1);
      const float gx = (tr + 2 * rr + br) - (tl + 2 * l + bl);
      const float gy = (bl + 2 * b + br) - (tl + 2 * t + tr);
      r.gx.at(x, y) = gx;
      r.gy.at(x, y) = gy;
      r.magnitude.at(x, y) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return r;
}

SobelResult sobel_reliable(const GrayImage& img, Variant variant, const FaultPlan& plan,
                           LayerReport* report) {
  if (img.width < 3 || img.height < 3) throw ShapeError("image too small");
  Tensor<float> input({img.height, img.width, 1}, img.pixels);
  Tensor<float> filters({2, 3, 3, 1});
  const float kx[9] = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
  const float ky[9] = {-1, -2, -1, 0, 0, 0, 1, 2, 1};
  for (std::size_t i = 0; i < 9; ++i) {
    filters[i] = kx[i];
    filters[9 + i] = ky[i];
  }
  const auto conv = conv2d(input, filters, ConvConfig{1, 0, variant}, plan);
  if (report) *report = conv.report;
  SobelResult r{GrayImage(img.width, img.height), GrayImage(img.width, img.height),
                GrayImage(img.width, img.height)};
  for (std::size_t y = 1; y + 1 < img.height; ++y) {
    for (std::size_t x = 1; x + 1 < img.width; ++x) {
      const float gx = conv.feature_maps.at(y - 1, x - 1, 0);
      const float gy = conv.feature_maps.at(y - 1, x - 1, 1);
      r.gx.at(x, y) = gx;
      r.gy.at(x, y) = gy;
      r.magnitude.at(x, y) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return r;
}

double otsu_threshold(const GrayImage& img) {
  if (img.empty()) throw ShapeError("empty image");
  const float hi = *std::max_element(img.pixels.begin(), img.pixels.end());
  if (!(hi > 0.0f)) return 0.0;
  constexpr std::size_t kBins = 256;
  std::array<double, kBins> hist{};
  for (float v : img.pixels) {
    const auto bin = static_cast<std::size_t>(std::clamp(v / hi, 0.0f, 1.0f) * (kBins - 1));
    hist[bin] += 1.0;
  }
  const double total = static_cast<double>(img.pixels.size());
  double sum_all = 0.0;
  for (std::size_t i = 0; i < kBins; ++i) sum_all += static_cast<double>(i) * hist[i];

  double w0 = 0.0, sum0 = 0.0, best = -1.0;
  std::size_t best_bin = 0;
  for (std::size_t t = 0; t < kBins; ++t) {
    w0 += hist[t];
    if (w0 == 0.0) continue;
    const double w1 = total - w0;
    if (w1 == 0.0) break;
    sum0 += static_cast<double>(t) * hist[t];
    const double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_bin = t;
    }
  }
  // Pixels strictly above the upper edge of the best bin form the foreground.
  return (static_cast<double>(best_bin) + 1.0) / (kBins - 1) * hi;
}

namespace {

// Clockwise on screen (y down): W, NW, N, NE, E, SE, S, SW.
constexpr std::array<int, 8> kDx{-1, -1, 0, 1, 1, 1, 0, -1};
constexpr std::array<int, 8> kDy{0, -1, -1, -1, 0, 1, 1, 1};

int direction_of(int dx, int dy) {
  for (int d = 0; d < 8; ++d) {
    if (kDx[d] == dx && kDy[d] == dy) return d;
  }
  return -1;
}

}  // namespace

Contour extract_contour(const GrayImage& img, double threshold) {
  const auto w = static_cast<int>(img.width), h = static_cast<int>(img.height);
  std::vector<std::uint8_t> mask(img.pixels.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = img.pixels[i] > threshold;

  // Largest 8-connected component.
  std::vector<int> label(mask.size(), -1);
  int best_label = -1;
  std::size_t best_size = 0, best_start = 0;
  int next_label = 0;
  std::deque<std::size_t> queue;
  for (std::size_t seed = 0; seed < mask.size(); ++seed) {
    if (!mask[seed] || label[seed] >= 0) continue;
    std::size_t count = 0;
    label[seed] = next_label;
    queue.push_back(seed);
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      ++count;
      const int px = static_cast<int>(p % img.width), py = static_cast<int>(p / img.width);
      for (int d = 0; d < 8; ++d) {
        const int nx = px + kDx[d], ny = py + kDy[d];
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const auto q = static_cast<std::size_t>(ny) * img.width + static_cast<std::size_t>(nx);
        if (mask[q] && label[q] < 0) {
          label[q] = next_label;
          queue.push_back(q);
        }
      }
    }
    // Seeds are visited in raster order, so `seed` is the component's first pixel.
    if (count > best_size) {
      best_size = count;
      best_label = next_label;
      best_start = seed;
    }
    ++next_label;
  }
  if (best_label < 0) throw ShapeError("no shape");

  auto inside = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < w && y < h &&
           label[static_cast<std::size_t>(y) * img.width + static_cast<std::size_t>(x)] ==
               best_label;
  };

  // Moore-neighbour tracing from the top-left pixel, whose west neighbour is
  // background. Stops when the first move out of the start pixel repeats.
  const int sx = static_cast<int>(best_start % img.width);
  const int sy = static_cast<int>(best_start / img.width);
  Contour c;
  c.points.push_back({static_cast<double>(sx), static_cast<double>(sy)});

  int cx = sx, cy = sy, back = 0;
  int first_x = -1, first_y = -1;
  const std::size_t limit = 4 * best_size + 16;
  for (std::size_t step = 0; step < limit; ++step) {
    int found = -1;
    for (int i = 0; i < 8; ++i) {
      const int d = (back + i) % 8;
      if (inside(cx + kDx[d], cy + kDy[d])) {
        found = d;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel
    const int nx = cx + kDx[found], ny = cy + kDy[found];
    if (cx == sx && cy == sy) {
      if (first_x < 0) {
        first_x = nx;
        first_y = ny;
      } else if (nx == first_x && ny == first_y) {
        break;
      }
    }
    const int prev = (found + 7) % 8;
    back = direction_of(cx + kDx[prev] - nx, cy + kDy[prev] - ny);
    cx = nx;
    cy = ny;
    if (!(cx == sx && cy == sy)) {
      c.points.push_back({static_cast<double>(cx), static_cast<double>(cy)});
    }
  }
  if (signed_area(c) < 0.0) std::reverse(c.points.begin() + 1, c.points.end());
  return c;
}

double signed_area(const Contour& c) {
  const auto& p = c.points;
  double twice = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point& a = p[i];
    const Point& b = p[(i + 1) % p.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

Point centroid(const Contour& c) {
  const auto& p = c.points;
  if (p.size() < 3) throw ShapeError("degenerate contour");
  double twice_area = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point& a = p[i];
    const Point& b = p[(i + 1) % p.size()];
    const double cross = a.x * b.y - b.x * a.y;
    twice_area += cross;
    cx += (a.x + b.x) * cross;
    cy += (a.y + b.y) * cross;
  }
  if (std::abs(twice_area) < 1e-12) throw ShapeError("degenerate contour");
  return {cx / (3.0 * twice_area), cy / (3.0 * twice_area)};
}

bool contains(const Contour& c, Point q) {
  const auto& p = c.points;
  bool in = false;
  for (std::size_t i = 0, j = p.size() - 1; i < p.size(); j = i++) {
    if ((p[i].y > q.y) != (p[j].y > q.y)) {
      const double x = p[j].x + (q.y - p[j].y) * (p[i].x - p[j].x) / (p[i].y - p[j].y);
      if (q.x < x) in = !in;
    }
  }
  return in;
}

std::vector<double> radial_series(const Contour& c, Point center, std::size_t n) {
  if (n == 0) throw std::invalid_argument("radial series needs at least one sample");
  if (c.points.size() < 3 || !contains(c, center)) throw ShapeError("center outside contour");
  const auto& p = c.points;
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    const double dx = std::cos(theta), dy = std::sin(theta);
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Point& a = p[i];
      const Point& b = p[(i + 1) % p.size()];
      const double ex = b.x - a.x, ey = b.y - a.y;
      const double denom = dx * ey - dy * ex;
      if (std::abs(denom) < 1e-12) continue;  // parallel
      const double wx = a.x - center.x, wy = a.y - center.y;
      const double t = (wx * ey - wy * ex) / denom;
      const double u = (wx * dy - wy * dx) / denom;
      if (t > 0.0 && u >= -1e-12 && u <= 1.0 + 1e-12) nearest = std::min(nearest, t);
    }
    if (!std::isfinite(nearest)) throw ShapeError("ray does not meet the contour");
    out[j] = nearest;
  }
  return out;
}

ZNormalized znorm(std::span<const double> s, double eps) {
  ZNormalized z{std::vector<double>(s.size(), 0.0), false};
  if (s.empty()) {
    z.degenerate = true;
    return z;
  }
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(s.size());
  double var = 0.0;
  for (double v : s) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(s.size()));
  if (sd < eps) {
    z.degenerate = true;
    return z;
  }
  for (std::size_t i = 0; i < s.size(); ++i) z.values[i] = (s[i] - mean) / sd;
  return z;
}

std::vector<double> paa(std::span<const double> s, std::size_t w) {
  const std::size_t n = s.size();
  if (w == 0) throw std::invalid_argument("PAA frame count must be positive");
  if (w > n) throw std::invalid_argument("PAA frame count exceeds series length");
  // In units of 1/w samples: sample i covers [i*w, (i+1)*w), frame j covers
  // [j*n, (j+1)*n). Integer overlaps keep the weighting exact.
  std::vector<double> out(w, 0.0);
  if (n % w == 0) {
    const std::size_t len = n / w;
    for (std::size_t j = 0; j < w; ++j) {
      double acc = 0.0;
      for (std::size_t i = j * len; i < (j + 1) * len; ++i) acc += s[i];
      out[j] = acc / static_cast<double>(len);
    }
    return out;
  }
  for (std::size_t j = 0; j < w; ++j) {
    const std::size_t lo = j * n, hi = (j + 1) * n;
    double acc = 0.0;
    for (std::size_t i = lo / w; i < n && i * w < hi; ++i) {
      const std::size_t a = std::max(lo, i * w), b = std::min(hi, (i + 1) * w);
      if (b > a) acc += static_cast<double>(b - a) * s[i];
    }
    out[j] = acc / static_cast<double>(n);
  }
  return out;
}

std::vector<double> sax_breakpoints(std::size_t alphabet) {
  if (alphabet < 2 || alphabet > 20) throw std::invalid_argument("alphabet size must be 2..20");
  const boost::math::normal_distribution<double> unit;
  std::vector<double> beta(alphabet - 1);
  for (std::size_t i = 1; i < alphabet; ++i) {
    beta[i - 1] = boost::math::quantile(unit, static_cast<double>(i) / static_cast<double>(alphabet));
  }
  return beta;
}

SaxWord SaxWord::rotated(std::size_t shift) const {
  SaxWord r = *this;
  if (!symbols.empty()) {
    std::rotate(r.symbols.begin(), r.symbols.begin() + static_cast<std::ptrdiff_t>(shift % size()),
                r.symbols.end());
  }
  return r;
}

SaxWord sax_word(std::span<const double> coefficients, std::size_t alphabet) {
  const auto beta = sax_breakpoints(alphabet);
  SaxWord word{std::string(coefficients.size(), 'a'), alphabet};
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    const auto below = std::count_if(beta.begin(), beta.end(),
                                     [&](double b) { return b < coefficients[i]; });
    word.symbols[i] = static_cast<char>('a' + below);
  }
  return word;
}

SaxWord parse_sax_word(const std::string& symbols, std::size_t alphabet) {
  if (alphabet < 2 || alphabet > 20) throw std::invalid_argument("alphabet size must be 2..20");
  for (char ch : symbols) {
    if (ch < 'a' || static_cast<std::size_t>(ch - 'a') >= alphabet) {
      throw std::invalid_argument("symbol '" + std::string(1, ch) + "' outside alphabet");
    }
  }
  return {symbols, alphabet};
}

double word_distance(const SaxWord& a, const SaxWord& b, std::size_t n) {
  if (a.size() != b.size() || a.alphabet != b.alphabet) {
    throw std::invalid_argument("SAX words differ in length or alphabet");
  }
  if (a.size() == 0) return 0.0;
  const auto beta = sax_breakpoints(a.alphabet);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t r = a.index(i), c = b.index(i);
    const std::size_t hi = std::max(r, c), lo = std::min(r, c);
    if (hi - lo <= 1) continue;
    const double cell = beta[hi - 1] - beta[lo];
    sum += cell * cell;
  }
  return std::sqrt(static_cast<double>(n) / static_cast<double>(a.size())) * std::sqrt(sum);
}

Contour regular_polygon(std::size_t sides, double circumradius, double rotation_rad,
                        Point center) {
  if (sides < 3) throw std::invalid_argument("a polygon needs at least 3 sides");
  Contour c;
  const double offset = std::numbers::pi / static_cast<double>(sides);
  for (std::size_t i = 0; i < sides; ++i) {
    const double a = rotation_rad + offset +
                     2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(sides);
    c.points.push_back({center.x + circumradius * std::cos(a), center.y + circumradius * std::sin(a)});
  }
  return c;
}

void QualifierConfig::validate() const {
  if (word_length == 0 || word_length > samples) {
    throw std::invalid_argument("word length must be in 1..samples");
  }
  if (alphabet < 2 || alphabet > 20) throw std::invalid_argument("alphabet size must be 2..20");
  if (threshold < 0.0) throw std::invalid_argument("threshold must be non-negative");
  if (reference && (reference->size() != word_length || reference->alphabet != alphabet)) {
    throw std::invalid_argument("reference word does not match word length / alphabet");
  }
}

ShapeSignature shape_signature(const Contour& contour, const QualifierConfig& cfg) {
  ShapeSignature sig;
  sig.contour = contour;
  sig.center = centroid(contour);
  sig.radial = radial_series(contour, sig.center, cfg.samples);
  double mean = 0.0;
  for (double v : sig.radial) mean += v;
  mean /= static_cast<double>(sig.radial.size());
  sig.normalized = znorm(sig.radial);
  sig.coefficients = paa(sig.normalized.values, cfg.word_length);
  sig.word = sax_word(sig.coefficients, cfg.alphabet);
  double var = 0.0;
  for (double v : sig.radial) var += (v - mean) * (v - mean);
  sig.variation = std::sqrt(var / static_cast<double>(sig.radial.size())) / mean;
  sig.flat = sig.normalized.degenerate || sig.variation < cfg.min_variation;
  return sig;
}

SaxWord octagon_reference(const QualifierConfig& cfg) {
  const Contour oct = regular_polygon(8, 100.0, 0.0, {0.0, 0.0});
  return shape_signature(oct, cfg).word;
}

WordMatch match_rotations(const SaxWord& word, const SaxWord& reference, std::size_t n) {
  WordMatch best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t s = 0; s < word.size(); ++s) {
    const double d = word_distance(word.rotated(s), reference, n);
    if (d < best.distance) best = {d, s};
  }
  return best;
}

nlohmann::json QualifierVerdict::to_json() const {
  return {{"schema_version", 1}, {"accepted", accepted}, {"distance", distance},
          {"rotation_shift", rotation_shift}, {"reason", reason}, {"word", word},
          {"reference", reference}};
}

QualifierVerdict QualifierVerdict::from_json(const nlohmann::json& j) {
  QualifierVerdict v;
  v.accepted = j.at("accepted").get<bool>();
  v.distance = j.value("distance", 0.0);
  v.rotation_shift = j.value("rotation_shift", std::size_t{0});
  v.reason = j.value("reason", std::string{});
  v.word = j.value("word", std::string{});
  v.reference = j.value("reference", std::string{});
  return v;
}

QualifierVerdict qualify_edges(const GrayImage& edges, const QualifierConfig& cfg) {
  cfg.validate();
  QualifierVerdict v;
  const SaxWord reference = cfg.reference ? *cfg.reference : octagon_reference(cfg);
  v.reference = reference.symbols;
  try {
    const double threshold = cfg.edge_threshold ? *cfg.edge_threshold : otsu_threshold(edges);
    const Contour contour = extract_contour(edges, threshold);
    if (contour.points.size() < 8) throw ShapeError("contour too small");
    const ShapeSignature sig = shape_signature(contour, cfg);
    v.word = sig.word.symbols;
    const WordMatch m = match_rotations(sig.word, reference, cfg.samples);
    v.distance = m.distance;
    v.rotation_shift = m.shift;
    if (sig.flat) {
      v.reason = "flat radial series";
    } else if (m.distance > cfg.threshold) {
      v.reason = "distance above threshold";
    } else {
      v.accepted = true;
      v.reason = "accepted";
    }
  } catch (const ShapeError& e) {
    v.accepted = false;
    v.reason = e.what();
  }
  return v;
}

QualifierVerdict qualify_shape(const GrayImage& img, const QualifierConfig& cfg) {
  cfg.validate();
  SobelResult edges;
  try {
    if (cfg.edge_variant) {
      LayerReport report;
      edges = sobel_reliable(img, *cfg.edge_variant, {}, &report);
      if (report.any_failure) throw ShapeError("edge kernel failure");
    } else {
      edges = sobel(img);
    }
  } catch (const ShapeError& e) {
    QualifierVerdict v;
    v.reason = e.what();
    return v;
  }
  return qualify_edges(edges.magnitude, cfg);
}

std::size_t count_circular_maxima(std::span<const double> s) {
  const std::size_t n = s.size();
  if (n < 3) return 0;
  const std::size_t start =
      static_cast<std::size_t>(std::min_element(s.begin(), s.end()) - s.begin());
  std::size_t peaks = 0;
  bool rising = false;
  for (std::size_t step = 1; step <= n; ++step) {
    const double prev = s[(start + step - 1) % n], cur = s[(start + step) % n];
    if (cur > prev) {
      rising = true;
    } else if (cur < prev) {
      if (rising) ++peaks;
      rising = false;
    }
  }
  return peaks;
}

}  // namespace relconv
