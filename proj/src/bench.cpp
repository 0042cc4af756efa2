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

#include "relconv/bench.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <vector>

#include "relconv/reliable_conv.hpp"
#include "relconv/rng.hpp"

namespace relconv {

nlohmann::json BenchReport::to_json() const {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"schema_version", 1},
          {"geometry",
           {{"height", geometry.height},
            {"width", geometry.width},
            {"channels", geometry.channels},
            {"filters", geometry.filters},
            {"kernel", geometry.kernel},
            {"stride", geometry.stride},
            {"padding", geometry.padding}}},
          {"domain", to_string(domain)},
          {"repeats", repeats},
          {"times",
           {{"single_s", opt(single_s)}, {"redundant_s", opt(redundant_s)}, {"ratio", opt(ratio)}}}};
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <Element T>
Tensor<T> random_tensor(std::vector<std::size_t> shape, CounterRng& rng) {
  Tensor<T> t(std::move(shape));
  for (auto& v : t.data()) {
    if constexpr (std::same_as<T, float>) {
      v = static_cast<float>(rng.uniform(-1.0, 1.0));
    } else {
      v = static_cast<std::int32_t>(rng.uniform_int(-128, 127));
    }
  }
  return t;
}

template <Element T>
void time_variants(const BenchGeometry& g, std::size_t repeats, std::uint64_t seed,
                   BenchReport& report) {
  CounterRng rng(seed);
  const auto input = random_tensor<T>({g.height, g.width, g.channels}, rng);
  const auto filters = random_tensor<T>({g.filters, g.kernel, g.kernel, g.channels}, rng);
  const FaultPlan plan;

  auto run_once = [&](Variant v) {
    const ConvConfig cfg{g.stride, g.padding, v};
    const auto start = std::chrono::steady_clock::now();
    auto result = conv2d(input, filters, cfg, plan);
    const auto stop = std::chrono::steady_clock::now();
    if (result.report.any_failure) throw std::logic_error("fault-free benchmark run failed");
    return std::chrono::duration<double>(stop - start).count();
  };

  run_once(Variant::single);
  run_once(Variant::redundant);
  std::vector<double> single, redundant;
  // Interleaved so slow drifts in machine load affect both variants alike.
  for (std::size_t i = 0; i < repeats; ++i) {
    single.push_back(run_once(Variant::single));
    redundant.push_back(run_once(Variant::redundant));
  }
  report.single_s = median(single);
  report.redundant_s = median(redundant);
  if (*report.single_s > 0.0) report.ratio = *report.redundant_s / *report.single_s;
}

}  // namespace

BenchReport run_bench(const BenchGeometry& geometry, std::size_t repeats, Domain domain,
                      std::uint64_t seed) {
  if (repeats < 3) throw std::invalid_argument("benchmark needs at least 3 repeats");
  BenchReport report;
  report.geometry = geometry;
  report.domain = domain;
  report.repeats = repeats;
  if (geometry.filters == 0) return report;
  if (geometry.height == 0 || geometry.width == 0 || geometry.channels == 0 ||
      geometry.kernel == 0) {
    throw std::invalid_argument("degenerate benchmark geometry");
  }
  output_extent(geometry.height, geometry.kernel, geometry.stride, geometry.padding);
  output_extent(geometry.width, geometry.kernel, geometry.stride, geometry.padding);

  if (domain == Domain::float32) {
    time_variants<float>(geometry, repeats, seed, report);
  } else {
    time_variants<std::int32_t>(geometry, repeats, seed, report);
  }
  return report;
}

}  // namespace relconv
