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

#include "relconv/reliable_conv.hpp"

#include <string>

#include "parallel.hpp"

namespace relconv {

std::size_t output_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                          std::size_t padding) {
  if (stride == 0) throw std::invalid_argument("stride must be positive");
  if (kernel == 0) throw std::invalid_argument("kernel extent must be positive");
  if (in + 2 * padding < kernel) {
    throw std::invalid_argument("kernel " + std::to_string(kernel) +
                                " larger than padded input " + std::to_string(in + 2 * padding));
  }
  return (in + 2 * padding - kernel) / stride + 1;
}

nlohmann::json LayerReport::to_json() const {
  auto failed = nlohmann::json::array();
  for (const auto& k : failed_kernels) {
    failed.push_back({{"filter", k.filter}, {"out_y", k.out_y}, {"out_x", k.out_x}});
  }
  return {{"schema_version", 1},
          {"any_failure", any_failure},
          {"failed_kernels", failed},
          {"kernels", kernels},
          {"total_retries", total_retries},
          {"detections", detections},
          {"faults_fired", faults_fired},
          {"error_peak", error_peak}};
}

namespace {

struct Geometry {
  std::size_t in_h, in_w, channels, filters, k_h, k_w, out_h, out_w;
};

template <Element T>
Geometry check_geometry(const Tensor<T>& input, const Tensor<T>& filters, const ConvConfig& cfg) {
  if (input.rank() != 3) throw std::invalid_argument("input must be (height, width, channels)");
  if (filters.rank() != 4) {
    throw std::invalid_argument("filters must be (count, kernel_h, kernel_w, channels)");
  }
  if (filters.extent(3) != input.extent(2)) {
    throw std::invalid_argument("filter channels (" + std::to_string(filters.extent(3)) +
                                ") do not match input channels (" +
                                std::to_string(input.extent(2)) + ")");
  }
  Geometry g{input.extent(0), input.extent(1), input.extent(2), filters.extent(0),
             filters.extent(1), filters.extent(2), 0, 0};
  g.out_h = output_extent(g.in_h, g.k_h, cfg.stride, cfg.padding);
  g.out_w = output_extent(g.in_w, g.k_w, cfg.stride, cfg.padding);
  return g;
}

// Copies the receptive field of (oy, ox) into `window` in (ky, kx, c) order,
// substituting zeros for padding.
template <Element T>
void gather_window(const Tensor<T>& input, const Geometry& g, const ConvConfig& cfg,
                   std::size_t oy, std::size_t ox, std::vector<T>& window) {
  std::size_t i = 0;
  for (std::size_t ky = 0; ky < g.k_h; ++ky) {
    const auto y = static_cast<std::ptrdiff_t>(oy * cfg.stride + ky) -
                   static_cast<std::ptrdiff_t>(cfg.padding);
    for (std::size_t kx = 0; kx < g.k_w; ++kx) {
      const auto x = static_cast<std::ptrdiff_t>(ox * cfg.stride + kx) -
                     static_cast<std::ptrdiff_t>(cfg.padding);
      const bool inside = y >= 0 && x >= 0 && y < static_cast<std::ptrdiff_t>(g.in_h) &&
                          x < static_cast<std::ptrdiff_t>(g.in_w);
      for (std::size_t c = 0; c < g.channels; ++c) {
        window[i++] = inside ? input.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c)
                             : T{0};
      }
    }
  }
}

struct KernelSlot {
  bool failure = false;
  int peak = 0;
  std::uint32_t retries = 0;
  std::uint32_t detections = 0;
  std::uint32_t fired = 0;
};

}  // namespace

template <Element T>
ConvResult<T> conv2d(const Tensor<T>& input, const Tensor<T>& filters, const ConvConfig& cfg,
                     const FaultPlan& plan, const ConvOptions& opts) {
  const Geometry g = check_geometry(input, filters, cfg);
  const std::size_t window_size = g.k_h * g.k_w * g.channels;

  ConvResult<T> out{Tensor<T>({g.out_h, g.out_w, g.filters}), {}};
  std::vector<KernelSlot> slots(g.out_h * g.out_w * g.filters);

  const bool global = opts.scope == BudgetScope::layer_global;
  ErrorBudget layer_budget(opts.budget);

  auto row = [&](std::size_t oy) {
    std::vector<T> window(window_size);
    for (std::size_t ox = 0; ox < g.out_w; ++ox) {
      gather_window(input, g, cfg, oy, ox, window);
      for (std::size_t f = 0; f < g.filters; ++f) {
        const OpCoord coord{opts.layer, static_cast<std::uint32_t>(f),
                            static_cast<std::uint32_t>(oy), static_cast<std::uint32_t>(ox), 0};
        ErrorBudget local(opts.budget);
        ErrorBudget& budget = global ? layer_budget : local;
        auto outcome = reliable_dot<T>(filters.slice(f), window, budget, cfg.variant,
                                       InjectionContext::for_kernel(plan, coord));
        out.feature_maps.at(oy, ox, f) = outcome.result;
        slots[(oy * g.out_w + ox) * g.filters + f] = {outcome.failure, outcome.error_peak,
                                                      outcome.retries, outcome.detections,
                                                      outcome.faults_fired};
      }
    }
  };
  // A layer-wide budget is only defined for serial row-major execution.
  detail::parallel_for(g.out_h, global ? 1u : opts.threads, row);

  LayerReport& r = out.report;
  r.kernels = slots.size();
  for (std::size_t f = 0; f < g.filters; ++f) {
    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
      for (std::size_t ox = 0; ox < g.out_w; ++ox) {
        const KernelSlot& s = slots[(oy * g.out_w + ox) * g.filters + f];
        if (s.failure) {
          r.failed_kernels.push_back({static_cast<std::uint32_t>(f),
                                      static_cast<std::uint32_t>(oy),
                                      static_cast<std::uint32_t>(ox)});
        }
        r.total_retries += s.retries;
        r.detections += s.detections;
        r.faults_fired += s.fired;
        r.error_peak = std::max(r.error_peak, s.peak);
      }
    }
  }
  r.any_failure = !r.failed_kernels.empty();
  return out;
}

template <Element T>
Tensor<T> conv2d_plain(const Tensor<T>& input, const Tensor<T>& filters, const ConvConfig& cfg,
                       unsigned threads) {
  const Geometry g = check_geometry(input, filters, cfg);
  const std::size_t window_size = g.k_h * g.k_w * g.channels;
  Tensor<T> out({g.out_h, g.out_w, g.filters});

  detail::parallel_for(g.out_h, threads, [&](std::size_t oy) {
    std::vector<T> window(window_size);
    for (std::size_t ox = 0; ox < g.out_w; ++ox) {
      gather_window(input, g, cfg, oy, ox, window);
      for (std::size_t f = 0; f < g.filters; ++f) {
        const auto kernel = filters.slice(f);
        T sum{0};
        for (std::size_t e = 0; e < window_size; ++e) {
          sum = detail::wrap_add(sum, detail::wrap_mul(kernel[e], window[e]));
        }
        out.at(oy, ox, f) = sum;
      }
    }
  });
  return out;
}

template ConvResult<std::int32_t> conv2d(const Tensor<std::int32_t>&, const Tensor<std::int32_t>&,
                                         const ConvConfig&, const FaultPlan&, const ConvOptions&);
template ConvResult<float> conv2d(const Tensor<float>&, const Tensor<float>&, const ConvConfig&,
                                  const FaultPlan&, const ConvOptions&);
template Tensor<std::int32_t> conv2d_plain(const Tensor<std::int32_t>&,
                                           const Tensor<std::int32_t>&, const ConvConfig&,
                                           unsigned);
template Tensor<float> conv2d_plain(const Tensor<float>&, const Tensor<float>&, const ConvConfig&,
                                    unsigned);

}  // namespace relconv
