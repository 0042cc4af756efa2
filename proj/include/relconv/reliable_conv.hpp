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

// Reliable convolution: every multiply and accumulate of a kernel dot product
// is qualified; a disqualified operation is rolled back and repeated once, and
// a leaky-bucket error counter decides when the kernel is irrecoverable.

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "relconv/qualified_arith.hpp"
#include "relconv/tensor.hpp"

namespace relconv {

/// Leaky-bucket error counter. Each detected error adds `factor`; each
/// successful operation drains one unit, floor zero. Reaching the ceiling
/// (or exceeding it, with `inclusive` off) marks the kernel irrecoverable.
class ErrorBudget {
 public:
  struct Config {
    int factor = 8;
    int ceiling = 16;
    bool inclusive = true;
  };

  ErrorBudget() = default;
  explicit ErrorBudget(Config cfg) : cfg_(cfg) {
    if (cfg_.factor <= 0 || cfg_.ceiling <= 0) {
      throw std::invalid_argument("error budget factor and ceiling must be positive");
    }
  }

  /// Records an error event. Returns true when the ceiling is hit. The stored
  /// counter saturates at the ceiling.
  bool charge() {
    const int next = error_ + cfg_.factor;
    const bool hit = cfg_.inclusive ? next >= cfg_.ceiling : next > cfg_.ceiling;
    error_ = std::min(next, cfg_.ceiling);
    peak_ = std::max(peak_, error_);
    return hit;
  }

  void relieve() {
    if (error_ > 0) --error_;
  }

  int error() const { return error_; }
  int peak() const { return peak_; }
  const Config& config() const { return cfg_; }
  void reset_peak() { peak_ = error_; }

 private:
  Config cfg_;
  int error_ = 0;
  int peak_ = 0;
};

struct TraceEvent {
  enum class Kind : std::uint8_t { success, error, abort };
  OpCoord coord;
  Kind kind = Kind::success;
  std::uint32_t attempt = 0;
  int error_after = 0;
};

template <Element T>
struct KernelOutcome {
  T result{};
  bool failure = false;
  int error_final = 0;
  int error_peak = 0;
  std::uint32_t retries = 0;
  std::uint32_t detections = 0;  // disqualified attempts
  std::uint32_t faults_fired = 0;
  std::vector<TraceEvent> trace;
};

namespace detail {

template <Element T, Variant V, OpKind Op>
inline QualifiedValue<T> qualified_op(T a, T b, const InjectionContext& ctx) {
  if constexpr (V == Variant::single) {
    return single<Op>(a, b, ctx);
  } else if constexpr (V == Variant::redundant) {
    return redundant<Op>(a, b, ctx);
  } else {
    return tmr<Op>(a, b, ctx);
  }
}

template <Element T, Variant V>
KernelOutcome<T> reliable_dot_impl(std::span<const T> kernel, std::span<const T> window,
                                   ErrorBudget& budget, const InjectionContext& base,
                                   bool with_trace) {
  KernelOutcome<T> out;
  budget.reset_peak();
  InjectionContext ctx = base;
  ctx.fired = &out.faults_fired;

  auto note = [&](std::uint32_t k, TraceEvent::Kind kind, std::uint32_t attempt) {
    if (with_trace) {
      OpCoord c = ctx.coord;
      c.k = k;
      out.trace.push_back({c, kind, attempt, budget.error()});
    }
  };

  // One operation with a single rollback. Returns false when the kernel must abort.
  auto run = [&]<OpKind Op>(T a, T b, std::uint32_t k, T& value) -> bool {
    QualifiedValue<T> q = qualified_op<T, V, Op>(a, b, ctx.at(k, 0));
    if (!q.qualifier) {
      ++out.detections;
      if (budget.charge()) {
        note(k, TraceEvent::Kind::abort, 0);
        return false;
      }
      note(k, TraceEvent::Kind::error, 0);
      ++out.retries;
      q = qualified_op<T, V, Op>(a, b, ctx.at(k, 1));
      if (!q.qualifier) {
        // No third attempt exists, so a twice-failed operation always aborts.
        ++out.detections;
        budget.charge();
        note(k, TraceEvent::Kind::abort, 1);
        return false;
      }
      budget.relieve();
      note(k, TraceEvent::Kind::success, 1);
    } else {
      budget.relieve();
      note(k, TraceEvent::Kind::success, 0);
    }
    value = q.value;
    return true;
  };

  T sum{0};
  bool ok = true;
  for (std::uint32_t e = 0; e < kernel.size(); ++e) {
    T product{};
    if (!run.template operator()<OpKind::mul>(kernel[e], window[e], mul_op_index(e), product)) {
      ok = false;
      break;
    }
    T temp{};
    if (!run.template operator()<OpKind::add>(sum, product, add_op_index(e), temp)) {
      ok = false;
      break;
    }
    sum = temp;
  }

  out.failure = !ok;
  out.result = ok ? sum : T{0};
  out.error_final = budget.error();
  out.error_peak = budget.peak();
  return out;
}

}  // namespace detail

/// Reliable convolution kernel over two equally sized flat spans. The budget
/// is carried in and out so callers can choose per-kernel or layer scope.
template <Element T>
KernelOutcome<T> reliable_dot(std::span<const T> kernel, std::span<const T> window,
                              ErrorBudget& budget, Variant variant, const InjectionContext& ctx,
                              bool with_trace = false) {
  if (kernel.size() != window.size()) {
    throw std::invalid_argument("kernel and window sizes differ");
  }
  switch (variant) {
    case Variant::single:
      return detail::reliable_dot_impl<T, Variant::single>(kernel, window, budget, ctx, with_trace);
    case Variant::redundant:
      return detail::reliable_dot_impl<T, Variant::redundant>(kernel, window, budget, ctx,
                                                              with_trace);
    case Variant::tmr:
      return detail::reliable_dot_impl<T, Variant::tmr>(kernel, window, budget, ctx, with_trace);
  }
  throw std::invalid_argument("bad variant");
}

template <Element T>
KernelOutcome<T> reliable_dot(const Tensor<T>& kernel, const Tensor<T>& window,
                              ErrorBudget& budget, Variant variant, const InjectionContext& ctx,
                              bool with_trace = false) {
  if (kernel.shape() != window.shape()) {
    throw std::invalid_argument("kernel and window shapes differ");
  }
  return reliable_dot<T>(kernel.data(), window.data(), budget, variant, ctx, with_trace);
}

struct ConvConfig {
  std::size_t stride = 1;
  std::size_t padding = 0;
  Variant variant = Variant::redundant;
};

enum class BudgetScope { per_kernel, layer_global };

struct ConvOptions {
  BudgetScope scope = BudgetScope::per_kernel;
  ErrorBudget::Config budget{};
  std::uint32_t layer = 0;
  unsigned threads = 1;  // 0 or 1 = serial
};

/// floor((in + 2*padding - kernel) / stride) + 1; throws when < 1.
std::size_t output_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                          std::size_t padding);

struct KernelIndex {
  std::uint32_t filter = 0;
  std::uint32_t out_y = 0;
  std::uint32_t out_x = 0;

  friend auto operator<=>(const KernelIndex&, const KernelIndex&) = default;
};

struct LayerReport {
  bool any_failure = false;
  std::vector<KernelIndex> failed_kernels;  // sorted by (filter, out_y, out_x)
  std::uint64_t kernels = 0;
  std::uint64_t total_retries = 0;
  std::uint64_t detections = 0;
  std::uint64_t faults_fired = 0;
  int error_peak = 0;

  nlohmann::json to_json() const;
};

template <Element T>
struct ConvResult {
  Tensor<T> feature_maps;  // (out_h, out_w, filters)
  LayerReport report;
};

/// Qualified convolution of an (h, w, c) input with an (n, kh, kw, c) filter
/// bank. Failed kernels contribute 0 and are listed in the report.
template <Element T>
ConvResult<T> conv2d(const Tensor<T>& input, const Tensor<T>& filters, const ConvConfig& cfg,
                     const FaultPlan& plan, const ConvOptions& opts = {});

/// Unqualified convolution with the same element and accumulation order as
/// reliable_dot.
template <Element T>
Tensor<T> conv2d_plain(const Tensor<T>& input, const Tensor<T>& filters, const ConvConfig& cfg,
                       unsigned threads = 1);

extern template ConvResult<std::int32_t> conv2d(const Tensor<std::int32_t>&,
                                                const Tensor<std::int32_t>&, const ConvConfig&,
                                                const FaultPlan&, const ConvOptions&);
extern template ConvResult<float> conv2d(const Tensor<float>&, const Tensor<float>&,
                                         const ConvConfig&, const FaultPlan&, const ConvOptions&);
extern template Tensor<std::int32_t> conv2d_plain(const Tensor<std::int32_t>&,
                                                  const Tensor<std::int32_t>&, const ConvConfig&,
                                                  unsigned);
extern template Tensor<float> conv2d_plain(const Tensor<float>&, const Tensor<float>&,
                                           const ConvConfig&, unsigned);

}  // namespace relconv
