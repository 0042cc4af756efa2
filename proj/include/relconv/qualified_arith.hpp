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

// Qualified scalar arithmetic. Every operator returns its result together with
// a qualifier flag stating whether the operation asserted its own correctness.
// Faults are injected deterministically from a FaultPlan addressed by OpCoord.

#include <bit>
#include <compare>
#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace relconv {

/// Element types of the two supported numeric domains.
template <typename T>
concept Element = std::same_as<T, std::int32_t> || std::same_as<T, float>;

enum class Domain { int32, float32 };

std::string_view to_string(Domain d);
Domain parse_domain(std::string_view s);

/// Execution variant of the qualified operators.
enum class Variant { single, redundant, tmr };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

template <Element T>
struct QualifiedValue {
  T value{};
  bool qualifier = false;

  friend bool operator==(const QualifiedValue&, const QualifiedValue&) = default;
};

/// Address of one scalar multiply or add inside one output element of one
/// layer. `k` enumerates the kernel dot product as mul(e0), add(e0), mul(e1),
/// add(e1), ... where e runs row-major over (ky, kx, channel).
struct OpCoord {
  std::uint32_t layer = 0;
  std::uint32_t filter = 0;
  std::uint32_t out_y = 0;
  std::uint32_t out_x = 0;
  std::uint32_t k = 0;

  friend auto operator<=>(const OpCoord&, const OpCoord&) = default;
};

constexpr std::uint32_t mul_op_index(std::uint32_t element) { return 2 * element; }
constexpr std::uint32_t add_op_index(std::uint32_t element) { return 2 * element + 1; }

enum class FaultSite : std::uint8_t { operand_a, operand_b, mul_result, add_result, compare };
enum class FaultKind : std::uint8_t { transient, persistent };

std::string_view to_string(FaultSite s);
std::string_view to_string(FaultKind k);
FaultSite parse_fault_site(std::string_view s);
FaultKind parse_fault_kind(std::string_view s);

struct Mutation {
  enum class Kind : std::uint8_t { bit_flip, add_delta };
  Kind kind = Kind::bit_flip;
  std::uint32_t bit = 0;  // bit_flip: 0..31
  double delta = 0.0;     // add_delta

  static Mutation flip(std::uint32_t bit) { return {Kind::bit_flip, bit, 0.0}; }
  static Mutation add(double delta) { return {Kind::add_delta, 0, delta}; }

  friend bool operator==(const Mutation&, const Mutation&) = default;
};

/// {"bit_flip": n} or {"add_delta": x}.
Mutation mutation_from_json(const nlohmann::json& j);
nlohmann::json mutation_to_json(const Mutation& m);

/// Applies a mutation to a 32-bit value. Bit flips act on the raw
/// representation (two's complement or IEEE-754 binary32).
template <Element T>
T apply_mutation(T v, const Mutation& m) {
  if (m.kind == Mutation::Kind::bit_flip) {
    return std::bit_cast<T>(std::bit_cast<std::uint32_t>(v) ^ (std::uint32_t{1} << m.bit));
  }
  if constexpr (std::same_as<T, std::int32_t>) {
    auto d = static_cast<std::uint32_t>(static_cast<std::int64_t>(m.delta));
    return static_cast<std::int32_t>(static_cast<std::uint32_t>(v) + d);
  } else {
    return v + static_cast<float>(m.delta);
  }
}

struct FaultEntry {
  OpCoord coord;
  FaultSite site = FaultSite::mul_result;
  FaultKind kind = FaultKind::transient;
  std::uint32_t replica = 0;  // 0..2
  Mutation mutation;

  /// Transient entries fire only on the first attempt of an operation;
  /// persistent entries fire on every attempt.
  bool fires_on(std::uint32_t attempt) const {
    return kind == FaultKind::persistent || attempt == 0;
  }

  friend bool operator==(const FaultEntry&, const FaultEntry&) = default;
};

/// Immutable, sorted schedule of injected faults. At most one entry exists per
/// (coord, site, replica).
class FaultPlan {
 public:
  FaultPlan() = default;
  /// Throws std::invalid_argument on duplicate keys or out-of-range fields.
  explicit FaultPlan(std::vector<FaultEntry> entries);

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  std::span<const FaultEntry> entries() const { return entries_; }

  /// All entries addressed to one output element of one layer, in k order.
  std::span<const FaultEntry> kernel_entries(std::uint32_t layer, std::uint32_t filter,
                                             std::uint32_t out_y, std::uint32_t out_x) const;

  const FaultEntry* find(const OpCoord& coord, FaultSite site, std::uint32_t replica) const;

  static FaultPlan from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  std::vector<FaultEntry> entries_;
};

/// The mutation that applies to this attempt of (coord, site, replica), if any.
std::optional<Mutation> resolve_fault(const OpCoord& coord, FaultSite site, std::uint32_t replica,
                                      const FaultPlan& plan, std::uint32_t attempt);

/// Per-operation injection context. The caller threads the coordinates and the
/// attempt number; `entries` is the slice of the plan for the current kernel.
struct InjectionContext {
  std::span<const FaultEntry> entries;
  OpCoord coord;
  std::uint32_t attempt = 0;
  std::uint32_t* fired = nullptr;  // optional count of mutations applied

  static InjectionContext for_kernel(const FaultPlan& plan, const OpCoord& coord) {
    return {plan.kernel_entries(coord.layer, coord.filter, coord.out_y, coord.out_x), coord, 0,
            nullptr};
  }

  InjectionContext at(std::uint32_t k, std::uint32_t attempt_no) const {
    InjectionContext c = *this;
    c.coord.k = k;
    c.attempt = attempt_no;
    return c;
  }
};

namespace detail {

// Hides a value from the optimizer so replicas are computed independently.
template <Element T>
inline T opaque(T v) {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  if constexpr (std::same_as<T, float>) {
    asm volatile("" : "+x"(v));
  } else {
    asm volatile("" : "+r"(v));
  }
  return v;
#elif defined(__GNUC__)
  asm volatile("" : "+g"(v));
  return v;
#else
  volatile T copy = v;
  return copy;
#endif
}

template <Element T>
inline T wrap_mul(T a, T b) {
  if constexpr (std::same_as<T, std::int32_t>) {
    return static_cast<std::int32_t>(static_cast<std::uint32_t>(a) * static_cast<std::uint32_t>(b));
  } else {
    return a * b;
  }
}

template <Element T>
inline T wrap_add(T a, T b) {
  if constexpr (std::same_as<T, std::int32_t>) {
    return static_cast<std::int32_t>(static_cast<std::uint32_t>(a) + static_cast<std::uint32_t>(b));
  } else {
    return a + b;
  }
}

template <Element T>
inline T wrap_sub(T a, T b) {
  if constexpr (std::same_as<T, std::int32_t>) {
    return static_cast<std::int32_t>(static_cast<std::uint32_t>(a) - static_cast<std::uint32_t>(b));
  } else {
    return a - b;
  }
}

template <Element T>
[[gnu::noinline]] T inject_slow(T v, FaultSite site, std::uint32_t replica,
                                const InjectionContext& ctx) {
  for (const FaultEntry& e : ctx.entries) {
    if (e.coord.k == ctx.coord.k && e.site == site && e.replica == replica &&
        e.fires_on(ctx.attempt)) {
      if (ctx.fired) ++*ctx.fired;
      return apply_mutation(v, e.mutation);
    }
  }
  return v;
}

template <Element T>
inline T inject(T v, FaultSite site, std::uint32_t replica, const InjectionContext& ctx) {
  if (ctx.entries.empty()) [[likely]] return v;
  return inject_slow(v, site, replica, ctx);
}

enum class OpKind { mul, add };

template <OpKind Op, Element T>
inline T execute_replica(T a, T b, std::uint32_t replica, const InjectionContext& ctx) {
  a = inject(a, FaultSite::operand_a, replica, ctx);
  b = inject(b, FaultSite::operand_b, replica, ctx);
  if constexpr (Op == OpKind::mul) {
    return inject(wrap_mul(a, b), FaultSite::mul_result, replica, ctx);
  } else {
    return inject(wrap_add(a, b), FaultSite::add_result, replica, ctx);
  }
}

template <OpKind Op, Element T>
inline QualifiedValue<T> single(T a, T b, const InjectionContext& ctx) {
  return {execute_replica<Op>(a, b, 0, ctx), true};
}

template <OpKind Op, Element T>
inline QualifiedValue<T> redundant(T a, T b, const InjectionContext& ctx) {
  const T r1 = execute_replica<Op>(a, b, 0, ctx);
  const T r2 = execute_replica<Op>(opaque(a), opaque(b), 1, ctx);
  // Two independent subtractions model a fallible comparator.
  const T sub1 = inject(wrap_sub(r1, r2), FaultSite::compare, 0, ctx);
  const T sub2 = inject(wrap_sub(opaque(r1), opaque(r2)), FaultSite::compare, 1, ctx);
  // sub1 == sub2 && sub1 == 0, evaluated without short-circuit branches.
  const bool ok = (sub1 == sub2) & (sub1 == T{0});
  return {r1, ok};
}

template <OpKind Op, Element T>
inline QualifiedValue<T> tmr(T a, T b, const InjectionContext& ctx) {
  const T r0 = execute_replica<Op>(a, b, 0, ctx);
  const T r1 = execute_replica<Op>(opaque(a), opaque(b), 1, ctx);
  const T r2 = execute_replica<Op>(opaque(a), opaque(b), 2, ctx);
  const T d01 = inject(wrap_sub(r0, r1), FaultSite::compare, 0, ctx);
  const T d12 = inject(wrap_sub(r1, r2), FaultSite::compare, 1, ctx);
  const T d02 = inject(wrap_sub(r0, r2), FaultSite::compare, 2, ctx);
  if (d01 == T{0} || d02 == T{0}) return {r0, true};
  if (d12 == T{0}) return {r1, true};
  return {r0, false};
}

}  // namespace detail

/// Non-redundant product. The qualifier is always true: nothing is checked.
template <Element T>
QualifiedValue<T> mul_single(T k, T i, const InjectionContext& ctx) {
  return detail::single<detail::OpKind::mul>(k, i, ctx);
}

/// Dual execution with duplicated comparison. Returns the first replica's
/// product even when disqualified; the reliable kernel never consumes it.
template <Element T>
QualifiedValue<T> mul_redundant(T k, T i, const InjectionContext& ctx) {
  return detail::redundant<detail::OpKind::mul>(k, i, ctx);
}

/// Triple execution with majority vote. No majority yields replica 0 with a
/// false qualifier.
template <Element T>
QualifiedValue<T> mul_tmr(T k, T i, const InjectionContext& ctx) {
  return detail::tmr<detail::OpKind::mul>(k, i, ctx);
}

template <Element T>
QualifiedValue<T> add_single(T a, T b, const InjectionContext& ctx) {
  return detail::single<detail::OpKind::add>(a, b, ctx);
}

template <Element T>
QualifiedValue<T> add_redundant(T a, T b, const InjectionContext& ctx) {
  return detail::redundant<detail::OpKind::add>(a, b, ctx);
}

template <Element T>
QualifiedValue<T> add_tmr(T a, T b, const InjectionContext& ctx) {
  return detail::tmr<detail::OpKind::add>(a, b, ctx);
}

}  // namespace relconv
