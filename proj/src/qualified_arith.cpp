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

#include "relconv/qualified_arith.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace relconv {

std::string_view to_string(Domain d) { return d == Domain::int32 ? "int" : "float"; }

Domain parse_domain(std::string_view s) {
  if (s == "int" || s == "int32") return Domain::int32;
  if (s == "float" || s == "float32") return Domain::float32;
  throw std::invalid_argument("unknown numeric domain: " + std::string(s));
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::single: return "single";
    case Variant::redundant: return "redundant";
    case Variant::tmr: return "tmr";
  }
  return "?";
}

Variant parse_variant(std::string_view s) {
  if (s == "single") return Variant::single;
  if (s == "redundant") return Variant::redundant;
  if (s == "tmr") return Variant::tmr;
  throw std::invalid_argument("unknown variant: " + std::string(s));
}

std::string_view to_string(FaultSite s) {
  switch (s) {
    case FaultSite::operand_a: return "operand_a";
    case FaultSite::operand_b: return "operand_b";
    case FaultSite::mul_result: return "mul_result";
    case FaultSite::add_result: return "add_result";
    case FaultSite::compare: return "compare";
  }
  return "?";
}

std::string_view to_string(FaultKind k) {
  return k == FaultKind::transient ? "transient" : "persistent";
}

FaultSite parse_fault_site(std::string_view s) {
  for (auto site : {FaultSite::operand_a, FaultSite::operand_b, FaultSite::mul_result,
                    FaultSite::add_result, FaultSite::compare}) {
    if (to_string(site) == s) return site;
  }
  throw std::invalid_argument("unknown fault site: " + std::string(s));
}

FaultKind parse_fault_kind(std::string_view s) {
  if (s == "transient") return FaultKind::transient;
  if (s == "persistent") return FaultKind::persistent;
  throw std::invalid_argument("unknown fault kind: " + std::string(s));
}

namespace {

auto key(const FaultEntry& e) { return std::tuple(e.coord, e.site, e.replica); }

auto kernel_key(const OpCoord& c) { return std::tuple(c.layer, c.filter, c.out_y, c.out_x); }

}  // namespace

FaultPlan::FaultPlan(std::vector<FaultEntry> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (e.replica > 2) throw std::invalid_argument("fault replica must be 0..2");
    if (e.mutation.kind == Mutation::Kind::bit_flip && e.mutation.bit > 31) {
      throw std::invalid_argument("bit_flip index must be 0..31");
    }
  }
  std::sort(entries_.begin(), entries_.end(),
            [](const FaultEntry& a, const FaultEntry& b) { return key(a) < key(b); });
  auto dup = std::adjacent_find(entries_.begin(), entries_.end(),
                                [](const FaultEntry& a, const FaultEntry& b) {
                                  return key(a) == key(b);
                                });
  if (dup != entries_.end()) {
    throw std::invalid_argument("duplicate fault entry for (coord, site, replica)");
  }
}

std::span<const FaultEntry> FaultPlan::kernel_entries(std::uint32_t layer, std::uint32_t filter,
                                                      std::uint32_t out_y,
                                                      std::uint32_t out_x) const {
  if (entries_.empty()) return {};
  const auto target = std::tuple(layer, filter, out_y, out_x);
  auto lo = std::lower_bound(entries_.begin(), entries_.end(), target,
                             [](const FaultEntry& e, const auto& t) {
                               return kernel_key(e.coord) < t;
                             });
  auto hi = std::upper_bound(lo, entries_.end(), target, [](const auto& t, const FaultEntry& e) {
    return t < kernel_key(e.coord);
  });
  return {lo, hi};
}

const FaultEntry* FaultPlan::find(const OpCoord& coord, FaultSite site,
                                  std::uint32_t replica) const {
  const auto target = std::tuple(coord, site, replica);
  auto it = std::lower_bound(entries_.begin(), entries_.end(), target,
                             [](const FaultEntry& e, const auto& t) { return key(e) < t; });
  if (it != entries_.end() && key(*it) == target) return &*it;
  return nullptr;
}

Mutation mutation_from_json(const nlohmann::json& m) {
  if (m.is_object() && m.contains("bit_flip")) return Mutation::flip(m.at("bit_flip").get<std::uint32_t>());
  if (m.is_object() && m.contains("add_delta")) return Mutation::add(m.at("add_delta").get<double>());
  throw std::invalid_argument("mutation must be bit_flip or add_delta");
}

nlohmann::json mutation_to_json(const Mutation& m) {
  if (m.kind == Mutation::Kind::bit_flip) return {{"bit_flip", m.bit}};
  return {{"add_delta", m.delta}};
}

FaultPlan FaultPlan::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("fault plan must be a JSON array");
  std::vector<FaultEntry> entries;
  entries.reserve(j.size());
  for (const auto& item : j) {
    FaultEntry e;
    const auto& c = item.at("coord");
    e.coord = {c.value("layer", 0u), c.at("filter").get<std::uint32_t>(),
               c.at("out_y").get<std::uint32_t>(), c.at("out_x").get<std::uint32_t>(),
               c.at("k").get<std::uint32_t>()};
    e.site = parse_fault_site(item.at("site").get<std::string>());
    e.kind = parse_fault_kind(item.at("kind").get<std::string>());
    e.replica = item.value("replica", 0u);
    e.mutation = mutation_from_json(item.at("mutation"));
    entries.push_back(e);
  }
  return FaultPlan(std::move(entries));
}

nlohmann::json FaultPlan::to_json() const {
  auto out = nlohmann::json::array();
  for (const auto& e : entries_) {
    const nlohmann::json m = mutation_to_json(e.mutation);
    out.push_back({{"coord",
                    {{"layer", e.coord.layer},
                     {"filter", e.coord.filter},
                     {"out_y", e.coord.out_y},
                     {"out_x", e.coord.out_x},
                     {"k", e.coord.k}}},
                   {"site", to_string(e.site)},
                   {"kind", to_string(e.kind)},
                   {"replica", e.replica},
                   {"mutation", m}});
  }
  return out;
}

std::optional<Mutation> resolve_fault(const OpCoord& coord, FaultSite site, std::uint32_t replica,
                                      const FaultPlan& plan, std::uint32_t attempt) {
  const FaultEntry* e = plan.find(coord, site, replica);
  if (e == nullptr || !e->fires_on(attempt)) return std::nullopt;
  return e->mutation;
}

}  // namespace relconv
