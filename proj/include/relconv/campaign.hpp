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

// Seeded fault-injection campaigns over one convolution layer.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "relconv/bench.hpp"
#include "relconv/qualified_arith.hpp"
#include "relconv/reliable_conv.hpp"

namespace relconv {

struct FaultModel {
  double probability = 0.0;  // per scalar operation
  std::vector<FaultSite> sites{FaultSite::mul_result, FaultSite::add_result};
  FaultKind kind = FaultKind::transient;
  std::optional<Mutation> mutation;  // uniformly random bit flip when unset
};

struct CampaignConfig {
  BenchGeometry geometry{16, 16, 3, 4, 3, 1, 0};
  Variant variant = Variant::redundant;
  Domain domain = Domain::int32;
  FaultModel faults;
  std::optional<FaultPlan> plan;  // explicit plan used for every trial instead of `faults`
  BudgetScope scope = BudgetScope::per_kernel;
  std::size_t trials = 100;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument.
  void validate() const;
  nlohmann::json to_json() const;
  static CampaignConfig from_json(const nlohmann::json& j);
  static CampaignConfig load(const std::filesystem::path& path);
};

enum class Outcome : std::uint8_t { masked, detected_recovered, kernel_failure, silent_corruption };

std::string to_string(Outcome o);

struct TrialResult {
  Outcome outcome = Outcome::masked;
  std::size_t faults_planned = 0;
  std::uint64_t faults_fired = 0;
  std::uint64_t detections = 0;
  std::uint64_t retries = 0;
  std::size_t failed_kernels = 0;
  std::size_t corrupted_outputs = 0;  // output elements differing from the clean run
  int error_peak = 0;
};

struct CampaignReport {
  CampaignConfig config;
  std::vector<TrialResult> trials;
  std::array<std::size_t, 4> outcome_counts{};  // indexed by Outcome
  std::vector<std::size_t> error_peak_histogram;  // trials per peak value 0..ceiling
  std::uint64_t faults_fired = 0;
  std::uint64_t detections = 0;

  std::size_t count(Outcome o) const { return outcome_counts[static_cast<std::size_t>(o)]; }
  double rate(Outcome o) const;
  nlohmann::json to_json() const;
};

/// Per-trial fault plan drawn from the model. At most one fault per scalar
/// operation: each eligible operation is hit with probability p (geometric
/// skipping), at a uniformly drawn eligible site and replica.
FaultPlan sample_plan(const CampaignConfig& cfg, std::size_t trial);

/// Runs every trial against a clean oracle computed once. Trials run on up
/// to `threads` workers; the report does not depend on the worker count.
CampaignReport run_campaign(const CampaignConfig& cfg, unsigned threads = 1);

}  // namespace relconv
