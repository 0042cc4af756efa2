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

#include "relconv/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "parallel.hpp"
#include "relconv/rng.hpp"

namespace relconv {

namespace {

std::uint32_t replica_count(Variant v) {
  switch (v) {
    case Variant::single: return 1;
    case Variant::redundant: return 2;
    case Variant::tmr: return 3;
  }
  return 1;
}

struct Extents {
  std::size_t out_h, out_w, ops_per_kernel;
};

Extents extents(const BenchGeometry& g) {
  return {output_extent(g.height, g.kernel, g.stride, g.padding),
          output_extent(g.width, g.kernel, g.stride, g.padding),
          2 * g.kernel * g.kernel * g.channels};
}

nlohmann::json geometry_json(const BenchGeometry& g) {
  return {{"height", g.height}, {"width", g.width},   {"channels", g.channels},
          {"filters", g.filters}, {"kernel", g.kernel}, {"stride", g.stride},
          {"padding", g.padding}};
}

template <Element T>
struct LayerData {
  Tensor<T> input;
  Tensor<T> filters;
};

template <Element T>
LayerData<T> make_data(const CampaignConfig& cfg) {
  const auto& g = cfg.geometry;
  CounterRng rng(cfg.seed, 0);
  LayerData<T> d{Tensor<T>({g.height, g.width, g.channels}),
                 Tensor<T>({g.filters, g.kernel, g.kernel, g.channels})};
  auto fill = [&](Tensor<T>& t, double lo, double hi) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      if constexpr (std::same_as<T, std::int32_t>) {
        t[i] = static_cast<T>(rng.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
      } else {
        t[i] = static_cast<T>(rng.uniform(lo, hi));
      }
    }
  };
  if constexpr (std::same_as<T, std::int32_t>) {
    fill(d.input, -128, 127);
    fill(d.filters, -8, 8);
  } else {
    fill(d.input, -1.0, 1.0);
    fill(d.filters, -1.0, 1.0);
  }
  return d;
}

template <Element T>
bool same_value(T a, T b) {
  if constexpr (std::same_as<T, float>) {
    if (std::isnan(a) && std::isnan(b)) return true;
  }
  return a == b;
}

template <Element T>
CampaignReport run_typed(const CampaignConfig& cfg, unsigned threads) {
  const LayerData<T> data = make_data<T>(cfg);
  const ConvConfig conv{cfg.geometry.stride, cfg.geometry.padding, cfg.variant};
  const Tensor<T> clean = conv2d_plain(data.input, data.filters, conv);

  ConvOptions opts;
  opts.scope = cfg.scope;

  CampaignReport report;
  report.config = cfg;
  report.trials.resize(cfg.trials);
  detail::parallel_for(cfg.trials, threads, [&](std::size_t t) {
    const FaultPlan plan = cfg.plan ? *cfg.plan : sample_plan(cfg, t);
    const auto r = conv2d(data.input, data.filters, conv, plan, opts);
    TrialResult& out = report.trials[t];
    out.faults_planned = plan.size();
    out.faults_fired = r.report.faults_fired;
    out.detections = r.report.detections;
    out.retries = r.report.total_retries;
    out.failed_kernels = r.report.failed_kernels.size();
    out.error_peak = r.report.error_peak;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      out.corrupted_outputs += !same_value(clean[i], r.feature_maps[i]);
    }
    if (r.report.any_failure) {
      out.outcome = Outcome::kernel_failure;
    } else if (out.corrupted_outputs > 0) {
      out.outcome = Outcome::silent_corruption;
    } else if (out.detections > 0) {
      out.outcome = Outcome::detected_recovered;
    } else {
      out.outcome = Outcome::masked;
    }
  });

  report.error_peak_histogram.assign(static_cast<std::size_t>(opts.budget.ceiling) + 1, 0);
  for (const auto& t : report.trials) {
    ++report.outcome_counts[static_cast<std::size_t>(t.outcome)];
    ++report.error_peak_histogram[static_cast<std::size_t>(t.error_peak)];
    report.faults_fired += t.faults_fired;
    report.detections += t.detections;
  }
  return report;
}

}  // namespace

void CampaignConfig::validate() const {
  const auto& g = geometry;
  if (g.height == 0 || g.width == 0 || g.channels == 0 || g.filters == 0 || g.kernel == 0 ||
      g.stride == 0) {
    throw std::invalid_argument("campaign geometry must be non-degenerate");
  }
  output_extent(g.height, g.kernel, g.stride, g.padding);
  output_extent(g.width, g.kernel, g.stride, g.padding);
  if (trials < 1) throw std::invalid_argument("campaign needs at least one trial");
  if (!(faults.probability >= 0.0 && faults.probability <= 1.0)) {
    throw std::invalid_argument("fault probability must be in [0, 1]");
  }
  if (!plan && faults.probability > 0.0 && faults.sites.empty()) {
    throw std::invalid_argument("fault model lists no sites");
  }
  if (faults.mutation && faults.mutation->kind == Mutation::Kind::bit_flip &&
      faults.mutation->bit > 31) {
    throw std::invalid_argument("bit_flip index must be 0..31");
  }
}

nlohmann::json CampaignConfig::to_json() const {
  auto sites = nlohmann::json::array();
  for (auto s : faults.sites) sites.push_back(std::string(to_string(s)));
  nlohmann::json model{{"probability", faults.probability},
                       {"sites", sites},
                       {"kind", std::string(to_string(faults.kind))},
                       {"mutation", faults.mutation ? mutation_to_json(*faults.mutation)
                                                    : nlohmann::json("random_bit_flip")}};
  nlohmann::json j{{"geometry", geometry_json(geometry)},
                   {"variant", std::string(to_string(variant))},
                   {"domain", std::string(to_string(domain))},
                   {"fault_model", model},
                   {"budget_scope", scope == BudgetScope::per_kernel ? "per_kernel" : "layer_global"},
                   {"trials", trials},
                   {"seed", seed}};
  if (plan) j["plan"] = plan->to_json();
  return j;
}

CampaignConfig CampaignConfig::from_json(const nlohmann::json& j) {
  CampaignConfig c;
  try {
    if (j.contains("geometry")) {
      const auto& g = j.at("geometry");
      c.geometry.height = g.value("height", c.geometry.height);
      c.geometry.width = g.value("width", c.geometry.width);
      c.geometry.channels = g.value("channels", c.geometry.channels);
      c.geometry.filters = g.value("filters", c.geometry.filters);
      c.geometry.kernel = g.value("kernel", c.geometry.kernel);
      c.geometry.stride = g.value("stride", c.geometry.stride);
      c.geometry.padding = g.value("padding", c.geometry.padding);
    }
    if (j.contains("variant")) c.variant = parse_variant(j.at("variant").get<std::string>());
    if (j.contains("domain")) c.domain = parse_domain(j.at("domain").get<std::string>());
    if (j.contains("fault_model")) {
      const auto& m = j.at("fault_model");
      c.faults.probability = m.value("probability", 0.0);
      if (m.contains("sites")) {
        c.faults.sites.clear();
        for (const auto& s : m.at("sites")) c.faults.sites.push_back(parse_fault_site(s.get<std::string>()));
      }
      if (m.contains("kind")) c.faults.kind = parse_fault_kind(m.at("kind").get<std::string>());
      if (m.contains("mutation")) {
        const auto& mu = m.at("mutation");
        if (mu.is_string()) {
          if (mu.get<std::string>() != "random_bit_flip") {
            throw std::invalid_argument("unknown mutation model: " + mu.get<std::string>());
          }
        } else {
          c.faults.mutation = mutation_from_json(mu);
        }
      }
    }
    if (j.contains("plan")) c.plan = FaultPlan::from_json(j.at("plan"));
    if (j.contains("budget_scope")) {
      const auto s = j.at("budget_scope").get<std::string>();
      if (s == "per_kernel") {
        c.scope = BudgetScope::per_kernel;
      } else if (s == "layer_global") {
        c.scope = BudgetScope::layer_global;
      } else {
        throw std::invalid_argument("unknown budget scope: " + s);
      }
    }
    const auto trials = j.value("trials", static_cast<std::int64_t>(c.trials));
    if (trials < 1) throw std::invalid_argument("campaign needs at least one trial");
    c.trials = static_cast<std::size_t>(trials);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed campaign config: ") + e.what());
  }
  c.validate();
  return c;
}

CampaignConfig CampaignConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open campaign config: " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("campaign config is not JSON: ") + e.what());
  }
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::masked: return "masked";
    case Outcome::detected_recovered: return "detected_recovered";
    case Outcome::kernel_failure: return "kernel_failure";
    case Outcome::silent_corruption: return "silent_corruption";
  }
  return "?";
}

double CampaignReport::rate(Outcome o) const {
  return trials.empty() ? 0.0 : static_cast<double>(count(o)) / static_cast<double>(trials.size());
}

nlohmann::json CampaignReport::to_json() const {
  nlohmann::json counts = nlohmann::json::object(), rates = nlohmann::json::object();
  for (auto o : {Outcome::masked, Outcome::detected_recovered, Outcome::kernel_failure,
                 Outcome::silent_corruption}) {
    counts[to_string(o)] = count(o);
    rates[to_string(o)] = rate(o);
  }
  auto per_trial = nlohmann::json::array();
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& t = trials[i];
    per_trial.push_back({{"trial", i},
                         {"outcome", to_string(t.outcome)},
                         {"faults_planned", t.faults_planned},
                         {"faults_fired", t.faults_fired},
                         {"detections", t.detections},
                         {"retries", t.retries},
                         {"failed_kernels", t.failed_kernels},
                         {"corrupted_outputs", t.corrupted_outputs},
                         {"error_peak", t.error_peak}});
  }
  return {{"schema_version", 1},
          {"config", config.to_json()},
          {"outcomes", counts},
          {"rates", rates},
          {"faults_fired", faults_fired},
          {"detections", detections},
          {"error_peak_histogram", error_peak_histogram},
          {"trials", per_trial}};
}

FaultPlan sample_plan(const CampaignConfig& cfg, std::size_t trial) {
  const double p = cfg.faults.probability;
  if (p <= 0.0 || cfg.faults.sites.empty()) return {};
  const auto& g = cfg.geometry;
  const Extents e = extents(g);
  const std::uint64_t total = static_cast<std::uint64_t>(g.filters) * e.out_h * e.out_w * e.ops_per_kernel;
  const std::uint32_t replicas = replica_count(cfg.variant);

  auto eligible = [&](bool mul) {
    std::vector<FaultSite> out;
    for (FaultSite s : cfg.faults.sites) {
      if (s == FaultSite::mul_result && !mul) continue;
      if (s == FaultSite::add_result && mul) continue;
      if (s == FaultSite::compare && cfg.variant == Variant::single) continue;
      out.push_back(s);
    }
    return out;
  };
  const std::vector<FaultSite> mul_sites = eligible(true), add_sites = eligible(false);

  CounterRng rng(cfg.seed, trial + 1);
  const double log_q = std::log1p(-p);
  auto skip = [&]() -> std::uint64_t {
    if (p >= 1.0) return 0;
    const double u = 1.0 - rng.uniform();  // (0, 1]
    const double s = std::floor(std::log(u) / log_q);
    return s >= static_cast<double>(total) ? total : static_cast<std::uint64_t>(s);
  };

  std::vector<FaultEntry> entries;
  for (std::uint64_t op = skip(); op < total; op += 1 + skip()) {
    const auto k = static_cast<std::uint32_t>(op % e.ops_per_kernel);
    std::uint64_t rest = op / e.ops_per_kernel;
    const auto x = static_cast<std::uint32_t>(rest % e.out_w);
    rest /= e.out_w;
    const auto y = static_cast<std::uint32_t>(rest % e.out_h);
    const auto f = static_cast<std::uint32_t>(rest / e.out_h);
    const auto& sites = k % 2 == 0 ? mul_sites : add_sites;
    if (sites.empty()) continue;
    FaultEntry entry;
    entry.coord = {0, f, y, x, k};
    entry.site = sites[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(sites.size()) - 1))];
    entry.kind = cfg.faults.kind;
    entry.replica = static_cast<std::uint32_t>(rng.uniform_int(0, replicas - 1));
    entry.mutation = cfg.faults.mutation
                         ? *cfg.faults.mutation
                         : Mutation::flip(static_cast<std::uint32_t>(rng.uniform_int(0, 31)));
    entries.push_back(entry);
  }
  return FaultPlan(std::move(entries));
}

CampaignReport run_campaign(const CampaignConfig& cfg, unsigned threads) {
  cfg.validate();
  if (cfg.domain == Domain::int32) return run_typed<std::int32_t>(cfg, threads);
  return run_typed<float>(cfg, threads);
}

}  // namespace relconv
