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

#include "relconv/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "relconv/bench.hpp"
#include "relconv/campaign.hpp"
#include "relconv/hybrid.hpp"
#include "relconv/image.hpp"
#include "relconv/network.hpp"
#include "relconv/reliable_conv.hpp"
#include "relconv/shape_qualifier.hpp"
#include "relconv/shapes.hpp"

namespace relconv {

unsigned worker_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RELCONV_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 0) n = std::min<unsigned>(n, static_cast<unsigned>(std::max(cap, 1L)));
  }
  return n;
}

namespace {

// Raised for anything the user can fix: bad flags, unreadable files, shape mismatches.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(path + " is not valid JSON: " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

FaultPlan load_plan(const std::string& path) {
  if (path.empty()) return {};
  const nlohmann::json j = read_json(path);
  // Either a bare entry array or an object wrapping it under "entries".
  return FaultPlan::from_json(j.is_object() && j.contains("entries") ? j.at("entries") : j);
}

// ---- convolve --------------------------------------------------------------

struct ConvolveArgs {
  std::string input, filters, layer = "conv1", mode = "redundant", faults, report, maps;
  std::string domain = "float", scope = "per_kernel";
  std::size_t stride = 1, padding = 0;
};

template <Element T>
Tensor<T> cast_weights(const Tensor<float>& w) {
  if constexpr (std::same_as<T, std::int32_t>) {
    for (float v : w.values()) {
      if (v != std::nearbyint(v) || std::abs(v) > 2147483520.0f) {
        throw UsageError("integer domain needs integral filter weights");
      }
    }
  }
  return tensor_cast<T>(w);
}

template <Element T>
int convolve_typed(const ConvolveArgs& a, const Image8& img, const Tensor<float>& weights,
                   std::ostream& out) {
  const Tensor<T> input = to_tensor<T>(img);
  const Tensor<T> filters = cast_weights<T>(weights);
  ConvConfig cfg{a.stride, a.padding, Variant::redundant};
  LayerReport report;
  Tensor<T> maps;
  if (a.mode == "plain") {
    maps = conv2d_plain(input, filters, cfg, worker_threads());
  } else {
    cfg.variant = parse_variant(a.mode);
    ConvOptions opts;
    opts.threads = worker_threads();
    if (a.scope == "layer_global") {
      opts.scope = BudgetScope::layer_global;
    } else if (a.scope != "per_kernel") {
      throw UsageError("unknown budget scope: " + a.scope);
    }
    auto r = conv2d(input, filters, cfg, load_plan(a.faults), opts);
    report = std::move(r.report);
    maps = std::move(r.feature_maps);
  }
  nlohmann::json j = report.to_json();
  j["mode"] = a.mode;
  j["output_shape"] = maps.shape();
  if (a.report.empty()) {
    out << j.dump(2) << '\n';
  } else {
    write_text(a.report, j.dump(2) + "\n");
  }
  if (!a.maps.empty()) {
    write_text(a.maps, nlohmann::json{{"schema_version", 1}, {"shape", maps.shape()},
                                      {"values", maps.values()}}
                           .dump() +
                           "\n");
  }
  return report.any_failure ? exit_code::kernel_failure : exit_code::ok;
}

int cmd_convolve(const ConvolveArgs& a, std::ostream& out) {
  Image8 img = read_pnm(a.input);
  const WeightStore store = WeightStore::load(a.filters);
  const Tensor<float>& w = store.get(a.layer);
  if (w.rank() != 4) throw UsageError(a.layer + " is not a (n, kh, kw, c) filter bank");
  const std::size_t c = w.extent(3);
  if (img.channels != c) {
    if (img.channels == 1) {
      img = expand_channels(img, c);
    } else if (c == 1) {
      const GrayImage g = to_gray(img);
      Image8 gray(img.width, img.height, 1);
      for (std::size_t i = 0; i < g.pixels.size(); ++i) {
        gray.data[i] = static_cast<std::uint8_t>(std::lround(g.pixels[i] * 255.0f));
      }
      img = std::move(gray);
    } else {
      throw UsageError("image has " + std::to_string(img.channels) + " channels, filters expect " +
                       std::to_string(c));
    }
  }
  if (a.mode != "plain") parse_variant(a.mode);  // reject unknown modes before running
  return parse_domain(a.domain) == Domain::int32 ? convolve_typed<std::int32_t>(a, img, w, out)
                                                 : convolve_typed<float>(a, img, w, out);
}

// ---- qualify ---------------------------------------------------------------

struct QualifyArgs {
  std::string input, ref = "octagon", reliable_edges;
  QualifierConfig cfg;
  double edge_threshold = -1.0;
};

int cmd_qualify(QualifyArgs a, std::ostream& out) {
  const Image8 img = read_pnm(a.input);
  if (img.width < 3 || img.height < 3) throw UsageError("image must be at least 3x3");
  if (a.ref != "octagon") a.cfg.reference = parse_sax_word(a.ref, a.cfg.alphabet);
  if (a.edge_threshold >= 0.0) a.cfg.edge_threshold = a.edge_threshold;
  if (!a.reliable_edges.empty()) a.cfg.edge_variant = parse_variant(a.reliable_edges);
  a.cfg.validate();
  const QualifierVerdict v = qualify_shape(to_gray(img), a.cfg);
  out << v.to_json().dump(2) << '\n';
  return v.accepted ? exit_code::ok : exit_code::rejected;
}

// ---- classify --------------------------------------------------------------

struct ClassifyArgs {
  std::string input, network, weights, policy, faults, wiring = "recompute";
  std::size_t sobel_filter = 0;
  QualifierConfig cfg;
};

int cmd_classify(const ClassifyArgs& a, std::ostream& out) {
  const NetworkSpec net = NetworkSpec::load(a.network);
  const WeightStore weights = WeightStore::load(a.weights);
  const SafetyPolicy policy = SafetyPolicy::load(a.policy);
  const Image8 img = read_pnm(a.input);
  ClassifyOptions opts;
  opts.wiring = parse_edge_wiring(a.wiring);
  opts.sobel_filter = a.sobel_filter;
  opts.forward.threads = worker_threads();
  opts.concurrent = worker_threads() > 1;
  const auto r = classify_qualified(net, weights, img, policy, a.cfg, load_plan(a.faults), opts);
  out << r.to_json().dump(2) << '\n';
  if (r.reliability.any_failure) return exit_code::kernel_failure;
  return r.qualified == Qualification::contradicted ? exit_code::rejected : exit_code::ok;
}

// ---- bench -----------------------------------------------------------------

struct BenchArgs {
  BenchGeometry geometry;
  std::size_t repeat = 5;
  std::string domain = "float";
  std::uint64_t seed = 1;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const auto& g = a.geometry;
  if (a.repeat < 3) throw UsageError("--repeat must be at least 3");
  if (g.height == 0 || g.width == 0 || g.channels == 0 || g.filters == 0 || g.kernel == 0 ||
      g.stride == 0) {
    throw UsageError("degenerate geometry");
  }
  const auto r = run_bench(g, a.repeat, parse_domain(a.domain), a.seed);
  out << r.to_json().dump(2) << '\n';
  return exit_code::ok;
}

// ---- campaign --------------------------------------------------------------

struct CampaignArgs {
  std::string config, out;
};

int cmd_campaign(const CampaignArgs& a, std::ostream& out) {
  const CampaignConfig cfg = CampaignConfig::from_json(read_json(a.config));
  const CampaignReport r = run_campaign(cfg, worker_threads());
  const nlohmann::json j = r.to_json();
  if (a.out.empty()) {
    out << j.dump(2) << '\n';
  } else {
    write_text(a.out, j.dump(2) + "\n");
    out << nlohmann::json{{"schema_version", 1}, {"outcomes", j.at("outcomes")},
                          {"rates", j.at("rates")}}
               .dump(2)
        << '\n';
  }
  return exit_code::ok;
}

// ---- generate --------------------------------------------------------------

struct GenerateArgs {
  std::string shape = "octagon", color, out;
  ShapeSpec spec;
};

int cmd_generate(GenerateArgs a, std::ostream&) {
  a.spec.kind = parse_shape_kind(a.shape);
  if (!a.color.empty()) {
    std::array<std::uint8_t, 3> rgb{};
    std::stringstream ss(a.color);
    std::string part;
    for (std::size_t i = 0; i < 3; ++i) {
      if (!std::getline(ss, part, ',')) throw UsageError("--color expects r,g,b");
      const int v = std::stoi(part);
      if (v < 0 || v > 255) throw UsageError("--color components must be 0..255");
      rgb[i] = static_cast<std::uint8_t>(v);
    }
    a.spec.color = rgb;
  }
  write_pnm(a.out, generate_shape(a.spec));
  return exit_code::ok;
}

// ---- init-weights / replace-filters ----------------------------------------

struct WeightArgs {
  std::string network, weights, out, layer = "conv1", filter;
  std::uint64_t seed = 1;
};

std::optional<std::size_t> filter_selector(const std::string& s) {
  if (s == "all") return std::nullopt;
  std::size_t pos = 0;
  const auto v = std::stoul(s, &pos);
  if (pos != s.size()) throw UsageError("--filter expects an index or 'all'");
  return v;
}

int cmd_init_weights(const WeightArgs& a, std::ostream&) {
  const NetworkSpec net = NetworkSpec::load(a.network);
  WeightStore w = random_weights(net, a.seed);
  if (!a.filter.empty()) {
    const auto f = filter_selector(a.filter);
    if (!f) throw UsageError("init-weights takes a single --filter index");
    w = preinit_filters(w, net, a.layer, *f);
  }
  w.save(a.out);
  return exit_code::ok;
}

int cmd_replace_filters(const WeightArgs& a, std::ostream& out) {
  const NetworkSpec net = NetworkSpec::load(a.network);
  const WeightStore w = WeightStore::load(a.weights);
  const auto f = filter_selector(a.filter.empty() ? "0" : a.filter);
  const auto stores = replace_filters(w, net, a.layer, f);
  auto written = nlohmann::json::array();
  for (std::size_t i = 0; i < stores.size(); ++i) {
    const std::string prefix = f ? a.out : a.out + "." + std::to_string(i);
    stores[i].save(prefix);
    written.push_back(prefix);
  }
  out << nlohmann::json{{"schema_version", 1}, {"written", written}}.dump(2) << '\n';
  return exit_code::ok;
}

struct PresetArgs {
  std::string network, policy;
};

int cmd_presets(const PresetArgs& a, std::ostream& out) {
  if (a.network.empty() && a.policy.empty()) {
    out << nlohmann::json{{"network", NetworkSpec::mini_alexnet().to_json()},
                          {"policy", SafetyPolicy::traffic_signs().to_json()}}
               .dump(2)
        << '\n';
  }
  if (!a.network.empty()) write_text(a.network, NetworkSpec::mini_alexnet().to_json().dump(2) + "\n");
  if (!a.policy.empty()) write_text(a.policy, SafetyPolicy::traffic_signs().to_json().dump(2) + "\n");
  return exit_code::ok;
}

void add_qualifier_flags(CLI::App* cmd, QualifierConfig& cfg) {
  cmd->add_option("--samples", cfg.samples, "radial samples N")->capture_default_str();
  cmd->add_option("--word-length", cfg.word_length, "SAX word length w")->capture_default_str();
  cmd->add_option("--alphabet", cfg.alphabet, "SAX alphabet size a")->capture_default_str();
  cmd->add_option("--threshold", cfg.threshold, "MINDIST acceptance bound T")->capture_default_str();
  cmd->add_option("--min-variation", cfg.min_variation,
                  "radial coefficient of variation below which a shape counts as flat")
      ->capture_default_str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reliable convolution, shape qualification and fault campaigns"};
  app.name("relconv");
  app.require_subcommand(1);
  std::function<int()> action;

  ConvolveArgs conv;
  auto* c = app.add_subcommand("convolve", "run one convolution layer and write a reliability report");
  c->add_option("--input", conv.input, "PGM/PPM image")->required();
  c->add_option("--filters", conv.filters, "weight store prefix")->required();
  c->add_option("--layer", conv.layer, "filter bank entry in the store")->capture_default_str();
  c->add_option("--mode", conv.mode, "plain|single|redundant|tmr")->capture_default_str();
  c->add_option("--faults", conv.faults, "fault plan JSON");
  c->add_option("--report", conv.report, "report path (stdout when omitted)");
  c->add_option("--maps", conv.maps, "write feature maps as JSON");
  c->add_option("--domain", conv.domain, "float|int")->capture_default_str();
  c->add_option("--stride", conv.stride)->capture_default_str();
  c->add_option("--padding", conv.padding)->capture_default_str();
  c->add_option("--budget-scope", conv.scope, "per_kernel|layer_global")->capture_default_str();
  c->callback([&] { action = [&] { return cmd_convolve(conv, out); }; });

  QualifyArgs qual;
  auto* q = app.add_subcommand("qualify", "run the shape qualifier on an image");
  q->add_option("--input", qual.input, "PGM/PPM image")->required();
  q->add_option("--ref", qual.ref, "'octagon' or an explicit SAX word")->capture_default_str();
  q->add_option("--edge-threshold", qual.edge_threshold, "fixed edge threshold (Otsu when omitted)");
  q->add_option("--reliable-edges", qual.reliable_edges,
                "run the Sobel stage through the qualified convolution (single|redundant|tmr)");
  add_qualifier_flags(q, qual.cfg);
  q->callback([&] { action = [&] { return cmd_qualify(qual, out); }; });

  ClassifyArgs cls;
  auto* k = app.add_subcommand("classify", "CNN classification gated by the shape qualifier");
  k->add_option("--input", cls.input, "PGM/PPM image")->required();
  k->add_option("--network", cls.network, "network spec JSON")->required();
  k->add_option("--weights", cls.weights, "weight store prefix")->required();
  k->add_option("--policy", cls.policy, "safety policy JSON")->required();
  k->add_option("--faults", cls.faults, "fault plan JSON for the reliable layers");
  k->add_option("--wiring", cls.wiring, "recompute|shared")->capture_default_str();
  k->add_option("--sobel-filter", cls.sobel_filter, "Sobel filter index for shared wiring")
      ->capture_default_str();
  add_qualifier_flags(k, cls.cfg);
  k->callback([&] { action = [&] { return cmd_classify(cls, out); }; });

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "time single against redundant execution");
  b->add_option("--height", bench.geometry.height)->capture_default_str();
  b->add_option("--width", bench.geometry.width)->capture_default_str();
  b->add_option("--channels", bench.geometry.channels)->capture_default_str();
  b->add_option("--filters", bench.geometry.filters)->capture_default_str();
  b->add_option("--kernel", bench.geometry.kernel)->capture_default_str();
  b->add_option("--stride", bench.geometry.stride)->capture_default_str();
  b->add_option("--padding", bench.geometry.padding)->capture_default_str();
  b->add_option("--repeat", bench.repeat, "timed runs per variant (>= 3)")->capture_default_str();
  b->add_option("--domain", bench.domain, "float|int")->capture_default_str();
  b->add_option("--seed", bench.seed)->capture_default_str();
  b->callback([&] { action = [&] { return cmd_bench(bench, out); }; });

  CampaignArgs camp;
  auto* m = app.add_subcommand("campaign", "seeded fault-injection campaign");
  m->add_option("--config", camp.config, "campaign config JSON")->required();
  m->add_option("--out", camp.out, "report path (stdout when omitted)");
  m->callback([&] { action = [&] { return cmd_campaign(camp, out); }; });

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "write a synthetic shape image");
  g->add_option("--shape", gen.shape, "octagon|circle|square|triangle|hexagon")->capture_default_str();
  g->add_option("--radius", gen.spec.radius, "circumradius in pixels")->capture_default_str();
  g->add_option("--rotation", gen.spec.rotation_deg, "degrees")->capture_default_str();
  g->add_option("--canvas", gen.spec.canvas, "square canvas size")->capture_default_str();
  g->add_option("--color", gen.color, "r,g,b fill on white (P6); gray P5 when omitted");
  g->add_option("--out", gen.out, "output path")->required();
  g->callback([&] { action = [&] { return cmd_generate(gen, out); }; });

  WeightArgs init;
  auto* i = app.add_subcommand("init-weights", "write seeded random weights for a network");
  i->add_option("--network", init.network, "network spec JSON")->required();
  i->add_option("--out", init.out, "weight store prefix")->required();
  i->add_option("--seed", init.seed)->capture_default_str();
  i->add_option("--layer", init.layer)->capture_default_str();
  i->add_option("--sobel-filter", init.filter, "pre-initialise this filter with the Sobel set");
  i->callback([&] { action = [&] { return cmd_init_weights(init, out); }; });

  WeightArgs repl;
  auto* r = app.add_subcommand("replace-filters", "write the Sobel set into conv filters");
  r->add_option("--network", repl.network, "network spec JSON")->required();
  r->add_option("--weights", repl.weights, "input weight store prefix")->required();
  r->add_option("--out", repl.out, "output prefix (suffixed .<i> for 'all')")->required();
  r->add_option("--layer", repl.layer)->capture_default_str();
  r->add_option("--filter", repl.filter, "filter index or 'all'")->capture_default_str();
  r->callback([&] { action = [&] { return cmd_replace_filters(repl, out); }; });

  PresetArgs pre;
  auto* p = app.add_subcommand("presets", "write the built-in network and traffic-sign policy");
  p->add_option("--network", pre.network, "network spec output path");
  p->add_option("--policy", pre.policy, "policy output path");
  p->callback([&] { action = [&] { return cmd_presets(pre, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::ok : exit_code::error;
  }
  try {
    return action();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::error;
  }
}

}  // namespace relconv
