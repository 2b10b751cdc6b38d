#include "devassist/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace devassist {

namespace {

using nlohmann::json;
using router::PerComplexity;

constexpr std::string_view kComplexityKeys[] = {"low", "medium", "high"};
constexpr std::string_view kKindKeys[] = {"syntax_fix", "completion", "refactor", "crash_analysis"};
constexpr std::string_view kSourceKeys[] = {"ide_interaction", "code_context", "runtime_log"};

std::string where(const YAML::Node& node, std::string_view key) {
  const auto mark = node.Mark();
  std::string out = "'" + std::string(key) + "'";
  if (mark.line >= 0) out += " (line " + std::to_string(mark.line + 1) + ")";
  return out;
}

void require_map(const YAML::Node& node, std::string_view path) {
  if (!node.IsMap()) throw ConfigError("config: " + std::string(path) + " must be a mapping");
}

void check_keys(const YAML::Node& node, std::string_view path, std::initializer_list<std::string_view> allowed) {
  require_map(node, path);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) throw ConfigError("config: unknown key " + where(kv.first, std::string(path) + "." + key));
  }
}

template <typename T>
void read(const YAML::Node& parent, std::string_view key, T& out) {
  const auto node = parent[std::string(key)];
  if (!node) return;
  try {
    out = node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("config: bad value for " + where(node, key));
  }
}

template <size_t N>
void read_named(const YAML::Node& parent, std::string_view key, std::array<double, N>& out,
                const std::string_view (&names)[N]) {
  const auto node = parent[std::string(key)];
  if (!node) return;
  require_map(node, key);
  for (const auto& kv : node) {
    const auto name = kv.first.as<std::string>();
    size_t i = 0;
    while (i < N && names[i] != name) ++i;
    if (i == N) throw ConfigError("config: unknown key " + where(kv.first, std::string(key) + "." + name));
    try {
      out[i] = kv.second.as<double>();
    } catch (const YAML::Exception&) {
      throw ConfigError("config: bad value for " + where(kv.second, name));
    }
  }
}

void read_range(const YAML::Node& parent, std::string_view key, std::array<uint32_t, 2>& out) {
  const auto node = parent[std::string(key)];
  if (!node) return;
  if (!node.IsSequence() || node.size() != 2) throw ConfigError("config: " + where(node, key) + " must be [lo, hi]");
  try {
    out = {node[0].as<uint32_t>(), node[1].as<uint32_t>()};
  } catch (const YAML::Exception&) {
    throw ConfigError("config: bad range for " + where(node, key));
  }
}

template <typename Enum, typename Parse>
void read_enum(const YAML::Node& parent, std::string_view key, Enum& out, Parse parse) {
  std::string text;
  read(parent, key, text);
  if (text.empty()) return;
  try {
    out = parse(text);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

void load_router(const YAML::Node& n, harness::SimConfig& sim) {
  check_keys(n, "router",
             {"gamma", "tolerance", "w_latency", "w_energy", "w_accuracy", "device_class", "battery",
              "edge_latency_ms", "cpu_latency_multiplier", "edge_energy_units", "edge_accuracy_loss",
              "cloud_compute_ms", "energy_ratio", "cloud_energy_units", "battery_drain_probability",
              "complexity_mix"});
  read(n, "gamma", sim.cost.discount_gamma);
  read(n, "tolerance", sim.vi_tolerance);
  read(n, "w_latency", sim.cost.w_latency);
  read(n, "w_energy", sim.cost.w_energy);
  read(n, "w_accuracy", sim.cost.w_accuracy);
  read_enum(n, "device_class", sim.device.device_class, router::parse_device);
  read_enum(n, "battery", sim.device.battery, router::parse_battery);
  read_named(n, "edge_latency_ms", sim.device.edge_base_latency_ms, kComplexityKeys);
  read(n, "cpu_latency_multiplier", sim.device.cpu_latency_multiplier);
  read_named(n, "edge_energy_units", sim.device.edge_energy_units, kComplexityKeys);
  read_named(n, "edge_accuracy_loss", sim.device.edge_accuracy_loss, kComplexityKeys);
  read_named(n, "cloud_compute_ms", sim.network.cloud_compute_ms, kComplexityKeys);
  read(n, "battery_drain_probability", sim.device.battery_drain_probability);
  read_named(n, "complexity_mix", sim.complexity_mix, kComplexityKeys);

  // Cloud energy defaults to a fixed multiple of edge energy.
  double ratio = 3.8;
  read(n, "energy_ratio", ratio);
  if (!(ratio >= 0.0)) throw ConfigError("config: router.energy_ratio must be non-negative");
  for (size_t c = 0; c < router::kComplexityCount; ++c) {
    sim.network.cloud_energy_units[c] = ratio * sim.device.edge_energy_units[c];
  }
  read_named(n, "cloud_energy_units", sim.network.cloud_energy_units, kComplexityKeys);
}

void load_network(const YAML::Node& n, harness::SimConfig& sim) {
  check_keys(n, "network", {"initial", "rtt_good_ms", "degraded_rtt_factor", "transition"});
  read_enum(n, "initial", sim.network.initial, router::parse_network);
  double good = sim.network.rtt_ms[0];
  double factor = 3.0;
  read(n, "rtt_good_ms", good);
  read(n, "degraded_rtt_factor", factor);
  sim.network.rtt_ms = {good, good * factor};
  if (const auto t = n["transition"]) {
    if (!t.IsSequence() || t.size() != router::kNetworkCount) {
      throw ConfigError("config: network.transition must be a 3x3 matrix (rows good, degraded, offline)");
    }
    for (size_t r = 0; r < router::kNetworkCount; ++r) {
      if (!t[r].IsSequence() || t[r].size() != router::kNetworkCount) {
        throw ConfigError("config: network.transition row " + std::to_string(r) + " must have 3 entries");
      }
      for (size_t c = 0; c < router::kNetworkCount; ++c) {
        try {
          sim.network.transition[r][c] = t[r][c].as<double>();
        } catch (const YAML::Exception&) {
          throw ConfigError("config: bad value in network.transition");
        }
      }
    }
  }
}

void load_workload(const YAML::Node& n, harness::SimConfig& sim) {
  check_keys(n, "workload", {"mix", "inter_arrival_mean_s", "ranges"});
  read_named(n, "mix", sim.workload.mix, kKindKeys);
  read(n, "inter_arrival_mean_s", sim.workload.inter_arrival_mean_s);
  if (const auto ranges = n["ranges"]) {
    require_map(ranges, "workload.ranges");
    for (size_t k = 0; k < harness::kTaskKindCount; ++k) {
      const auto r = ranges[std::string(kKindKeys[k])];
      if (!r) continue;
      check_keys(r, "workload.ranges." + std::string(kKindKeys[k]), {"files", "deps", "tokens"});
      read_range(r, "files", sim.workload.ranges[k].files);
      read_range(r, "deps", sim.workload.ranges[k].deps);
      read_range(r, "tokens", sim.workload.ranges[k].tokens);
    }
    for (const auto& kv : ranges) {
      const auto key = kv.first.as<std::string>();
      bool known = false;
      for (auto k : kKindKeys) known = known || k == key;
      if (!known) throw ConfigError("config: unknown key " + where(kv.first, "workload.ranges." + key));
    }
  }
}

void load_embed(const YAML::Node& n, embed::BandConfig& b) {
  check_keys(n, "embed",
             {"structural_dims", "identifier_dims", "literal_dims", "identifier_weight", "wl_iterations", "hash_seed"});
  read(n, "structural_dims", b.structural_dims);
  read(n, "identifier_dims", b.identifier_dims);
  read(n, "literal_dims", b.literal_dims);
  read(n, "identifier_weight", b.identifier_weight);
  read(n, "wl_iterations", b.wl_iterations);
  read(n, "hash_seed", b.hash_seed);
}

void load_fusion(const YAML::Node& n, fusion::FusionWeights& f) {
  check_keys(n, "fusion", {"priors", "temperature", "recency_half_life_s", "breakpoint_boost"});
  read_named(n, "priors", f.prior, kSourceKeys);
  read(n, "temperature", f.temperature);
  read(n, "recency_half_life_s", f.recency_half_life_s);
  read(n, "breakpoint_boost", f.breakpoint_boost);
}

void load_simulation(const YAML::Node& n, harness::SimConfig& sim) {
  check_keys(n, "simulation", {"n_tasks", "seed", "policy", "threshold", "offline_timeout_ms", "sub_second_ms"});
  read(n, "n_tasks", sim.n_tasks);
  read(n, "seed", sim.seed);
  read_enum(n, "policy", sim.policy, harness::parse_policy);
  read_enum(n, "threshold", sim.threshold, router::parse_complexity);
  read(n, "offline_timeout_ms", sim.offline_timeout_ms);
  read(n, "sub_second_ms", sim.sub_second_ms);
}

json per_complexity(const PerComplexity& v) {
  json out = json::object();
  for (size_t i = 0; i < v.size(); ++i) out[std::string(kComplexityKeys[i])] = v[i];
  return out;
}

json router_json(const harness::SimConfig& sim) {
  json transition = json::array();
  for (const auto& row : sim.network.transition) transition.push_back(row);
  return {{"router",
           {{"gamma", sim.cost.discount_gamma},
            {"tolerance", sim.vi_tolerance},
            {"w_latency", sim.cost.w_latency},
            {"w_energy", sim.cost.w_energy},
            {"w_accuracy", sim.cost.w_accuracy},
            {"device_class", router::to_string(sim.device.device_class)},
            {"battery", router::to_string(sim.device.battery)},
            {"edge_latency_ms", per_complexity(sim.device.edge_base_latency_ms)},
            {"cpu_latency_multiplier", sim.device.cpu_latency_multiplier},
            {"edge_energy_units", per_complexity(sim.device.edge_energy_units)},
            {"edge_accuracy_loss", per_complexity(sim.device.edge_accuracy_loss)},
            {"cloud_compute_ms", per_complexity(sim.network.cloud_compute_ms)},
            {"cloud_energy_units", per_complexity(sim.network.cloud_energy_units)},
            {"battery_drain_probability", sim.device.battery_drain_probability},
            {"complexity_mix", per_complexity(sim.complexity_mix)}}},
          {"network",
           {{"initial", router::to_string(sim.network.initial)},
            {"rtt_good_ms", sim.network.rtt_ms[0]},
            {"rtt_degraded_ms", sim.network.rtt_ms[1]},
            {"transition", std::move(transition)}}}};
}

}  // namespace

void AppConfig::validate() const {
  sim.validate();
  embed.validate();
  fusion.validate();
  if (max_files == 0) throw ConfigError("config: index.max_files must be positive");
}

AppConfig load_config_text(std::string_view yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: invalid YAML: ") + e.what());
  }
  AppConfig cfg;
  if (root.IsNull()) return cfg;
  try {
    check_keys(root, "<root>", {"router", "network", "workload", "embed", "fusion", "index", "simulation"});
    if (const auto n = root["router"]) load_router(n, cfg.sim);
    if (const auto n = root["network"]) load_network(n, cfg.sim);
    if (const auto n = root["workload"]) load_workload(n, cfg.sim);
    if (const auto n = root["embed"]) load_embed(n, cfg.embed);
    if (const auto n = root["fusion"]) load_fusion(n, cfg.fusion);
    if (const auto n = root["simulation"]) load_simulation(n, cfg.sim);
    if (const auto n = root["index"]) {
      check_keys(n, "index", {"max_files"});
      read(n, "max_files", cfg.max_files);
    }
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  try {
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

AppConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot read config file '" + path.string() + "'");
  std::ostringstream text;
  text << file.rdbuf();
  return load_config_text(text.str());
}

json config_to_json(const AppConfig& c) {
  json out = router_json(c.sim);
  json mix = json::object();
  json ranges = json::object();
  for (size_t k = 0; k < harness::kTaskKindCount; ++k) {
    const auto key = std::string(kKindKeys[k]);
    mix[key] = c.sim.workload.mix[k];
    const auto& r = c.sim.workload.ranges[k];
    ranges[key] = {{"files", r.files}, {"deps", r.deps}, {"tokens", r.tokens}};
  }
  out["workload"] = {{"mix", mix}, {"ranges", ranges}, {"inter_arrival_mean_s", c.sim.workload.inter_arrival_mean_s}};
  json priors = json::object();
  for (size_t s = 0; s < fusion::kSourceCount; ++s) priors[std::string(kSourceKeys[s])] = c.fusion.prior[s];
  out["fusion"] = {{"priors", priors},
                   {"temperature", c.fusion.temperature},
                   {"recency_half_life_s", c.fusion.recency_half_life_s},
                   {"breakpoint_boost", c.fusion.breakpoint_boost}};
  out["embed"] = {{"structural_dims", c.embed.structural_dims},
                  {"identifier_dims", c.embed.identifier_dims},
                  {"literal_dims", c.embed.literal_dims},
                  {"identifier_weight", c.embed.identifier_weight},
                  {"wl_iterations", c.embed.wl_iterations},
                  {"hash_seed", c.embed.hash_seed}};
  out["index"] = {{"max_files", c.max_files}};
  out["simulation"] = {{"n_tasks", c.sim.n_tasks},
                       {"seed", c.sim.seed},
                       {"policy", harness::to_string(c.sim.policy)},
                       {"threshold", router::to_string(c.sim.threshold)},
                       {"offline_timeout_ms", c.sim.offline_timeout_ms},
                       {"sub_second_ms", c.sim.sub_second_ms}};
  return out;
}

std::string router_config_hash(const AppConfig& config) {
  return to_hex(fnv1a64(router_json(config.sim).dump()));
}

std::string simulation_config_hash(const AppConfig& config) {
  const auto full = config_to_json(config);
  const json sim = {{"router", full["router"]},
                    {"network", full["network"]},
                    {"workload", full["workload"]},
                    {"simulation", full["simulation"]}};
  return to_hex(fnv1a64(sim.dump()));
}

}  // namespace devassist
